//! Sampled checks of homogeneity, concavity of `w^{1/α}`, and the tangent
//! inequality `α (w(z)/w(x))^{1/α} ≤ ∇w(x)·z / w(x)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Weight;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, scale};
use crate::rng::{stream, Stream};

/// Minimum distance of samples to `∂Σ`, relative to `|x|`.
pub const SAMPLE_MARGIN: f64 = 1e-3;
const HOMOGENEITY_TOL: f64 = 1e-8;
const EIGEN_TOL: f64 = 1e-6;
const MIDPOINT_TOL: f64 = 1e-9;
const INCONCLUSIVE_BELOW: usize = 1000;

fn sample_point(w: &Weight, rng: &mut Stream) -> Vec<f64> {
    let u = w.cone().sample_direction(rng, SAMPLE_MARGIN);
    let r: f64 = rng.gen_range(0.5..2.0);
    scale(&u, r)
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub samples: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Max of `|w(tx)/(t^α w(x)) - 1|` over random `x ∈ Σ`, `t ∈ [0.1, 10]`
/// (log-uniform).
pub fn check_homogeneity(w: &Weight, samples: usize, seed: u64) -> HomogeneityReport {
    let samples = samples.max(1);
    let max = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let x = sample_point(w, &mut rng);
            let t = 10f64.powf(rng.gen_range(-1.0..1.0));
            let lhs = w.eval(&scale(&x, t));
            let rhs = t.powf(w.alpha()) * w.eval(&x);
            let e = (lhs / rhs - 1.0).abs();
            if e.is_finite() {
                e
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 0.0, f64::max);
    HomogeneityReport {
        samples,
        max_relative_error: max,
        tolerance: HOMOGENEITY_TOL,
        passed: max <= HOMOGENEITY_TOL,
    }
}

/// Max relative error of Euler's identity `∇w(x)·x = α w(x)` at random points.
pub fn check_euler_identity(w: &Weight, samples: usize, seed: u64) -> f64 {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let x = sample_point(w, &mut rng);
            let g = w.gradient(&x);
            let v = w.eval(&x);
            let lhs = dot(&g, &x);
            (lhs - w.alpha() * v).abs() / (w.alpha() * v).abs().max(v.abs()).max(1e-300)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Admissible,
    Inadmissible,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Admissible => "admissible",
            Verdict::Inadmissible => "inadmissible",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcavityReport {
    pub sampled_points: usize,
    /// Largest Hessian eigenvalue of `v = w^{1/α}` seen.
    pub max_eigenvalue: f64,
    /// Largest eigenvalue divided by the local scale `v/|x|² + ρ(D²v)`.
    pub max_relative_eigenvalue: f64,
    pub midpoint_violations: usize,
    /// Grid points where the planar test failed; `None` outside `n = 2`.
    pub planar_violations: Option<usize>,
    pub verdict: Verdict,
}

/// `v = w^{1/α}`.
fn root(w: &Weight, x: &[f64]) -> f64 {
    w.eval(x).powf(1.0 / w.alpha())
}

/// `∇v = v ∇w / (α w)`.
fn root_gradient(w: &Weight, x: &[f64]) -> Vec<f64> {
    let val = w.eval(x);
    let v = val.powf(1.0 / w.alpha());
    scale(&w.gradient(x), v / (w.alpha() * val))
}

/// Hessian of `v` at `x`. With a closed-form gradient the Hessian is the
/// central difference of `∇v` with step `1e-4·min(|x|, d(x))`, which keeps
/// the truncation error small next to `∂Σ`. Otherwise second differences of
/// `v` with step `min(1e-4·|x|, d(x)/2)`.
fn hessian(w: &Weight, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let r = norm(x);
    let d = w.cone().distance_to_boundary(x);
    let mut h = vec![vec![0.0; n]; n];
    if w.has_analytic_gradient() {
        let step = 1e-4 * r.min(d);
        for i in 0..n {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += step;
            m[i] -= step;
            let gp = root_gradient(w, &p);
            let gm = root_gradient(w, &m);
            for j in 0..n {
                h[i][j] = (gp[j] - gm[j]) / (2.0 * step);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = s;
                h[j][i] = s;
            }
        }
    } else {
        let step = (1e-4 * r).min(0.5 * d);
        let v0 = root(w, x);
        let shifted = |di: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for (i, s) in di {
                y[*i] += s * step;
            }
            root(w, &y)
        };
        for i in 0..n {
            h[i][i] = (shifted(&[(i, 1.0)]) - 2.0 * v0 + shifted(&[(i, -1.0)])) / (step * step);
            for j in 0..i {
                let v = (shifted(&[(i, 1.0), (j, 1.0)])
                    - shifted(&[(i, 1.0), (j, -1.0)])
                    - shifted(&[(i, -1.0), (j, 1.0)])
                    + shifted(&[(i, -1.0), (j, -1.0)]))
                    / (4.0 * step * step);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
    }
    h
}

fn eigenvalues(h: &[Vec<f64>]) -> Vec<f64> {
    let n = h.len();
    let m = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

struct PointSample {
    max_eig: f64,
    rel: f64,
    flat: bool,
    midpoint_violation: bool,
}

/// Sampled concavity test of `w^{1/α}` on `Σ`.
///
/// Each sample contributes one Hessian evaluation and one midpoint pair. In
/// the plane a `θ`-grid test of `f'' + f ≤ 0` for `f = B^{1/α}` is added.
pub fn check_concavity(w: &Weight, samples: usize, seed: u64) -> Result<ConcavityReport> {
    let samples = samples.max(1);
    if w.alpha() == 0.0 {
        let x0 = w.cone().interior_direction();
        let v0 = w.eval(&x0);
        let mut max_dev: f64 = 0.0;
        for i in 0..samples as u64 {
            let mut rng = stream(seed, i);
            let x = sample_point(w, &mut rng);
            max_dev = max_dev.max((w.eval(&x) / v0 - 1.0).abs());
        }
        let constant = max_dev <= 1e-12;
        return Ok(ConcavityReport {
            sampled_points: samples,
            max_eigenvalue: 0.0,
            max_relative_eigenvalue: 0.0,
            midpoint_violations: if constant { 0 } else { 1 },
            planar_violations: None,
            verdict: if constant {
                Verdict::Admissible
            } else {
                Verdict::Inadmissible
            },
        });
    }

    let results: Vec<Result<PointSample>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let x = sample_point(w, &mut rng);
            let y = sample_point(w, &mut rng);
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            for p in [&x, &y, &mid] {
                if !w.cone().contains(p) {
                    return Err(Error::DomainError(format!("sample {p:?} left the cone")));
                }
            }
            let vx = root(w, &x);
            let vy = root(w, &y);
            let vm = root(w, &mid);
            if !(vx.is_finite() && vy.is_finite() && vm.is_finite()) {
                return Err(Error::DomainError(format!(
                    "weight is not finite near {x:?}"
                )));
            }
            let avg = 0.5 * (vx + vy);
            let midpoint_violation = vm < avg - MIDPOINT_TOL * (1.0 + avg.abs());

            let eig = eigenvalues(&hessian(w, &x));
            let rho = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            let max_eig = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // natural size of D²v for a 1-homogeneous v: v/|x|² and |∇v|/|x|
            let grad = if w.has_analytic_gradient() {
                norm(&root_gradient(w, &x))
            } else {
                0.0
            };
            let base = vx / dot(&x, &x) + grad / norm(&x);
            Ok(PointSample {
                max_eig,
                rel: max_eig / (base + rho),
                flat: rho <= EIGEN_TOL * base,
                midpoint_violation,
            })
        })
        .collect();

    let mut max_eigenvalue = f64::NEG_INFINITY;
    let mut max_rel = f64::NEG_INFINITY;
    let mut midpoint_violations = 0;
    let mut all_flat = true;
    for r in results {
        let s = r?;
        max_eigenvalue = max_eigenvalue.max(s.max_eig);
        max_rel = max_rel.max(s.rel);
        midpoint_violations += s.midpoint_violation as usize;
        all_flat &= s.flat;
    }

    let planar_violations = if w.dim() == 2 {
        Some(planar_check(w, 2000).0)
    } else {
        None
    };

    let violated =
        max_rel > EIGEN_TOL || midpoint_violations > 0 || planar_violations.unwrap_or(0) > 0;
    let verdict = if violated {
        Verdict::Inadmissible
    } else if samples < INCONCLUSIVE_BELOW && all_flat {
        Verdict::Inconclusive
    } else {
        Verdict::Admissible
    };
    Ok(ConcavityReport {
        sampled_points: samples,
        max_eigenvalue,
        max_relative_eigenvalue: max_rel,
        midpoint_violations,
        planar_violations,
        verdict,
    })
}

/// Planar test on a uniform grid of `points` angles kept `1e-3` rad away
/// from the ends of the arc. Returns the number of violations of
/// `f'' + f ≤ 1e-6 (|f| + |f''|)` and the largest value of
/// `(f'' + f) / (|f| + |f''|)`.
///
/// With `u = (cos θ, sin θ)` and `f(θ) = v(u)`, `f'(θ) = ∇v(u)·u⊥`, so `f''` is
/// a first difference of `f'` when the gradient is closed-form.
pub fn planar_check(w: &Weight, points: usize) -> (usize, f64) {
    let (lo, hi) = w.cone().arc().expect("planar cone");
    let full = w.cone().is_full_space();
    let margin = if full { 0.0 } else { SAMPLE_MARGIN };
    let (a, b) = (lo + margin, hi - margin);
    let analytic = w.has_analytic_gradient();
    let f = |t: f64| root(w, &[t.cos(), t.sin()]);
    let df = |t: f64| {
        let g = root_gradient(w, &[t.cos(), t.sin()]);
        -g[0] * t.sin() + g[1] * t.cos()
    };
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..points {
        let t = if full {
            a + (b - a) * k as f64 / points as f64
        } else {
            a + (b - a) * k as f64 / (points - 1) as f64
        };
        let edge = if full { 1.0 } else { (t - lo).min(hi - t) };
        let fv = f(t);
        let f2 = if analytic {
            let h = 1e-4 * edge.min(1.0);
            (df(t + h) - df(t - h)) / (2.0 * h)
        } else {
            let h = 1e-4 * edge.min(1.0).max(1e-2);
            (f(t + h) - 2.0 * fv + f(t - h)) / (h * h)
        };
        let s = fv.abs() + f2.abs();
        let q = (f2 + fv) / s.max(1e-300);
        worst = worst.max(q);
        if f2 + fv > EIGEN_TOL * s {
            violations += 1;
        }
    }
    (violations, worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct TicReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `lhs = α (w(z)/w(x))^{1/α}`, `rhs = ∇w(x)·z / w(x)`.
///
/// The comparison uses a tolerance of `1e-9·max(1, |rhs|)` for closed-form
/// gradients and `1e-6·max(1, |rhs|)` for difference gradients.
pub fn lemma_tic_check(w: &Weight, x: &[f64], z: &[f64]) -> Result<TicReport> {
    if w.alpha() <= 0.0 {
        return Err(Error::InvalidParameters(
            "the tangent inequality needs α > 0".into(),
        ));
    }
    if x.len() != w.dim() || z.len() != w.dim() {
        return Err(Error::DomainError(
            "point dimension does not match the weight".into(),
        ));
    }
    if !w.cone().contains(x) || !w.cone().contains(z) {
        return Err(Error::DomainError(
            "points must lie in the open cone".into(),
        ));
    }
    let wx = w.eval(x);
    let wz = w.eval(z);
    let lhs = w.alpha() * (wz / wx).powf(1.0 / w.alpha());
    let rhs = dot(&w.gradient(x), z) / wx;
    let tol = if w.has_analytic_gradient() {
        1e-9
    } else {
        1e-6
    };
    Ok(TicReport {
        lhs,
        rhs,
        holds: lhs <= rhs + tol * rhs.abs().max(1.0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TicSweep {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` observed.
    pub worst_gap: f64,
}

/// [`lemma_tic_check`] on `pairs` random pairs in the cone.
pub fn lemma_tic_sweep(w: &Weight, pairs: usize, seed: u64) -> Result<TicSweep> {
    let res: Vec<Result<TicReport>> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let x = sample_point(w, &mut rng);
            let z = sample_point(w, &mut rng);
            lemma_tic_check(w, &x, &z)
        })
        .collect();
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for r in res {
        let r = r?;
        violations += (!r.holds) as usize;
        worst = worst.max(r.lhs - r.rhs);
    }
    Ok(TicSweep {
        pairs,
        violations,
        worst_gap: worst,
    })
}
