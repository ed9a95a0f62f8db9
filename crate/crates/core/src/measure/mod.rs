//! Weighted volumes `w(E ∩ Σ)` and weighted anisotropic perimeters
//! `∫_{∂E ∩ Σ} H(ν) w dS`.
//!
//! Star-shaped regions (Wulff sectors, star sets, centred balls) are
//! integrated in polar form over the cap `S^{n-1} ∩ Σ`, with the radial
//! integral done in closed form through homogeneity. Other regions use the
//! boundary form `w(E ∩ Σ) = (1/D) ∫_{∂(E∩Σ)} w x·ν dS`, whose part on `∂Σ`
//! vanishes because `x·ν = 0` on faces through the origin.

mod cap;
mod region;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use cap::{cap_integral, cap_integral_mc, monte_carlo};
pub use region::{CubicSpline, Polytope, RadialFn, RegionRep, StarSet, TangentFn};

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::linalg::{add, dot, norm, normalized, scale, sub};
use crate::quadrature::{Integral, Tolerance, Triangle};
use crate::sphere;
use crate::weights::Weight;

/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QuadratureMethod {
    Deterministic,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(flatten)]
    pub method: QuadratureMethod,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Cell budget of the adaptive rules.
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_max_cells() -> usize {
    200_000
}

impl QuadratureSpec {
    pub fn deterministic(rel_tol: f64) -> Self {
        QuadratureSpec {
            method: QuadratureMethod::Deterministic,
            rel_tol,
            max_cells: default_max_cells(),
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            method: QuadratureMethod::MonteCarlo { samples, seed },
            rel_tol: default_rel_tol(),
            max_cells: default_max_cells(),
        }
    }

    /// Deterministic for `n ≤ 3`, Monte Carlo with
    /// [`DEFAULT_MC_SAMPLES`] otherwise.
    pub fn default_for(n: usize) -> Self {
        if n <= 3 {
            Self::deterministic(default_rel_tol())
        } else {
            Self::monte_carlo(DEFAULT_MC_SAMPLES, 0)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_cells == 0 {
            return Err(Error::InvalidParameters(
                "quadrature tolerance and cell budget must be positive".into(),
            ));
        }
        if let QuadratureMethod::MonteCarlo { samples, .. } = self.method {
            if samples < 2 {
                return Err(Error::InvalidParameters(
                    "Monte Carlo needs at least 2 samples".into(),
                ));
            }
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.rel_tol, 1e-300, self.max_cells)
    }

    /// Monte Carlo parameters to use for this dimension, if any.
    fn mc(&self, n: usize) -> Option<(usize, u64)> {
        match self.method {
            QuadratureMethod::MonteCarlo { samples, seed } => Some((samples, seed)),
            QuadratureMethod::Deterministic if n > 3 => Some((DEFAULT_MC_SAMPLES, 0)),
            QuadratureMethod::Deterministic => None,
        }
    }
}

/// An estimate with a nonnegative error bound and the method used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
}

impl MeasureResult {
    fn from_integral(i: Integral, q: &QuadratureSpec, method: &str) -> Result<Self> {
        if !i.converged {
            return Err(Error::ToleranceNotMet {
                achieved: i.error / i.value.abs().max(1e-300),
                target: q.rel_tol,
            });
        }
        Ok(MeasureResult {
            value: i.value,
            error_estimate: i.error.max(0.0),
            method: method.to_string(),
        })
    }

    fn from_mc(value: f64, se: f64, samples: usize, seed: u64, what: &str) -> Self {
        MeasureResult {
            value,
            error_estimate: se,
            method: format!("monte_carlo({what}, n={samples}, seed={seed})"),
        }
    }

    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.value.abs().max(1e-300)
    }
}

fn check_dims(e: &RegionRep, w: &Weight, cone: &ConvexCone) -> Result<()> {
    if e.dim() != cone.dim() || w.dim() != cone.dim() {
        return Err(Error::InvalidParameters(
            "region, weight and cone dimensions differ".into(),
        ));
    }
    Ok(())
}

/// Kink directions of a region's radial function (planar breakpoints).
fn region_kinks(e: &RegionRep) -> Vec<Vec<f64>> {
    match e {
        RegionRep::WulffSector { gauge, .. } => gauge.kink_directions(),
        _ => Vec::new(),
    }
}

/// Radial function of a star-shaped region, if it is one about the origin.
fn radial(e: &RegionRep) -> Option<Box<dyn Fn(&[f64]) -> f64 + Sync + '_>> {
    match e {
        RegionRep::WulffSector { gauge, scale } => {
            Some(Box::new(move |u| scale * gauge.wulff_radius(u)))
        }
        RegionRep::StarSet(s) => Some(Box::new(move |u| s.rho(u))),
        RegionRep::Ball { center, radius } if norm(center) <= 1e-14 * radius => {
            Some(Box::new(move |_| *radius))
        }
        _ => None,
    }
}

/// `∫_{E ∩ Σ} w dx`.
pub fn weighted_volume(
    e: &RegionRep,
    w: &Weight,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<MeasureResult> {
    check_dims(e, w, cone)?;
    q.validate()?;
    let n = cone.dim();
    let d = w.effective_dimension();
    if let Some(rho) = radial(e) {
        let g = |u: &[f64]| w.angular(u) * rho(u).powf(d) / d;
        return polar(cone, g, &region_kinks(e), q, "polar");
    }
    match e {
        RegionRep::Ball { center, radius } => {
            ball_boundary(cone, center, *radius, q, "volume", |x, u| {
                w.eval_closed(x) * dot(x, u) / d
            })
        }
        RegionRep::Polytope(p) => polytope_boundary(p, cone, q, |_, h| h / d, |x| w.eval_closed(x)),
        _ => unreachable!("star-shaped regions handled above (n = {n})"),
    }
}

/// `∫_{∂E ∩ Σ} H(ν) w dS`.
pub fn weighted_perimeter(
    e: &RegionRep,
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<MeasureResult> {
    check_dims(e, w, cone)?;
    q.validate()?;
    if h.dim() != cone.dim() {
        return Err(Error::InvalidParameters(
            "gauge dimension differs from the cone".into(),
        ));
    }
    let n = cone.dim() as f64;
    let alpha = w.alpha();
    let mut kinks = region_kinks(e);
    kinks.extend(h.kink_directions());
    match e {
        RegionRep::WulffSector { gauge, scale: s } => {
            // dS = ρ^{n-1}/(ν·u) du and ν is the normal of ∂W at ρu
            let g = |u: &[f64]| {
                let rho = s * gauge.wulff_radius(u);
                let nu = gauge.wulff_normal(&scale(u, rho));
                let c = dot(&nu, u);
                rho.powf(n - 1.0 + alpha) * w.angular(u) * h.eval(&nu) / c
            };
            polar(cone, g, &kinks, q, "polar")
        }
        RegionRep::StarSet(st) => {
            let g = |u: &[f64]| {
                let rho = st.rho(u);
                let v = sub(&scale(u, rho), &st.tangent_gradient(u));
                rho.powf(n - 2.0 + alpha) * w.angular(u) * h.eval(&v)
            };
            polar(cone, g, &kinks, q, "polar")
        }
        RegionRep::Ball { center, radius } if norm(center) <= 1e-14 * radius => {
            let g = |u: &[f64]| radius.powf(n - 1.0 + alpha) * w.angular(u) * h.eval(u);
            polar(cone, g, &kinks, q, "polar")
        }
        RegionRep::Ball { center, radius } => {
            ball_boundary(cone, center, *radius, q, "perimeter", |x, u| {
                w.eval_closed(x) * h.eval(u)
            })
        }
        RegionRep::Polytope(p) => {
            polytope_boundary(p, cone, q, |nu, _| h.eval(nu), |x| w.eval_closed(x))
        }
    }
}

fn polar<G>(
    cone: &ConvexCone,
    g: G,
    kinks: &[Vec<f64>],
    q: &QuadratureSpec,
    label: &str,
) -> Result<MeasureResult>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if let Some((samples, seed)) = q.mc(cone.dim()) {
        let (v, se) = cap_integral_mc(cone, g, samples, seed);
        return Ok(MeasureResult::from_mc(v, se, samples, seed, label));
    }
    let i = cap_integral(cone, g, kinks, q.tolerance());
    let method = if cone.dim() == 2 {
        "adaptive_gk15(polar)"
    } else {
        "adaptive_simplex(polar)"
    };
    MeasureResult::from_integral(i, q, method)
}

/// `φ`-intervals where `c + R(cos φ, sin φ)` lies in the open planar cone.
fn arc_pieces(cone: &ConvexCone, c: &[f64], r: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0, 2.0 * PI];
    for a in cone.normals() {
        // a·c + R cos(φ - φ_a) = 0
        let s = -dot(a, c) / r;
        if s.abs() < 1.0 {
            let pa = sphere::angle_of(a);
            let d = s.acos();
            for t in [pa + d, pa - d] {
                cuts.push(t.rem_euclid(2.0 * PI));
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .filter(|w| {
            let m = 0.5 * (w[0] + w[1]);
            cone.contains(&[c[0] + r * m.cos(), c[1] + r * m.sin()])
        })
        .map(|w| (w[0], w[1]))
        .collect()
}

/// `∫_{∂B ∩ Σ} f(x, ν) dS` for a ball not centred at the origin.
fn ball_boundary<F>(
    cone: &ConvexCone,
    c: &[f64],
    r: f64,
    q: &QuadratureSpec,
    what: &str,
    f: F,
) -> Result<MeasureResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let n = cone.dim();
    let inside = cone.is_full_space() || cone.distance_to_boundary(c) >= r * (1.0 + 1e-12);
    let mc = q.mc(n).or(if n == 3 && !inside {
        Some((DEFAULT_MC_SAMPLES, 0))
    } else {
        None
    });
    if let Some((samples, seed)) = mc {
        let area = sphere::sphere_area(n) * r.powi(n as i32 - 1);
        let (m, se) = monte_carlo(samples, seed, |rng| {
            let u = crate::rng::unit_vector(rng, n);
            let x = crate::linalg::axpy(c, r, &u);
            if cone.contains(&x) {
                f(&x, &u)
            } else {
                0.0
            }
        });
        return Ok(MeasureResult::from_mc(
            area * m,
            area * se,
            samples,
            seed,
            &format!("ball {what}"),
        ));
    }
    let tol = q.tolerance();
    if n == 2 {
        let mut total = Integral::zero();
        for (a, b) in arc_pieces(cone, c, r) {
            let piece = crate::quadrature::integrate_1d(
                |t| {
                    let u = [t.cos(), t.sin()];
                    let x = [c[0] + r * u[0], c[1] + r * u[1]];
                    f(&x, &u) * r
                },
                a,
                b,
                &[],
                tol,
            );
            total = total.add(piece);
        }
        return MeasureResult::from_integral(total, q, "adaptive_gk15(arcs)");
    }
    let full = ConvexCone::full_space(3)?;
    let i = cap_integral(
        &full,
        |u| {
            let x = crate::linalg::axpy(c, r, u);
            f(&x, u) * r * r
        },
        &[],
        tol,
    );
    MeasureResult::from_integral(i, q, "adaptive_simplex(sphere)")
}

/// Facet pieces of `∂E ∩ Σ̄`, with unit normal and support value.
struct Piece {
    nu: Vec<f64>,
    h: f64,
    /// segment endpoints (planar) or a convex polygon (spatial)
    points: Vec<Vec<f64>>,
}

fn polytope_pieces(p: &Polytope, cone: &ConvexCone) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for k in 0..p.facets().len() {
        let (nu, _, h) = p.facet_plane(k)?;
        let pts = p.facet_points(k);
        let clipped = if p.dim() == 2 {
            match cap::clip_segment(&pts[0], &pts[1], cone) {
                Some((s0, s1)) => {
                    let d = sub(&pts[1], &pts[0]);
                    vec![
                        crate::linalg::axpy(&pts[0], s0, &d),
                        crate::linalg::axpy(&pts[0], s1, &d),
                    ]
                }
                None => continue,
            }
        } else {
            let mut poly = pts;
            for a in cone.normals() {
                poly = cap::clip_polygon(&poly, a);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            poly
        };
        if cap::lies_on_boundary(&clipped, cone) {
            continue;
        }
        out.push(Piece {
            nu,
            h,
            points: clipped,
        });
    }
    Ok(out)
}

/// `Σ_facets coef(ν, h) ∫_{facet ∩ Σ̄} f dS`.
fn polytope_boundary<C, F>(
    p: &Polytope,
    cone: &ConvexCone,
    q: &QuadratureSpec,
    coef: C,
    f: F,
) -> Result<MeasureResult>
where
    C: Fn(&[f64], f64) -> f64,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pieces = polytope_pieces(p, cone)?;
    if let QuadratureMethod::MonteCarlo { samples, seed } = q.method {
        // sample boundary cells proportionally to their measure
        let mut cells: Vec<(f64, f64, Triangle)> = Vec::new();
        for pc in &pieces {
            let c = coef(&pc.nu, pc.h);
            if p.dim() == 2 {
                let a = &pc.points[0];
                let b = &pc.points[1];
                let t = [[a[0], a[1], 0.0], [b[0], b[1], 0.0], [b[0], b[1], 0.0]];
                cells.push((norm(&sub(b, a)), c, t));
            } else {
                for t in cap::fan(&pc.points) {
                    cells.push((crate::quadrature::triangle_area(&t), c, t));
                }
            }
        }
        let total: f64 = cells.iter().map(|c| c.0).sum();
        let mut cum = Vec::with_capacity(cells.len());
        let mut acc = 0.0;
        for c in &cells {
            acc += c.0;
            cum.push(acc);
        }
        let dim = p.dim();
        let (m, se) = monte_carlo(samples, seed, |rng| {
            use rand::Rng;
            let s = rng.gen::<f64>() * total;
            let k = cum.partition_point(|&c| c < s).min(cells.len() - 1);
            let (_, c, t) = &cells[k];
            let x: Vec<f64> = if dim == 2 {
                let l: f64 = rng.gen();
                (0..2).map(|i| t[0][i] + l * (t[1][i] - t[0][i])).collect()
            } else {
                cap::sample_triangle(rng, t)
            };
            c * f(&x)
        });
        return Ok(MeasureResult::from_mc(
            total * m,
            total * se,
            samples,
            seed,
            "polytope boundary",
        ));
    }
    let tol = q.tolerance();
    let mut sum = Integral::zero();
    for pc in &pieces {
        let c = coef(&pc.nu, pc.h);
        if c == 0.0 {
            continue;
        }
        let i = if p.dim() == 2 {
            cap::segment_integral(&pc.points[0], &pc.points[1], (0.0, 1.0), &f, tol)
        } else {
            cap::polygon_integral(&pc.points, &f, tol)
        };
        sum = sum.add(i.scaled(c));
    }
    let method = if p.dim() == 2 {
        "adaptive_gk15(edges)"
    } else {
        "adaptive_simplex(facets)"
    };
    MeasureResult::from_integral(sum, q, method)
}

/// Both sides of `P_{w,H}(W; Σ) = D w(W ∩ Σ)`, computed independently.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub lhs: MeasureResult,
    pub rhs: MeasureResult,
    pub relative_gap: f64,
}

pub fn per_vol_identity_check(
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<IdentityReport> {
    let e = RegionRep::wulff(h.clone(), 1.0)?;
    let lhs = weighted_perimeter(&e, w, h, cone, q)?;
    let vol = weighted_volume(&e, w, cone, q)?;
    if !(vol.value > 0.0) {
        return Err(Error::EmptyIntersection(
            "W ∩ Σ has zero weighted volume".into(),
        ));
    }
    let d = w.effective_dimension();
    let rhs = MeasureResult {
        value: d * vol.value,
        error_estimate: d * vol.error_estimate,
        method: vol.method,
    };
    let relative_gap = (lhs.value - rhs.value).abs() / rhs.value.abs();
    Ok(IdentityReport {
        lhs,
        rhs,
        relative_gap,
    })
}

/// `H_w = H_eucl + (1/n) ∂_ν w / w` at a boundary point, with `H_eucl` the
/// mean of the principal curvatures (so `1/R` on a sphere of radius `R`).
/// `x` is projected onto `∂E` along the relevant parametrization first.
pub fn generalized_mean_curvature(e: &RegionRep, w: &Weight, x: &[f64]) -> Result<f64> {
    let n = e.dim();
    if x.len() != n || w.dim() != n {
        return Err(Error::InvalidParameters("dimension mismatch".into()));
    }
    let (p, nu, h_eucl) = match e {
        RegionRep::Ball { center, radius } => {
            let d = sub(x, center);
            if norm(&d) == 0.0 {
                return Err(Error::CurvatureUndefined("point is the ball centre".into()));
            }
            let nu = normalized(&d);
            (add(center, &scale(&nu, *radius)), nu, 1.0 / radius)
        }
        RegionRep::WulffSector { gauge, scale: s } => {
            if !gauge.has_smooth_wulff_shape() {
                return Err(Error::CurvatureUndefined(format!(
                    "{} has a non-smooth Wulff shape",
                    gauge.describe()
                )));
            }
            let u = normalized(x);
            let p = scale(&u, s * gauge.wulff_radius(&u));
            let field = |y: &[f64]| gauge.wulff_normal(y);
            (
                p.clone(),
                field(&p),
                divergence(&field, &p) / (n as f64 - 1.0),
            )
        }
        RegionRep::StarSet(st) => {
            if !st.is_smooth() {
                return Err(Error::CurvatureUndefined(
                    "radial function is not C²".into(),
                ));
            }
            let u = normalized(x);
            let p = scale(&u, st.rho(&u));
            // unit normal field of the level sets of |y| - ρ(y/|y|)
            let field = |y: &[f64]| {
                let r = norm(y);
                let v = scale(y, 1.0 / r);
                normalized(&sub(&v, &scale(&st.tangent_gradient(&v), 1.0 / r)))
            };
            (
                p.clone(),
                field(&p),
                divergence(&field, &p) / (n as f64 - 1.0),
            )
        }
        RegionRep::Polytope(_) => {
            return Err(Error::CurvatureUndefined(
                "polytope boundaries are not twice differentiable".into(),
            ))
        }
    };
    let wv = w.eval(&p);
    if !(wv > 0.0) || !h_eucl.is_finite() {
        return Err(Error::CurvatureUndefined(format!(
            "weight vanishes or curvature blows up at {p:?}"
        )));
    }
    let dn = dot(&w.gradient(&p), &nu);
    Ok(h_eucl + dn / (n as f64 * wv))
}

/// `div N` by central differences with step `1e-4·|x|`.
fn divergence<F: Fn(&[f64]) -> Vec<f64>>(field: &F, x: &[f64]) -> f64 {
    let h = 1e-4 * norm(x);
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (field(&a)[i] - field(&b)[i]) / (2.0 * h)
        })
        .sum()
}

#[cfg(test)]
mod tests;
