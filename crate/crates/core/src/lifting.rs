//! Lifting of a weighted problem in `Σ ⊂ R^n` with an integer degree
//! `α ∈ {1, 2}` to an unweighted problem in the thin cone
//! `C_ε = {(x, y) : x ∈ Σ, |y| < ε w(x)^{1/α}} ⊂ R^{n+α}`.
//!
//! Volumes are sampled directly in `R^{n+α}`. The lateral boundary of a
//! cylinder `E × R^α` is integrated as the boundary of `E` times the
//! measure of the cross-section of `C_ε` over each boundary point.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::abp::{region_box, LevelSet};
use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::isoperimetry::quotient;
use crate::measure::{
    monte_carlo, weighted_perimeter, weighted_volume, QuadratureMethod, QuadratureSpec, RegionRep,
};
use crate::rng::{stream, unit_vector};
use crate::sphere;
use crate::weights::Weight;

/// Safety factor on the sampled maximum of `w` used to size the `y` box.
const HEIGHT_MARGIN: f64 = 1.25;

#[derive(Clone, Debug)]
pub struct LiftedCone {
    weight: Weight,
    alpha: usize,
    epsilon: f64,
}

/// Volume of the unit ball in `R^k`.
pub fn omega(k: usize) -> f64 {
    match k {
        1 => 2.0,
        2 => PI,
        _ => sphere::unit_ball_volume(k),
    }
}

impl LiftedCone {
    pub fn new(weight: Weight, epsilon: f64) -> Result<Self> {
        let a = weight.alpha();
        if a == 0.0 {
            return Err(Error::InvalidParameters(
                "degree 0 needs no lifting; the weighted problem is already unweighted".into(),
            ));
        }
        if !(a == 1.0 || a == 2.0) {
            return Err(Error::InvalidParameters(format!(
                "lifting needs degree 1 or 2, got {a}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "ε must be positive, got {epsilon}"
            )));
        }
        Ok(LiftedCone {
            alpha: a as usize,
            weight,
            epsilon,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        LiftedCone::new(self.weight.clone(), epsilon)
    }

    pub fn base(&self) -> &ConvexCone {
        self.weight.cone()
    }
    pub fn weight(&self) -> &Weight {
        &self.weight
    }
    pub fn alpha(&self) -> usize {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    /// `n + α`.
    pub fn dim(&self) -> usize {
        self.weight.dim() + self.alpha
    }

    /// Radius of the cross-section of `C_ε` over `x ∈ Σ`.
    pub fn height(&self, x: &[f64]) -> f64 {
        self.epsilon * self.weight.eval(x).max(0.0).powf(1.0 / self.alpha as f64)
    }

    /// Measure of the cross-section `{y : (x, y) ∈ C_ε}`.
    pub fn section(&self, x: &[f64]) -> f64 {
        omega(self.alpha) * self.height(x).powi(self.alpha as i32)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let n = self.weight.dim();
        let (x, y) = z.split_at(n);
        self.base().contains(x) && y.iter().map(|v| v * v).sum::<f64>().sqrt() < self.height(x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftedVolume {
    pub lifted: f64,
    pub lifted_error: f64,
    pub predicted: f64,
    pub predicted_error: f64,
    pub relative_gap: f64,
    /// `|lifted - predicted|` in units of the combined error.
    pub sigmas: f64,
    pub samples: usize,
    pub seed: u64,
}

fn mc_params(q: &QuadratureSpec) -> Result<(usize, u64)> {
    match q.method {
        QuadratureMethod::MonteCarlo { samples, seed } if samples >= 2 => Ok((samples, seed)),
        _ => Err(Error::InvalidParameters(
            "lifted volumes need a Monte Carlo spec with a seed".into(),
        )),
    }
}

/// Box around `E ∩ Σ` in `R^n` and half-width of the `y` box.
fn sampling_box(e: &RegionRep, l: &LiftedCone) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let cone = l.base();
    let (mut lo, hi) = region_box(e)?;
    for a in cone.normals() {
        let axis: Vec<usize> = (0..a.len()).filter(|&k| a[k].abs() > 1e-14).collect();
        if axis.len() == 1 && a[axis[0]] > 0.0 {
            lo[axis[0]] = lo[axis[0]].max(0.0);
        }
    }
    let n = cone.dim();
    let far = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| a.abs().max(b.abs()).powi(2))
        .sum::<f64>()
        .sqrt();
    let peak = sphere::directions(n, if n == 2 { 4000 } else { 40000 })
        .iter()
        .filter(|u| cone.contains(u))
        .map(|u| l.weight.eval(u))
        .fold(0.0f64, f64::max);
    let width = HEIGHT_MARGIN * l.epsilon * (peak.powf(1.0 / l.alpha as f64) * far);
    Ok((lo, hi, width))
}

/// `|(E × R^α) ∩ C_ε|` by uniform sampling of a box in `R^{n+α}`, against
/// `ω_α ε^α w(E ∩ Σ)`.
pub fn lifted_volume(e: &RegionRep, l: &LiftedCone, mc: &QuadratureSpec) -> Result<LiftedVolume> {
    let (samples, seed) = mc_params(mc)?;
    let cone = l.base();
    if e.dim() != cone.dim() {
        return Err(Error::InvalidParameters(
            "region and cone dimensions differ".into(),
        ));
    }
    let (lifted, lifted_error) = sample_volume(e, l, samples, seed)?;
    let wv = weighted_volume(e, &l.weight, cone, &QuadratureSpec::deterministic(1e-10))?;
    let c = omega(l.alpha) * l.epsilon.powi(l.alpha as i32);
    let predicted = c * wv.value;
    let predicted_error = c * wv.error_estimate;
    let spread = (lifted_error.powi(2) + predicted_error.powi(2)).sqrt();
    let gap = (lifted - predicted).abs();
    Ok(LiftedVolume {
        lifted,
        lifted_error,
        predicted,
        predicted_error,
        relative_gap: if predicted > 0.0 {
            gap / predicted
        } else {
            gap
        },
        sigmas: if spread > 0.0 {
            gap / spread
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        },
        samples,
        seed,
    })
}

fn sample_volume(e: &RegionRep, l: &LiftedCone, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let level = LevelSet::from_region(e)?;
    let (lo, hi, width) = sampling_box(e, l)?;
    if width == 0.0 || lo.iter().zip(&hi).any(|(a, b)| b <= a) {
        return Ok((0.0, 0.0));
    }
    let n = lo.len();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product::<f64>()
        * (2.0 * width).powi(l.alpha as i32);
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let mut z: Vec<f64> = (0..n)
            .map(|k| lo[k] + rng.gen::<f64>() * (hi[k] - lo[k]))
            .collect();
        z.extend((0..l.alpha).map(|_| width * (2.0 * rng.gen::<f64>() - 1.0)));
        if level.value(&z[..n]) < 0.0 && l.contains(&z) {
            1.0
        } else {
            0.0
        }
    });
    Ok((box_volume * m, box_volume * se))
}

/// One row of the convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct LiftRow {
    pub epsilon: f64,
    pub lifted_volume: f64,
    pub lifted_perimeter: f64,
    pub lifted_quotient: f64,
    /// `lifted_quotient / (ω_α ε^α)^{1/(n+α)}`.
    pub normalized_quotient: f64,
    pub normalized_error: f64,
    pub target: f64,
    pub target_error: f64,
    pub relative_error: f64,
}

/// Unweighted quotient of `(E × R^α) ∩ C_ε` relative to `C_ε` for each `ε`,
/// compared with the weighted quotient of `E` in `Σ`.
pub fn lifted_quotient_convergence(
    e: &RegionRep,
    l: &LiftedCone,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<LiftRow>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameters("empty ε sequence".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters(
            "ε sequence must be strictly decreasing".into(),
        ));
    }
    let cone = l.base().clone();
    let n = cone.dim();
    let eu = Gauge::euclidean(n);
    let target = quotient(
        e,
        &l.weight,
        &eu,
        &cone,
        &QuadratureSpec::deterministic(1e-10),
    )?;
    let dl = (n + l.alpha) as f64;
    epsilons
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| {
            let le = l.with_epsilon(eps)?;
            let (vol, vol_se) = sample_volume(e, &le, samples, stream_seed(seed, 2 * k as u64))?;
            let section = {
                let le = le.clone();
                Weight::custom(
                    "cross_section",
                    le.alpha as f64,
                    cone.clone(),
                    Arc::new(move |x: &[f64]| le.section(x)),
                    None,
                )?
            };
            let per = weighted_perimeter(
                e,
                &section,
                &eu,
                &cone,
                &QuadratureSpec::monte_carlo(samples, stream_seed(seed, 2 * k as u64 + 1)),
            )?;
            if !(vol > 0.0 && per.value > 0.0) {
                return Err(Error::EmptyIntersection(
                    "E does not meet the lifted cone".into(),
                ));
            }
            let lq = per.value / vol.powf((dl - 1.0) / dl);
            let norm = (omega(le.alpha) * eps.powi(le.alpha as i32)).powf(1.0 / dl);
            let normalized = lq / norm;
            let rel = per.relative_error() + (dl - 1.0) / dl * vol_se / vol;
            Ok(LiftRow {
                epsilon: eps,
                lifted_volume: vol,
                lifted_perimeter: per.value,
                lifted_quotient: lq,
                normalized_quotient: normalized,
                normalized_error: normalized * rel,
                target: target.quotient,
                target_error: target.quotient_error,
                relative_error: (normalized - target.quotient).abs() / target.quotient,
            })
        })
        .collect()
}

/// Independent seed for the `k`-th sub-computation.
fn stream_seed(seed: u64, k: u64) -> u64 {
    stream(seed, k).gen()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `|y_mid| / height(x_mid) - 1` over violating midpoints.
    pub worst: f64,
}

impl ConvexityReport {
    pub fn is_convex(&self) -> bool {
        self.violations == 0
    }
}

/// Midpoint test for convexity of `C_ε` on pairs drawn from its part over
/// the unit ball.
pub fn convexity_check(l: &LiftedCone, pairs: usize, seed: u64) -> ConvexityReport {
    let n = l.weight.dim();
    let cone = l.base().clone();
    let draw = |rng: &mut crate::rng::Stream| -> Vec<f64> {
        let x = loop {
            let x: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
            if x.iter().map(|v| v * v).sum::<f64>() < 1.0 && cone.contains(&x) {
                break x;
            }
        };
        let r = l.height(&x) * rng.gen::<f64>().powf(1.0 / l.alpha as f64);
        let u = unit_vector(rng, l.alpha);
        let mut z = x;
        z.extend(u.iter().map(|v| r * v));
        z
    };
    const CHUNK: usize = 1024;
    let chunks = pairs.div_ceil(CHUNK);
    let parts: Vec<(usize, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let mut bad = 0;
            let mut worst = 0.0f64;
            for _ in 0..CHUNK.min(pairs - c * CHUNK) {
                let a = draw(&mut rng);
                let b = draw(&mut rng);
                let m: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
                let (x, y) = m.split_at(n);
                let ry = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let hgt = l.height(x);
                let excess = if hgt > 0.0 {
                    ry / hgt - 1.0
                } else {
                    f64::INFINITY
                };
                if !cone.contains(x) || excess > 1e-12 {
                    bad += 1;
                    worst = worst.max(excess);
                }
            }
            (bad, worst)
        })
        .collect();
    ConvexityReport {
        pairs,
        violations: parts.iter().map(|p| p.0).sum(),
        worst: parts.iter().map(|p| p.1).fold(0.0, f64::max),
    }
}
