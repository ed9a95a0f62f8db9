//! Isoperimetric quotients, the sharp constant of the Wulff sector, and
//! randomized searches for sets beating it.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::linalg::{dot, scale, sub};
use crate::measure::{
    weighted_perimeter, weighted_volume, MeasureResult, QuadratureSpec, RadialFn, RegionRep,
    StarSet, TangentFn,
};
use crate::rng::{stream, Stream};
use crate::sphere;
use crate::weights::Weight;

#[derive(Clone, Debug, Serialize)]
pub struct QuotientResult {
    pub perimeter: MeasureResult,
    pub volume: MeasureResult,
    pub d: f64,
    /// `Q = P / V^{(D-1)/D}`.
    pub quotient: f64,
    pub quotient_error: f64,
    /// `Q* = D w(W ∩ Σ)^{1/D}`.
    pub sharp_constant: f64,
    pub sharp_error: f64,
    pub margin: f64,
}

/// `Q*` with its propagated error.
pub fn sharp_constant(
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let d = w.effective_dimension();
    let v = weighted_volume(&RegionRep::wulff(h.clone(), 1.0)?, w, cone, q)?;
    if !(v.value > 0.0) {
        return Err(Error::EmptyIntersection(
            "W ∩ Σ has zero weighted volume".into(),
        ));
    }
    let qs = d * v.value.powf(1.0 / d);
    Ok((qs, qs * v.relative_error() / d))
}

fn quotient_with(
    e: &RegionRep,
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
    sharp: (f64, f64),
) -> Result<QuotientResult> {
    let d = w.effective_dimension();
    let volume = weighted_volume(e, w, cone, q)?;
    if !(volume.value > 0.0) {
        return Err(Error::InvalidParameters(
            "weighted volume of E ∩ Σ is not positive".into(),
        ));
    }
    let perimeter = weighted_perimeter(e, w, h, cone, q)?;
    let expo = (d - 1.0) / d;
    let quotient = perimeter.value / volume.value.powf(expo);
    let quotient_error = quotient * (perimeter.relative_error() + expo * volume.relative_error());
    Ok(QuotientResult {
        perimeter,
        volume,
        d,
        quotient,
        quotient_error,
        sharp_constant: sharp.0,
        sharp_error: sharp.1,
        margin: quotient - sharp.0,
    })
}

/// `Q(E)` and its margin over `Q*`.
pub fn quotient(
    e: &RegionRep,
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<QuotientResult> {
    let sharp = sharp_constant(w, h, cone, q)?;
    quotient_with(e, w, h, cone, q, sharp)
}

/// Largest `|Q(rE)/Q(E) - 1|` over `scales`.
pub fn scaling_invariance_check(
    e: &RegionRep,
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    scales: &[f64],
    q: &QuadratureSpec,
) -> Result<f64> {
    if scales.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameters("scales must be positive".into()));
    }
    let sharp = (0.0, 0.0);
    let base = quotient_with(e, w, h, cone, q, sharp)?.quotient;
    let mut dev: f64 = 0.0;
    for &r in scales {
        let qr = quotient_with(&e.scaled(r), w, h, cone, q, sharp)?.quotient;
        dev = dev.max((qr / base - 1.0).abs());
    }
    Ok(dev)
}

/// Candidate families for [`perturbation_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    /// Largest relative amplitude `δ` of radial perturbations, in `(0, 0.5]`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Highest mode: Fourier index in the plane, polynomial degree in space.
    #[serde(default = "default_modes")]
    pub max_mode: usize,
    /// Fraction of trials spent on translated balls.
    #[serde(default = "default_ball_fraction")]
    pub ball_fraction: f64,
    /// Fraction of trials spent on dilated Wulff sectors.
    #[serde(default = "default_scaled_fraction")]
    pub scaled_fraction: f64,
}

fn default_amplitude() -> f64 {
    0.2
}
fn default_modes() -> usize {
    6
}
fn default_ball_fraction() -> f64 {
    0.2
}
fn default_scaled_fraction() -> f64 {
    0.05
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            amplitude: default_amplitude(),
            max_mode: default_modes(),
            ball_fraction: default_ball_fraction(),
            scaled_fraction: default_scaled_fraction(),
        }
    }
}

impl PerturbationSpec {
    fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude <= 0.5) {
            return Err(Error::InvalidParameters(format!(
                "amplitude must lie in (0, 0.5], got {}",
                self.amplitude
            )));
        }
        if self.max_mode == 0 {
            return Err(Error::InvalidParameters("max_mode must be ≥ 1".into()));
        }
        let f = self.ball_fraction + self.scaled_fraction;
        if self.ball_fraction < 0.0 || self.scaled_fraction < 0.0 || f > 1.0 {
            return Err(Error::InvalidParameters(
                "candidate fractions must be ≥ 0 and sum to at most 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub candidate: String,
    pub quotient: f64,
    pub error: f64,
    pub margin: f64,
    pub violation: bool,
    /// Set when the candidate could not be measured.
    pub inconclusive: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub sharp_constant: f64,
    pub sharp_error: f64,
    pub min_quotient: f64,
    pub argmin: String,
    pub argmin_trial: Option<usize>,
    pub violations: Vec<usize>,
    pub trials: Vec<TrialRecord>,
}

/// Random radial perturbation `ξ` with `|ξ| ≤ 1` and its tangential gradient.
fn random_mode(
    cone: &ConvexCone,
    max_mode: usize,
    rng: &mut Stream,
) -> (RadialFn, TangentFn, String) {
    let n = cone.dim();
    if n == 2 {
        let (lo, hi) = cone.arc().expect("planar");
        let full = cone.is_full_space();
        // angle map: full circle uses θ, a sector uses s = π(θ - lo)/(hi - lo)
        let (a0, k0) = if full {
            (0.0, 1.0)
        } else {
            (lo, PI / (hi - lo))
        };
        let mut coef = Vec::with_capacity(max_mode);
        for k in 1..=max_mode {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = rng.gen_range(-1.0..1.0);
            coef.push((k as f64, c / k as f64, s / k as f64));
        }
        let total: f64 = coef.iter().map(|(_, c, s)| c.abs() + s.abs()).sum();
        let coef: Vec<(f64, f64, f64)> = coef
            .into_iter()
            .map(|(k, c, s)| (k, c / total, s / total))
            .collect();
        let dominant = coef
            .iter()
            .max_by(|a, b| (a.1.abs() + a.2.abs()).total_cmp(&(b.1.abs() + b.2.abs())))
            .map(|c| c.0 as usize)
            .unwrap_or(1);
        let c1 = coef.clone();
        let xi: RadialFn = Arc::new(move |u: &[f64]| {
            let mut t = sphere::angle_of(u);
            if !full {
                while t < lo - 1e-12 {
                    t += 2.0 * PI;
                }
                while t > hi + 1e-12 {
                    t -= 2.0 * PI;
                }
            }
            let s = k0 * (t - a0);
            c1.iter()
                .map(|(k, c, sn)| c * (k * s).cos() + sn * (k * s).sin())
                .sum()
        });
        let c2 = coef;
        let grad: TangentFn = Arc::new(move |u: &[f64]| {
            let mut t = sphere::angle_of(u);
            if !full {
                while t < lo - 1e-12 {
                    t += 2.0 * PI;
                }
                while t > hi + 1e-12 {
                    t -= 2.0 * PI;
                }
            }
            let s = k0 * (t - a0);
            let d: f64 = c2
                .iter()
                .map(|(k, c, sn)| k0 * k * (-c * (k * s).sin() + sn * (k * s).cos()))
                .sum();
            vec![-u[1] * d, u[0] * d]
        });
        return (
            xi,
            grad,
            format!("fourier(K={max_mode},dominant={dominant})"),
        );
    }
    // monomials u^a with 1 ≤ |a| ≤ max_mode
    let mut terms: Vec<(Vec<i32>, f64)> = Vec::new();
    let deg = max_mode.min(4) as i32;
    let mut idx = vec![0i32; n];
    loop {
        let s: i32 = idx.iter().sum();
        if s >= 1 && s <= deg {
            let c: f64 = rng.gen_range(-1.0..1.0) / s as f64;
            terms.push((idx.clone(), c));
        }
        let mut k = 0;
        loop {
            if k == n {
                break;
            }
            idx[k] += 1;
            if idx[k] > deg {
                idx[k] = 0;
                k += 1;
            } else {
                break;
            }
        }
        if k == n {
            break;
        }
    }
    let total: f64 = terms.iter().map(|t| t.1.abs()).sum();
    for t in &mut terms {
        t.1 /= total;
    }
    let t1 = terms.clone();
    let xi: RadialFn = Arc::new(move |u: &[f64]| {
        t1.iter()
            .map(|(a, c)| c * a.iter().zip(u).map(|(p, x)| x.powi(*p)).product::<f64>())
            .sum()
    });
    let t2 = terms;
    let grad: TangentFn = Arc::new(move |u: &[f64]| {
        let mut g = vec![0.0; u.len()];
        for (a, c) in &t2 {
            for i in 0..u.len() {
                if a[i] == 0 {
                    continue;
                }
                let mut v = c * a[i] as f64 * u[i].powi(a[i] - 1);
                for j in 0..u.len() {
                    if j != i {
                        v *= u[j].powi(a[j]);
                    }
                }
                g[i] += v;
            }
        }
        let r = dot(&g, u);
        sub(&g, &scale(u, r))
    });
    (xi, grad, format!("polynomial(deg≤{deg})"))
}

fn random_ball(cone: &ConvexCone, rng: &mut Stream) -> (RegionRep, String) {
    let n = cone.dim();
    if cone.is_full_space() {
        let u = crate::rng::unit_vector(rng, n);
        let r: f64 = rng.gen_range(0.3..1.5);
        // a third of the balls pass through the origin
        let s: f64 = if rng.gen_bool(1.0 / 3.0) {
            1.0
        } else {
            rng.gen_range(0.0..1.5)
        };
        let c = scale(&u, r * s);
        let desc = format!("ball(|c|/R={s:.3},R={r:.3})");
        return (RegionRep::ball(c, r).expect("valid ball"), desc);
    }
    let u = cone.sample_direction(rng, 0.05);
    let t: f64 = rng.gen_range(0.5..2.0);
    let c = scale(&u, t);
    let r = rng.gen_range(0.2..0.95) * cone.distance_to_boundary(&c);
    let desc = format!("ball(|c|={t:.3},R={r:.3})");
    (RegionRep::ball(c, r).expect("valid ball"), desc)
}

/// Candidate `i` of a search with `trials` trials; the same region that
/// [`perturbation_search`] measures.
pub fn search_candidate(
    h: &Gauge,
    cone: &ConvexCone,
    spec: &PerturbationSpec,
    trials: usize,
    seed: u64,
    i: usize,
) -> (Result<RegionRep>, String) {
    let n_balls = (spec.ball_fraction * trials as f64).round() as usize;
    let n_scaled = (spec.scaled_fraction * trials as f64).round() as usize;
    let mut rng = stream(seed, i as u64);
    if i < n_scaled {
        let r: f64 = rng.gen_range(0.5..2.0);
        (RegionRep::wulff(h.clone(), r), format!("wulff(r={r:.3})"))
    } else if i < n_scaled + n_balls {
        let (b, d) = random_ball(cone, &mut rng);
        (Ok(b), d)
    } else {
        let (xi, grad, d) = random_mode(cone, spec.max_mode, &mut rng);
        let delta = rng.gen_range(0.0..spec.amplitude) + f64::EPSILON;
        let label = format!("{d},delta={delta:.3}");
        (
            StarSet::perturbed_wulff(cone, h, label.clone(), delta, xi, grad)
                .map(RegionRep::StarSet),
            label,
        )
    }
}

/// Random candidates: radial perturbations `ρ_W (1 + δξ)`, translated balls
/// and dilated Wulff sectors. A violation is `Q < Q* - 3 (ε_Q + ε_Q*)`.
pub fn perturbation_search(
    w: &Weight,
    h: &Gauge,
    cone: &ConvexCone,
    spec: &PerturbationSpec,
    trials: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<SearchReport> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameters("trials must be ≥ 1".into()));
    }
    let sharp = sharp_constant(w, h, cone, q)?;
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (region, candidate) = search_candidate(h, cone, spec, trials, seed, i);
            let outcome = region.and_then(|e| quotient_with(&e, w, h, cone, q, sharp));
            match outcome {
                Ok(r) => {
                    let err = r.quotient_error + sharp.1;
                    TrialRecord {
                        trial: i,
                        candidate,
                        quotient: r.quotient,
                        error: err,
                        margin: r.margin,
                        violation: r.quotient < sharp.0 - 3.0 * err,
                        inconclusive: None,
                    }
                }
                Err(e) => TrialRecord {
                    trial: i,
                    candidate,
                    quotient: f64::NAN,
                    error: f64::NAN,
                    margin: f64::NAN,
                    violation: false,
                    inconclusive: Some(e.to_string()),
                },
            }
        })
        .collect();
    let best = records
        .iter()
        .filter(|r| r.quotient.is_finite())
        .min_by(|a, b| a.quotient.total_cmp(&b.quotient));
    let (min_quotient, argmin, argmin_trial) = best.map_or((f64::NAN, String::new(), None), |r| {
        (r.quotient, r.candidate.clone(), Some(r.trial))
    });
    let violations = records
        .iter()
        .filter(|r| r.violation)
        .map(|r| r.trial)
        .collect();
    Ok(SearchReport {
        sharp_constant: sharp.0,
        sharp_error: sharp.1,
        min_quotient,
        argmin,
        argmin_trial,
        violations,
        trials: records,
    })
}
