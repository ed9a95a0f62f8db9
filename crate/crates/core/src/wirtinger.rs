//! Weighted Wirtinger-type inequality on planar sectors.
//!
//! For a density `B` on `(0, β)` the smallest Rayleigh quotient
//! `∫ (u')² B / ∫ u² B` over `u` with `∫ u B = 0` is computed with
//! piecewise-linear elements and free endpoints, and compared with `1 + α`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_1d, Tolerance};
use crate::weights::Weight;

/// Tolerance on the `1 + α` threshold.
pub const THRESHOLD_TOL: f64 = 1e-3;
pub const MIN_NODES: usize = 64;
pub const DEFAULT_NODES: usize = 512;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct SectorDensity {
    beta: f64,
    alpha: f64,
    nodes: usize,
    periodic: bool,
    density: Density,
    tag: String,
    samples: Vec<f64>,
}

impl std::fmt::Debug for SectorDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectorDensity")
            .field("tag", &self.tag)
            .field("beta", &self.beta)
            .field("alpha", &self.alpha)
            .field("nodes", &self.nodes)
            .field("periodic", &self.periodic)
            .finish()
    }
}

impl SectorDensity {
    /// Density `B` on `(0, β)`; with `β = 2π` the circle is treated as periodic.
    pub fn new(
        tag: impl Into<String>,
        beta: f64,
        alpha: f64,
        nodes: usize,
        density: Density,
    ) -> Result<Self> {
        let periodic = (beta - 2.0 * PI).abs() < 1e-12;
        if !(beta > 0.0 && (beta <= PI + 1e-12 || periodic)) {
            return Err(Error::InvalidParameters(format!(
                "opening must lie in (0, π] or equal 2π, got {beta}"
            )));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "degree must be ≥ 0, got {alpha}"
            )));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidParameters(format!(
                "at least {MIN_NODES} nodes are required, got {nodes}"
            )));
        }
        let h = beta / (nodes - 1) as f64;
        let samples: Vec<f64> = (0..nodes).map(|i| density(i as f64 * h)).collect();
        let interior = if periodic {
            &samples[..]
        } else {
            &samples[1..nodes - 1]
        };
        if let Some(bad) = interior.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidParameters(format!(
                "density must be positive inside the sector, found {bad}"
            )));
        }
        Ok(SectorDensity {
            beta,
            alpha,
            nodes,
            periodic,
            density,
            tag: tag.into(),
            samples,
        })
    }

    pub fn constant(beta: f64, nodes: usize) -> Result<Self> {
        Self::new("constant", beta, 0.0, nodes, Arc::new(|_| 1.0))
    }

    /// `B(θ) = sin^α θ` on `(0, π)`.
    pub fn sin_power(alpha: f64, nodes: usize) -> Result<Self> {
        Self::new(
            format!("sin^{alpha}"),
            PI,
            alpha,
            nodes,
            Arc::new(move |t: f64| t.sin().max(0.0).powf(alpha)),
        )
    }

    /// Angular part of a planar weight, with `θ` measured from the first edge
    /// of its cone.
    pub fn from_weight(w: &Weight, nodes: usize) -> Result<Self> {
        if w.dim() != 2 {
            return Err(Error::Unsupported(format!(
                "the stability test is planar, weight has dimension {}",
                w.dim()
            )));
        }
        let cone = w.cone();
        let (lo, beta) = if cone.is_full_space() {
            (0.0, 2.0 * PI)
        } else {
            let (lo, hi) = cone.arc().expect("planar cone");
            (lo, hi - lo)
        };
        let wc = w.clone();
        Self::new(
            w.tag().to_string(),
            beta,
            w.alpha(),
            nodes,
            Arc::new(move |t: f64| wc.angular(&[(lo + t).cos(), (lo + t).sin()])),
        )
    }

    /// Same density multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let d = self.density.clone();
        Self::new(
            self.tag.clone(),
            self.beta,
            self.alpha,
            self.nodes,
            Arc::new(move |t| c * d(t)),
        )
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(
            self.tag.clone(),
            self.beta,
            self.alpha,
            nodes,
            self.density.clone(),
        )
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nodes(&self) -> usize {
        self.nodes
    }
    pub fn tag(&self) -> &str {
        &self.tag
    }
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
    /// `B` at the grid nodes.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WirtingerResult {
    pub tag: String,
    pub beta: f64,
    pub alpha: f64,
    pub lambda1: f64,
    pub threshold: f64,
    pub satisfies: bool,
}

/// Element integrals `(∫B, ∫Bφ₀², ∫Bφ₀φ₁, ∫Bφ₁²)` on `[a, a + h]`.
fn element(
    density: &Density,
    a: f64,
    h: f64,
    exact: bool,
    gauss: &(Vec<f64>, Vec<f64>),
) -> [f64; 4] {
    if exact {
        let tol = Tolerance::new(1e-13, 1e-300, 20_000);
        let f = |k: usize| {
            integrate_1d(
                |t| {
                    let s = (t - a) / h;
                    let b = density(t);
                    b * match k {
                        0 => 1.0,
                        1 => (1.0 - s) * (1.0 - s),
                        2 => (1.0 - s) * s,
                        _ => s * s,
                    }
                },
                a,
                a + h,
                &[],
                tol,
            )
            .value
        };
        return [f(0), f(1), f(2), f(3)];
    }
    let mut out = [0.0; 4];
    for (x, wq) in gauss.0.iter().zip(&gauss.1) {
        let s = 0.5 * (x + 1.0);
        let b = density(a + s * h) * 0.5 * wq * h;
        out[0] += b;
        out[1] += b * (1.0 - s) * (1.0 - s);
        out[2] += b * (1.0 - s) * s;
        out[3] += b * s * s;
    }
    out
}

/// Smallest constrained Rayleigh quotient and whether it reaches `1 + α`.
pub fn wirtinger_eigenvalue(s: &SectorDensity) -> Result<WirtingerResult> {
    let m = s.nodes;
    // periodic grids identify the last node with the first
    let dofs = if s.periodic { m - 1 } else { m };
    let h = s.beta / (m - 1) as f64;
    let gauss = gauss_legendre(3);
    let mut k = DMatrix::<f64>::zeros(dofs, dofs);
    let mut mass = DMatrix::<f64>::zeros(dofs, dofs);
    for e in 0..m - 1 {
        let endpoint = !s.periodic && (e == 0 || e == m - 2);
        let [b, m00, m01, m11] = element(&s.density, e as f64 * h, h, endpoint, &gauss);
        let i = e;
        let j = if s.periodic { (e + 1) % dofs } else { e + 1 };
        let kk = b / (h * h);
        k[(i, i)] += kk;
        k[(j, j)] += kk;
        k[(i, j)] -= kk;
        k[(j, i)] -= kk;
        mass[(i, i)] += m00;
        mass[(j, j)] += m11;
        mass[(i, j)] += m01;
        mass[(j, i)] += m01;
    }
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularDensity("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let diag_min = l.diagonal().iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let diag_max = l.diagonal().iter().fold(0.0f64, |a, b| a.max(*b));
    if !(diag_min > 1e-12 * diag_max) {
        return Err(Error::SingularDensity(format!(
            "mass matrix condition estimate {:.3e}",
            (diag_max / diag_min).powi(2)
        )));
    }
    // A = L⁻¹ K L⁻ᵀ
    let linv_k = l.solve_lower_triangular(&k).expect("nonsingular factor");
    let a = l
        .solve_lower_triangular(&linv_k.transpose())
        .expect("nonsingular factor");
    let a = (&a + a.transpose()) * 0.5;
    // constants span the kernel of K; in the transformed variables they are Lᵀ1
    let mut v = l.transpose() * DVector::from_element(dofs, 1.0);
    v /= v.norm();
    let shift = a.diagonal().iter().fold(0.0f64, |x, y| x.max(y.abs())) * 4.0 + 1.0;
    let deflated = &a + (&v * v.transpose()) * shift;
    let lambda1 = deflated
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let threshold = 1.0 + s.alpha;
    Ok(WirtingerResult {
        tag: s.tag.clone(),
        beta: s.beta,
        alpha: s.alpha,
        lambda1,
        threshold,
        satisfies: lambda1 >= threshold - THRESHOLD_TOL,
    })
}

/// Runs several sectors in parallel.
pub fn wirtinger_batch(cases: &[SectorDensity]) -> Vec<Result<WirtingerResult>> {
    use rayon::prelude::*;
    cases.par_iter().map(wirtinger_eigenvalue).collect()
}
