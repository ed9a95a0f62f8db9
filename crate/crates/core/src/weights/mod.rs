//! Homogeneous weights `w` on a convex cone, with gradients.

mod catalog;
mod checks;
mod symmetric;

use std::fmt;
use std::sync::Arc;

pub use catalog::{catalog, controls, lookup, CatalogEntry, ProductFactor, WeightSpec};
pub use checks::{
    check_concavity, check_euler_identity, check_homogeneity, lemma_tic_check, lemma_tic_sweep,
    planar_check, ConcavityReport, HomogeneityReport, TicReport, TicSweep, Verdict,
};

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, scale};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Planar profile `t ↦ (f(t), f'(t))` for weights `x₁ f(x₂/x₁)`.
pub type ProfileFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind {
    Constant,
    /// `Π x_i^{A_i}`.
    Monomial {
        exponents: Vec<f64>,
    },
    /// `dist(x, ∂Σ)^α`.
    DistancePower,
    /// `(Σ A_i x_i^{1/p})^{αp}`, `p ≥ 1`.
    PMean {
        p: f64,
        coeffs: Vec<f64>,
    },
    /// `(Σ A_i x_i^{-r})^{-α/r}`, `r > 0`.
    HarmonicMean {
        r: f64,
        coeffs: Vec<f64>,
    },
    /// `min_i (A_i x_i)^α`.
    MinCoordinate {
        coeffs: Vec<f64>,
    },
    /// `(x₁² - Σ_{i≥2} λ_i x_i²)^{α/2}`.
    Lorentz {
        lambdas: Vec<f64>,
    },
    /// `σ_k^{α/k}`.
    SigmaK {
        k: usize,
    },
    /// `(σ_l / σ_k)^{α/(l-k)}`.
    SigmaRatio {
        k: usize,
        l: usize,
    },
    /// `(Π_{|S|=r} Σ_{j∈S} x_j)^{α/C(n,r)}`.
    SubsetSums {
        r: usize,
    },
    /// `(x₁ f(x₂/x₁))^α` with `f` the logarithmic mean profile.
    LogarithmicMean,
    /// `(x₁ f(x₂/x₁))^α` with `f` the identric mean profile.
    IdentricMean,
    /// `x^{a+1} y^{b+1} (x^p + y^p)^{-1/p}`, degree `a + b + 1`.
    PlanarProduct {
        a: f64,
        b: f64,
        p: f64,
    },
    /// `(x₁ f(x₂/x₁))^α` for a user profile.
    PlanarProfile {
        name: String,
        f: ProfileFn,
    },
    /// `|x|^α`; never admissible for `α > 0`, kept as a negative control.
    Radial,
    /// `Π v_i^{e_i}` with `v_i = w_i^{1/α_i}`, degree `Σ e_i`.
    Product {
        factors: Vec<(Weight, f64)>,
    },
    /// `(v₁^r + v₂^r)^{α/r}` with `v_i = w_i^{1/α_i}`.
    PowerMean {
        first: Box<Weight>,
        second: Box<Weight>,
        r: f64,
    },
    Custom {
        name: String,
        f: ScalarFn,
        grad: Option<VectorFn>,
    },
}

/// An `α`-homogeneous weight on a cone.
#[derive(Clone)]
pub struct Weight {
    dim: usize,
    alpha: f64,
    cone: ConvexCone,
    kind: WeightKind,
    tag: String,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({}, α={}, n={})", self.tag, self.alpha, self.dim)
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg.into()))
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl Weight {
    /// Low-level constructor; validates the parameters of `kind` against `cone`.
    pub fn new(
        kind: WeightKind,
        alpha: f64,
        cone: ConvexCone,
        tag: impl Into<String>,
    ) -> Result<Self> {
        let n = cone.dim();
        require(
            alpha.is_finite() && alpha >= 0.0,
            format!("degree must be finite and ≥ 0, got {alpha}"),
        )?;
        let alpha = match &kind {
            WeightKind::Constant => {
                require(alpha == 0.0, "the constant weight has degree 0")?;
                0.0
            }
            WeightKind::Monomial { exponents } => {
                require(exponents.len() == n, "one exponent per coordinate")?;
                require(
                    exponents.iter().all(|a| *a >= 0.0),
                    "monomial exponents must be ≥ 0",
                )?;
                exponents.iter().sum()
            }
            WeightKind::DistancePower => {
                require(
                    !cone.is_full_space(),
                    "the distance weight needs a cone with boundary",
                )?;
                alpha
            }
            WeightKind::PMean { p, coeffs } => {
                require(*p >= 1.0, "p-mean exponent must be ≥ 1")?;
                require(
                    coeffs.len() == n && coeffs.iter().all(|c| *c >= 0.0),
                    "coefficients must be ≥ 0, one per coordinate",
                )?;
                require(
                    coeffs.iter().any(|c| *c > 0.0),
                    "at least one positive coefficient",
                )?;
                require(alpha > 0.0, "degree must be > 0")?;
                alpha
            }
            WeightKind::HarmonicMean { r, coeffs } => {
                require(*r > 0.0, "harmonic-mean exponent must be > 0")?;
                require(
                    coeffs.len() == n && coeffs.iter().all(|c| *c >= 0.0),
                    "coefficients must be ≥ 0, one per coordinate",
                )?;
                require(
                    coeffs.iter().any(|c| *c > 0.0),
                    "at least one positive coefficient",
                )?;
                require(alpha > 0.0, "degree must be > 0")?;
                alpha
            }
            WeightKind::MinCoordinate { coeffs } => {
                require(
                    coeffs.len() == n && coeffs.iter().all(|c| *c > 0.0),
                    "coefficients must be > 0, one per coordinate",
                )?;
                alpha
            }
            WeightKind::Lorentz { lambdas } => {
                require(
                    lambdas.len() + 1 == n,
                    "Lorentz weight takes n-1 coefficients",
                )?;
                require(
                    lambdas.iter().all(|l| *l > 0.0),
                    "Lorentz coefficients must be > 0",
                )?;
                alpha
            }
            WeightKind::SigmaK { k } => {
                require(*k >= 1 && *k <= n, "σ_k needs 1 ≤ k ≤ n")?;
                alpha
            }
            WeightKind::SigmaRatio { k, l } => {
                require(*k >= 1 && k < l && *l <= n, "σ-ratio needs 1 ≤ k < l ≤ n")?;
                alpha
            }
            WeightKind::SubsetSums { r } => {
                require(*r >= 1 && *r <= n, "subset size must satisfy 1 ≤ r ≤ n")?;
                alpha
            }
            WeightKind::LogarithmicMean
            | WeightKind::IdentricMean
            | WeightKind::PlanarProfile { .. } => {
                require(n == 2, "planar profile weights live in R^2")?;
                alpha
            }
            WeightKind::PlanarProduct { a, b, p } => {
                require(n == 2, "planar profile weights live in R^2")?;
                require(*a >= 0.0 && *b >= 0.0, "exponents a, b must be ≥ 0")?;
                require(*p > -1.0 && *p != 0.0, "p must satisfy p > -1, p ≠ 0")?;
                a + b + 1.0
            }
            WeightKind::Radial => alpha,
            WeightKind::Product { factors } => {
                require(!factors.is_empty(), "product needs at least one factor")?;
                for (w, e) in factors {
                    require(w.dim() == n, "factor dimension mismatch")?;
                    require(w.alpha() > 0.0, "factors must have positive degree")?;
                    require(*e >= 0.0, "product exponents must be ≥ 0")?;
                }
                factors.iter().map(|(_, e)| e).sum()
            }
            WeightKind::PowerMean { first, second, r } => {
                require(
                    first.dim() == n && second.dim() == n,
                    "factor dimension mismatch",
                )?;
                require(
                    first.alpha() > 0.0 && second.alpha() > 0.0,
                    "factors must have positive degree",
                )?;
                require(
                    (*r > 0.0 && *r <= 1.0) || *r < 0.0,
                    "power-mean exponent must lie in (0,1] or be negative",
                )?;
                require(alpha > 0.0, "degree must be > 0")?;
                alpha
            }
            WeightKind::Custom { .. } => alpha,
        };
        Ok(Weight {
            dim: n,
            alpha,
            cone,
            kind,
            tag: tag.into(),
        })
    }

    pub fn constant(cone: ConvexCone) -> Self {
        Weight::new(WeightKind::Constant, 0.0, cone, "constant").expect("valid")
    }

    pub fn monomial(exponents: Vec<f64>, cone: ConvexCone) -> Result<Self> {
        Weight::new(WeightKind::Monomial { exponents }, 0.0, cone, "monomial")
    }

    pub fn radial(alpha: f64, cone: ConvexCone) -> Result<Self> {
        Weight::new(WeightKind::Radial, alpha, cone, "radial")
    }

    pub fn custom(
        name: impl Into<String>,
        alpha: f64,
        cone: ConvexCone,
        f: ScalarFn,
        grad: Option<VectorFn>,
    ) -> Result<Self> {
        let name = name.into();
        Weight::new(
            WeightKind::Custom {
                name: name.clone(),
                f,
                grad,
            },
            alpha,
            cone,
            name,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `D = n + α`.
    pub fn effective_dimension(&self) -> f64 {
        self.dim as f64 + self.alpha
    }

    pub fn cone(&self) -> &ConvexCone {
        &self.cone
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Same weight on a convex subcone.
    pub fn restricted_to(&self, cone: ConvexCone) -> Result<Self> {
        if cone.dim() != self.dim || !self.cone.contains_cone(&cone) {
            return Err(Error::InvalidParameters(
                "target cone is not a subcone of the weight's cone".into(),
            ));
        }
        if matches!(self.kind, WeightKind::DistancePower) {
            // dist(·, ∂Σ) changes with the cone, so the subcone copy keeps the
            // original distance through a custom evaluator
            let orig = self.clone();
            let g = self.clone();
            return Weight::custom(
                format!("{}|sub", self.tag),
                self.alpha,
                cone,
                Arc::new(move |x| orig.eval(x)),
                Some(Arc::new(move |x| g.gradient(x))),
            );
        }
        let mut w = self.clone();
        w.cone = cone;
        Ok(w)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// `w(x)` for `x` in the open cone.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let a = self.alpha;
        match &self.kind {
            WeightKind::Constant => 1.0,
            WeightKind::Monomial { exponents } => x
                .iter()
                .zip(exponents)
                .map(|(xi, e)| if *e == 0.0 { 1.0 } else { xi.powf(*e) })
                .product(),
            WeightKind::DistancePower => pow(self.cone.distance_to_boundary(x), a),
            WeightKind::PMean { p, coeffs } => {
                let s: f64 = x
                    .iter()
                    .zip(coeffs)
                    .map(|(xi, c)| c * xi.powf(1.0 / p))
                    .sum();
                pow(s, a * p)
            }
            WeightKind::HarmonicMean { r, coeffs } => {
                let s: f64 = x
                    .iter()
                    .zip(coeffs)
                    .filter(|(_, c)| **c > 0.0)
                    .map(|(xi, c)| c * xi.powf(-r))
                    .sum();
                s.powf(-a / r)
            }
            WeightKind::MinCoordinate { coeffs } => {
                let m = x
                    .iter()
                    .zip(coeffs)
                    .map(|(xi, c)| c * xi)
                    .fold(f64::INFINITY, f64::min);
                pow(m, a)
            }
            WeightKind::Lorentz { lambdas } => {
                let q = x[0] * x[0]
                    - x[1..]
                        .iter()
                        .zip(lambdas)
                        .map(|(xi, l)| l * xi * xi)
                        .sum::<f64>();
                pow(q, 0.5 * a)
            }
            WeightKind::SigmaK { k } => pow(symmetric::elementary(x, *k), a / *k as f64),
            WeightKind::SigmaRatio { k, l } => {
                let ratio = symmetric::elementary(x, *l) / symmetric::elementary(x, *k);
                pow(ratio, a / (l - k) as f64)
            }
            WeightKind::SubsetSums { r } => {
                let deg = binomial(self.dim, *r) as f64;
                let log_p: f64 = symmetric::subsets(self.dim, *r)
                    .iter()
                    .map(|s| s.iter().map(|&j| x[j]).sum::<f64>().ln())
                    .sum();
                (a / deg * log_p).exp()
            }
            WeightKind::LogarithmicMean => profile_weight(x, a, log_mean_profile).0,
            WeightKind::IdentricMean => profile_weight(x, a, identric_profile).0,
            WeightKind::PlanarProfile { f, .. } => profile_weight(x, a, |t| f(t)).0,
            WeightKind::PlanarProduct { a: ea, b: eb, p } => {
                let (u, v) = (x[0], x[1]);
                u.powf(ea + 1.0) * v.powf(eb + 1.0) * (u.powf(*p) + v.powf(*p)).powf(-1.0 / p)
            }
            WeightKind::Radial => pow(norm(x), a),
            WeightKind::Product { factors } => factors
                .iter()
                .map(|(w, e)| w.eval(x).powf(e / w.alpha()))
                .product(),
            WeightKind::PowerMean { first, second, r } => {
                let v1 = first.eval(x).powf(1.0 / first.alpha());
                let v2 = second.eval(x).powf(1.0 / second.alpha());
                (v1.powf(*r) + v2.powf(*r)).powf(a / r)
            }
            WeightKind::Custom { f, .. } => f(x),
        }
    }

    /// Continuous extension to the closed cone: points on or outside `∂Σ` are
    /// pushed a relative `1e-8` along the inward normals of the active faces.
    pub fn eval_closed(&self, x: &[f64]) -> f64 {
        if self.cone.contains(x) {
            let v = self.eval(x);
            if v.is_finite() {
                return v;
            }
        }
        let r = norm(x);
        if r == 0.0 {
            return if self.alpha == 0.0 {
                self.eval(&self.cone.interior_direction())
            } else {
                0.0
            };
        }
        let mut y = x.to_vec();
        for a in self.cone.normals() {
            if dot(a, x) <= 1e-8 * r {
                for (yi, ai) in y.iter_mut().zip(a) {
                    *yi += 1e-8 * r * ai;
                }
            }
        }
        let v = self.eval(&y);
        if v.is_finite() {
            v.max(0.0)
        } else {
            0.0
        }
    }

    /// Angular factor `B(θ) = w(θ)` on unit vectors, so `w(rθ) = r^α B(θ)`.
    pub fn angular(&self, u: &[f64]) -> f64 {
        self.eval_closed(u)
    }

    /// Whether [`Weight::gradient`] is closed-form.
    pub fn has_analytic_gradient(&self) -> bool {
        match &self.kind {
            WeightKind::Custom { grad, .. } => grad.is_some(),
            WeightKind::Product { factors } => {
                factors.iter().all(|(w, _)| w.has_analytic_gradient())
            }
            WeightKind::PowerMean { first, second, .. } => {
                first.has_analytic_gradient() && second.has_analytic_gradient()
            }
            _ => true,
        }
    }

    /// `∇w(x)`: closed form where available, otherwise central differences
    /// with step `1e-6·|x|`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let a = self.alpha;
        let n = self.dim;
        match &self.kind {
            WeightKind::Constant => vec![0.0; n],
            WeightKind::Monomial { exponents } => {
                let w = self.eval(x);
                x.iter()
                    .zip(exponents)
                    .enumerate()
                    .map(|(i, (xi, e))| {
                        if *e == 0.0 {
                            0.0
                        } else if *xi != 0.0 {
                            w * e / xi
                        } else {
                            let mut others = 1.0;
                            for (j, (xj, ej)) in x.iter().zip(exponents).enumerate() {
                                if j != i && *ej != 0.0 {
                                    others *= xj.powf(*ej);
                                }
                            }
                            e * pow(*xi, e - 1.0) * others
                        }
                    })
                    .collect()
            }
            WeightKind::DistancePower => {
                let (k, d) = self
                    .cone
                    .normals()
                    .iter()
                    .map(|nrm| dot(nrm, x))
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                    );
                scale(&self.cone.normals()[k], a * pow(d, a - 1.0))
            }
            WeightKind::PMean { p, coeffs } => {
                let s: f64 = x
                    .iter()
                    .zip(coeffs)
                    .map(|(xi, c)| c * xi.powf(1.0 / p))
                    .sum();
                let f = a * pow(s, a * p - 1.0);
                x.iter()
                    .zip(coeffs)
                    .map(|(xi, c)| {
                        if *c == 0.0 {
                            0.0
                        } else {
                            f * c * xi.powf(1.0 / p - 1.0)
                        }
                    })
                    .collect()
            }
            WeightKind::HarmonicMean { r, coeffs } => {
                let s: f64 = x
                    .iter()
                    .zip(coeffs)
                    .filter(|(_, c)| **c > 0.0)
                    .map(|(xi, c)| c * xi.powf(-r))
                    .sum();
                let f = a * s.powf(-a / r - 1.0);
                x.iter()
                    .zip(coeffs)
                    .map(|(xi, c)| {
                        if *c == 0.0 {
                            0.0
                        } else {
                            f * c * xi.powf(-r - 1.0)
                        }
                    })
                    .collect()
            }
            WeightKind::MinCoordinate { coeffs } => {
                let (k, m) = x.iter().zip(coeffs).map(|(xi, c)| c * xi).enumerate().fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
                let mut g = vec![0.0; n];
                g[k] = a * pow(m, a - 1.0) * coeffs[k];
                g
            }
            WeightKind::Lorentz { lambdas } => {
                let q = x[0] * x[0]
                    - x[1..]
                        .iter()
                        .zip(lambdas)
                        .map(|(xi, l)| l * xi * xi)
                        .sum::<f64>();
                let f = a * pow(q, 0.5 * a - 1.0);
                let mut g = vec![f * x[0]];
                g.extend(x[1..].iter().zip(lambdas).map(|(xi, l)| -f * l * xi));
                g
            }
            WeightKind::SigmaK { k } => {
                let s = symmetric::elementary(x, *k);
                let f = a / *k as f64 * pow(s, a / *k as f64 - 1.0);
                (0..n)
                    .map(|i| f * symmetric::elementary_without(x, *k - 1, i))
                    .collect()
            }
            WeightKind::SigmaRatio { k, l } => {
                let sk = symmetric::elementary(x, *k);
                let sl = symmetric::elementary(x, *l);
                let w = self.eval(x);
                let b = a / (l - k) as f64;
                (0..n)
                    .map(|i| {
                        let dl = symmetric::elementary_without(x, *l - 1, i);
                        let dk = symmetric::elementary_without(x, *k - 1, i);
                        b * w * (dl / sl - dk / sk)
                    })
                    .collect()
            }
            WeightKind::SubsetSums { r } => {
                let deg = binomial(n, *r) as f64;
                let w = self.eval(x);
                let mut g = vec![0.0; n];
                for s in symmetric::subsets(n, *r) {
                    let sum: f64 = s.iter().map(|&j| x[j]).sum();
                    for &j in &s {
                        g[j] += 1.0 / sum;
                    }
                }
                g.iter().map(|gj| w * a / deg * gj).collect()
            }
            WeightKind::LogarithmicMean => profile_weight(x, a, log_mean_profile).1.to_vec(),
            WeightKind::IdentricMean => profile_weight(x, a, identric_profile).1.to_vec(),
            WeightKind::PlanarProfile { f, .. } => profile_weight(x, a, |t| f(t)).1.to_vec(),
            WeightKind::PlanarProduct { a: ea, b: eb, p } => {
                let (u, v) = (x[0], x[1]);
                let w = self.eval(x);
                let s = u.powf(*p) + v.powf(*p);
                vec![
                    w * ((ea + 1.0) / u - u.powf(p - 1.0) / s),
                    w * ((eb + 1.0) / v - v.powf(p - 1.0) / s),
                ]
            }
            WeightKind::Radial => {
                let r = norm(x);
                scale(x, a * pow(r, a - 2.0))
            }
            WeightKind::Product { factors } => {
                let w = self.eval(x);
                let mut g = vec![0.0; n];
                for (f, e) in factors {
                    let fw = f.eval(x);
                    let fg = f.gradient(x);
                    for (gi, fgi) in g.iter_mut().zip(&fg) {
                        *gi += e / f.alpha() * fgi / fw;
                    }
                }
                scale(&g, w)
            }
            WeightKind::PowerMean { first, second, r } => {
                let part = |w: &Weight| {
                    let wv = w.eval(x);
                    let v = wv.powf(1.0 / w.alpha());
                    // ∇v = v ∇w / (α w)
                    let gv = scale(&w.gradient(x), v / (w.alpha() * wv));
                    (v, gv)
                };
                let (v1, g1) = part(first);
                let (v2, g2) = part(second);
                let s = v1.powf(*r) + v2.powf(*r);
                let f = a * s.powf(a / r - 1.0);
                g1.iter()
                    .zip(&g2)
                    .map(|(a1, a2)| f * (v1.powf(r - 1.0) * a1 + v2.powf(r - 1.0) * a2))
                    .collect()
            }
            WeightKind::Custom { grad: Some(g), .. } => g(x),
            WeightKind::Custom { grad: None, .. } => self.fd_gradient(x),
        }
    }

    /// Central-difference gradient with step `1e-6·|x|`.
    pub fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = 1e-6 * norm(x).max(1e-300);
        (0..self.dim)
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (self.eval(&p) - self.eval(&m)) / (2.0 * h)
            })
            .collect()
    }
}

/// `x^a` with `0^0 = 1` and `0^a = 0` for `a > 0`.
fn pow(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else if a == 1.0 {
        x
    } else {
        x.powf(a)
    }
}

/// `(x₁ f(t))^α` and its gradient for `t = x₂/x₁`.
fn profile_weight<F: Fn(f64) -> (f64, f64)>(x: &[f64], alpha: f64, profile: F) -> (f64, [f64; 2]) {
    let t = x[1] / x[0];
    let (f, df) = profile(t);
    let v = x[0] * f;
    let dv = [f - t * df, df];
    let w = pow(v, alpha);
    let c = alpha * pow(v, alpha - 1.0);
    (w, [c * dv[0], c * dv[1]])
}

/// Logarithmic mean `L(1, t) = (t - 1)/ln t` and its derivative.
pub(crate) fn log_mean_profile(t: f64) -> (f64, f64) {
    let s = t - 1.0;
    if s.abs() < 1e-4 {
        (
            1.0 + s / 2.0 - s * s / 12.0 + s * s * s / 24.0,
            0.5 - s / 6.0 + s * s / 8.0,
        )
    } else {
        let l = t.ln();
        (s / l, (l - s / t) / (l * l))
    }
}

/// Identric mean `I(1, t) = e^{-1} t^{t/(t-1)}` and its derivative.
pub(crate) fn identric_profile(t: f64) -> (f64, f64) {
    let s = t - 1.0;
    if s.abs() < 1e-4 {
        // ln f = -1 + t ln t/(t-1),  (ln f)' = (t - 1 - ln t)/(t-1)^2
        let lf = -1.0 + 1.0 + s / 2.0 - s * s / 6.0 + s * s * s / 12.0;
        let dl = 0.5 - s / 3.0 + s * s / 4.0;
        let f = lf.exp();
        (f, f * dl)
    } else {
        let l = t.ln();
        let f = (-1.0 + t * l / s).exp();
        (f, f * (s - l) / (s * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrant() -> ConvexCone {
        ConvexCone::orthant(2).unwrap()
    }

    #[test]
    fn monomial_value_and_gradient() {
        let w = Weight::monomial(vec![1.0, 1.0], quadrant()).unwrap();
        assert_eq!(w.alpha(), 2.0);
        assert_eq!(w.eval(&[2.0, 3.0]), 6.0);
        assert_eq!(w.gradient(&[2.0, 3.0]), vec![3.0, 2.0]);
    }

    #[test]
    fn distance_weight_on_half_plane() {
        let c = ConvexCone::half_space(&[0.0, 1.0]).unwrap();
        let w = Weight::new(WeightKind::DistancePower, 1.0, c, "distance").unwrap();
        assert!((w.eval(&[1.0, 2.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_ratio_at_ones() {
        let c = ConvexCone::orthant(3).unwrap();
        let w = Weight::new(WeightKind::SigmaRatio { k: 1, l: 2 }, 1.0, c, "sigma_ratio").unwrap();
        // direct evaluation: σ₂(1,1,1) = 3, σ₁(1,1,1) = 3
        let s1 = 1.0 + 1.0 + 1.0;
        let s2 = 1.0 * 1.0 + 1.0 * 1.0 + 1.0 * 1.0;
        assert!((w.eval(&[1.0, 1.0, 1.0]) - s2 / s1).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Weight::monomial(vec![1.0, -1.0], quadrant()).is_err());
        let c3 = ConvexCone::orthant(3).unwrap();
        assert!(Weight::new(WeightKind::SigmaRatio { k: 2, l: 2 }, 1.0, c3.clone(), "x").is_err());
        assert!(Weight::new(
            WeightKind::PMean {
                p: 0.5,
                coeffs: vec![1.0; 3]
            },
            1.0,
            c3,
            "x"
        )
        .is_err());
        let full = ConvexCone::full_space(2).unwrap();
        assert!(Weight::new(WeightKind::DistancePower, 1.0, full, "x").is_err());
    }

    #[test]
    fn profiles_are_continuous_through_t_equal_one() {
        for prof in [log_mean_profile as fn(f64) -> (f64, f64), identric_profile] {
            let (a, da) = prof(1.0 - 1.0001e-4);
            let (b, db) = prof(1.0 - 0.9999e-4);
            assert!((a - b).abs() < 1e-7 && (da - db).abs() < 1e-7);
        }
        // identric mean of (1, e) by definition: e^{-1} (e^e)^{1/(e-1)}
        let e = std::f64::consts::E;
        let expect = (e.powf(e)).powf(1.0 / (e - 1.0)) / e;
        assert!((identric_profile(e).0 - expect).abs() < 1e-12);
        assert!((log_mean_profile(e).0 - (e - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        for entry in catalog() {
            let w = &entry.weight;
            let mut r = crate::rng::stream(5, 0);
            for _ in 0..20 {
                let u = w.cone().sample_direction(&mut r, 0.05);
                let g = w.gradient(&u);
                let fd = w.fd_gradient(&u);
                let err: f64 = g
                    .iter()
                    .zip(&fd)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let s = norm(&g).max(w.eval(&u));
                assert!(err <= 1e-6 * s, "{}: {g:?} vs {fd:?}", entry.tag);
            }
        }
    }

    #[test]
    fn eval_closed_extends_to_boundary() {
        let w = Weight::monomial(vec![1.0, 1.0], quadrant()).unwrap();
        assert!(w.eval_closed(&[1.0, 0.0]) < 1e-7);
        let c = ConvexCone::half_space(&[0.0, 1.0]).unwrap();
        let p = Weight::new(
            WeightKind::Lorentz { lambdas: vec![1.0] },
            1.0,
            ConvexCone::sector(0.5 * std::f64::consts::PI, 0.0).unwrap(),
            "lorentz",
        )
        .unwrap();
        assert!(p.eval_closed(&[1.0, 1.0]).abs() < 1e-3);
        let k = Weight::constant(c);
        assert_eq!(k.eval_closed(&[1.0, 0.0]), 1.0);
    }
}
