//! Gauges (nonnegative, 1-homogeneous, convex functions), their Wulff shapes,
//! dual gauges and the restricted gauge `H₀` of `W ∩ Σ`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, normalized, scale};
use crate::rng;
use crate::sphere;

/// Absolute margin used by Wulff-shape membership; boundary ties are outside.
pub const MEMBERSHIP_MARGIN: f64 = 1e-9;

pub type GaugeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum GaugeKind {
    /// `‖x‖_p`, `p ∈ [1, ∞]`.
    PNorm {
        p: f64,
    },
    /// `|M x|` for an invertible matrix `M`; the Wulff shape is an ellipsoid.
    Ellipsoidal {
        matrix: DMatrix<f64>,
        polar: DMatrix<f64>,
    },
    /// Support function `max_i v_i·x` of a finite point set.
    Support {
        points: Vec<Vec<f64>>,
    },
    /// Dual gauge `H°(z) = sup_{H(y) ≤ 1} z·y`, evaluated numerically.
    Dual {
        base: Arc<Gauge>,
        samples: usize,
    },
    /// Unique gauge whose Wulff shape is `W ∩ Σ`.
    Restricted {
        base: Arc<Gauge>,
        cone: ConvexCone,
    },
    Custom {
        name: String,
        f: GaugeFn,
    },
}

#[derive(Clone)]
pub struct Gauge {
    dim: usize,
    kind: GaugeKind,
    positive_on_sphere: bool,
    directions: Arc<OnceLock<Vec<Vec<f64>>>>,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gauge({}, n={})", self.describe(), self.dim)
    }
}

impl Gauge {
    fn with_kind(dim: usize, kind: GaugeKind, positive_on_sphere: bool) -> Self {
        Gauge {
            dim,
            kind,
            positive_on_sphere,
            directions: Arc::new(OnceLock::new()),
        }
    }

    /// The `p`-norm gauge; its Wulff shape is the open unit ball of the
    /// conjugate exponent `p' = p/(p-1)`.
    pub fn p_norm(dim: usize, p: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameters(format!(
                "gauge dimension must be ≥ 2, got {dim}"
            )));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "p-norm exponent must be ≥ 1, got {p}"
            )));
        }
        Ok(Self::with_kind(dim, GaugeKind::PNorm { p }, true))
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::p_norm(dim, 2.0).expect("valid p")
    }

    /// `H(x) = |M x|` with `M` given row-major.
    pub fn ellipsoidal(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameters(
                "ellipsoidal gauge needs a square matrix".into(),
            ));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        let inv = m.clone().try_inverse().ok_or_else(|| {
            Error::InvalidParameters("ellipsoidal gauge matrix is singular".into())
        })?;
        Ok(Self::with_kind(
            dim,
            GaugeKind::Ellipsoidal {
                matrix: m,
                polar: inv.transpose(),
            },
            true,
        ))
    }

    /// Support function of the convex hull of `points`; requires the origin
    /// in the closed hull so that the Wulff shape contains it in its closure.
    pub fn support(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim < 2 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParameters(
                "support gauge needs points of a common dimension ≥ 2".into(),
            ));
        }
        let g = Self::with_kind(dim, GaugeKind::Support { points }, false);
        let dirs = sphere::directions(dim.min(4), 4096);
        let min = dirs.iter().map(|d| g.eval(d)).fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(Error::InvalidParameters(
                "support gauge takes negative values; the origin is outside the hull".into(),
            ));
        }
        Ok(Self::with_kind(dim, g.kind, min > 1e-12))
    }

    /// Wrap an arbitrary evaluator. `positive_on_sphere` is verified by sampling.
    pub fn custom(dim: usize, name: impl Into<String>, f: GaugeFn) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameters(format!(
                "gauge dimension must be ≥ 2, got {dim}"
            )));
        }
        let g = Self::with_kind(
            dim,
            GaugeKind::Custom {
                name: name.into(),
                f,
            },
            false,
        );
        let min = g.min_on_sphere();
        if min < -1e-12 {
            return Err(Error::InvalidParameters(
                "gauge takes negative values".into(),
            ));
        }
        Ok(Self::with_kind(dim, g.kind, min > 1e-12))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn positive_on_sphere(&self) -> bool {
        self.positive_on_sphere
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            GaugeKind::PNorm { p } if p.is_infinite() => "p_norm(inf)".into(),
            GaugeKind::PNorm { p } => format!("p_norm({p})"),
            GaugeKind::Ellipsoidal { .. } => "ellipsoidal".into(),
            GaugeKind::Support { points } => format!("support({} points)", points.len()),
            GaugeKind::Dual { base, .. } => format!("dual({})", base.describe()),
            GaugeKind::Restricted { base, .. } => format!("restricted({})", base.describe()),
            GaugeKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    fn sample_directions(&self) -> &[Vec<f64>] {
        let count = match &self.kind {
            GaugeKind::Dual { samples, .. } => *samples,
            _ => sphere::default_direction_count(self.dim),
        };
        self.directions
            .get_or_init(|| sphere::directions(self.dim, count))
    }

    /// Evaluate `H(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            GaugeKind::PNorm { p } => p_norm(x, *p),
            GaugeKind::Ellipsoidal { matrix, .. } => mat_norm(matrix, x),
            GaugeKind::Support { points } => points
                .iter()
                .map(|v| dot(v, x))
                .fold(f64::NEG_INFINITY, f64::max),
            GaugeKind::Dual { base, .. } => {
                let r = norm(x);
                if r == 0.0 {
                    return 0.0;
                }
                let dirs = self.sample_directions();
                let m = sphere::maximize(self.dim, dirs, |y| dot(x, y) / base.eval(y));
                m.value.max(0.0)
            }
            GaugeKind::Restricted { base, cone } => restricted_eval(base, cone.normals(), x),
            GaugeKind::Custom { f, .. } => f(x),
        }
    }

    /// Polar function `H°(z) = sup_y z·y / H(y)`; `+∞` when `H` vanishes on
    /// a direction with `z·y > 0`. Closed form for tagged gauges.
    pub fn polar(&self, z: &[f64]) -> f64 {
        match &self.kind {
            GaugeKind::PNorm { p } => p_norm(z, conjugate_exponent(*p)),
            GaugeKind::Ellipsoidal { polar, .. } => mat_norm(polar, z),
            GaugeKind::Restricted { base, cone } => {
                if cone.contains_closed(z, 1e-14 * norm(z)) {
                    base.polar(z)
                } else {
                    f64::INFINITY
                }
            }
            _ => self.numeric_polar(z),
        }
    }

    fn numeric_polar(&self, z: &[f64]) -> f64 {
        if norm(z) == 0.0 {
            return 0.0;
        }
        let dirs = self.sample_directions();
        let ratio = |y: &[f64]| {
            let num = dot(z, y);
            let h = self.eval(y);
            if h <= 1e-300 {
                if num > 1e-14 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                num / h
            }
        };
        let m = sphere::maximize(self.dim, dirs, ratio);
        m.value.max(0.0)
    }

    /// Radial function of the Wulff shape: `sup{r : r·u ∈ W}` for unit `u`.
    pub fn wulff_radius(&self, u: &[f64]) -> f64 {
        let p = self.polar(u);
        if p <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / p
        }
    }

    /// Whether `H°` (hence the Wulff radius and normal) is closed-form.
    pub fn has_closed_form_polar(&self) -> bool {
        match &self.kind {
            GaugeKind::PNorm { .. } | GaugeKind::Ellipsoidal { .. } => true,
            GaugeKind::Restricted { base, .. } => base.has_closed_form_polar(),
            _ => false,
        }
    }

    /// Whether `∂W` is `C²` away from the coordinate hyperplanes, so that its
    /// curvature can be differenced.
    pub fn has_smooth_wulff_shape(&self) -> bool {
        match &self.kind {
            GaugeKind::PNorm { p } => *p > 1.0 && p.is_finite(),
            GaugeKind::Ellipsoidal { .. } => true,
            GaugeKind::Restricted { base, .. } => base.has_smooth_wulff_shape(),
            _ => false,
        }
    }

    /// Directions of the known corners of `∂W` (unit vectors); the radial
    /// function and the normal of `W` may jump in slope there.
    pub fn kink_directions(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        match &self.kind {
            GaugeKind::PNorm { p } if *p == 1.0 => {
                // W is the cube: corners at (±1, .., ±1)
                (0..1usize << n)
                    .map(|m| {
                        let v: Vec<f64> = (0..n)
                            .map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 })
                            .collect();
                        normalized(&v)
                    })
                    .collect()
            }
            GaugeKind::PNorm { p } if p.is_infinite() => (0..2 * n)
                .map(|k| {
                    let mut e = vec![0.0; n];
                    e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                    e
                })
                .collect(),
            GaugeKind::Support { points } => points
                .iter()
                .filter(|p| norm(p) > 0.0)
                .map(|p| normalized(p))
                .collect(),
            GaugeKind::Restricted { base, .. } => base.kink_directions(),
            _ => Vec::new(),
        }
    }

    /// Outward unit normal of `∂W` at the boundary point `x`.
    pub fn wulff_normal(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            GaugeKind::PNorm { p } => p_norm_gradient(x, conjugate_exponent(*p)),
            GaugeKind::Ellipsoidal { polar, .. } => {
                let v = nalgebra::DVector::from_column_slice(x);
                let g = polar.transpose() * (polar * v);
                normalized(g.as_slice())
            }
            GaugeKind::Restricted { base, .. } => base.wulff_normal(x),
            _ => {
                let h = 1e-6 * norm(x).max(1e-12);
                let g: Vec<f64> = (0..self.dim)
                    .map(|i| {
                        let mut a = x.to_vec();
                        let mut b = x.to_vec();
                        a[i] += h;
                        b[i] -= h;
                        (self.polar(&a) - self.polar(&b)) / (2.0 * h)
                    })
                    .collect();
                normalized(&g)
            }
        }
    }

    pub(crate) fn min_on_sphere(&self) -> f64 {
        sphere::directions(self.dim.min(4), 4096)
            .iter()
            .filter(|d| d.len() == self.dim)
            .map(|d| self.eval(d))
            .fold(f64::INFINITY, f64::min)
    }
}

fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn p_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        norm(x)
    } else {
        let m = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x
            .iter()
            .map(|v| (v.abs() / m).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

fn p_norm_gradient(x: &[f64], q: f64) -> Vec<f64> {
    if q.is_infinite() {
        let (k, _) =
            x.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
            );
        let mut g = vec![0.0; x.len()];
        g[k] = x[k].signum();
        return g;
    }
    if q == 1.0 {
        return normalized(&x.iter().map(|v| v.signum()).collect::<Vec<_>>());
    }
    let g: Vec<f64> = x
        .iter()
        .map(|v| v.signum() * v.abs().powf(q - 1.0))
        .collect();
    normalized(&g)
}

fn mat_norm(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            r += m[(i, j)] * x[j];
        }
        s += r * r;
    }
    s.sqrt()
}

/// `H₀(x) = sup{z·x : z ∈ W ∩ Σ} = min_{λ ≥ 0} H(x + Σ λ_i a_i)`.
///
/// The minimum over `λ` is the support function of `W ∩ Σ` written as the
/// infimal convolution of `H` with the support function of `Σ`, whose polar
/// cone is generated by the `-a_i`. The convex minimization runs as a
/// projected line search over coordinate and pairwise directions.
fn restricted_eval(base: &Gauge, normals: &[Vec<f64>], x: &[f64]) -> f64 {
    let h0 = base.eval(x);
    if normals.is_empty() {
        return h0;
    }
    let m = normals.len();
    let scale_x = norm(x).max(1e-300);
    let point = |lam: &[f64]| {
        let mut y = x.to_vec();
        for (l, a) in lam.iter().zip(normals) {
            if *l != 0.0 {
                y = axpy(&y, *l, a);
            }
        }
        y
    };
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        let mut d = vec![0.0; m];
        d[i] = 1.0;
        dirs.push(d);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut d = vec![0.0; m];
            d[i] = 1.0;
            d[j] = 1.0;
            dirs.push(d.clone());
            d[j] = -1.0;
            dirs.push(d);
        }
    }
    let eval = |lam: &[f64]| base.eval(&point(lam));
    // exact line search along `d`, keeping λ ≥ 0
    let line = |lam: &[f64], d: &[f64], f0: f64| -> Option<(Vec<f64>, f64)> {
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for k in 0..m {
            if d[k] > 0.0 {
                t_lo = t_lo.max(-lam[k] / d[k]);
            } else if d[k] < 0.0 {
                t_hi = t_hi.min(lam[k] / -d[k]);
            }
        }
        let f = |t: f64| eval(&axpy(lam, t, d));
        let step = scale_x / norm(d).max(1e-300);
        for (bound, sign) in [(&mut t_hi, 1.0), (&mut t_lo, -1.0)] {
            if bound.is_infinite() {
                let mut t = step;
                while f(sign * t) < f0 && t < 1e8 * step {
                    t *= 2.0;
                }
                *bound = sign * t;
            }
        }
        if t_hi - t_lo <= 0.0 {
            return None;
        }
        let (t, _) = sphere::golden_min(&f, t_lo, t_hi, 90);
        let mut next = axpy(lam, t, d);
        for l in next.iter_mut() {
            *l = l.max(0.0);
        }
        let v = eval(&next);
        (v < f0).then_some((next, v))
    };
    let mut lam = vec![0.0; m];
    let mut best = h0;
    for _sweep in 0..200 {
        let before = best;
        let start = lam.clone();
        for d in &dirs {
            if let Some((l, v)) = line(&lam, d, best) {
                lam = l;
                best = v;
            }
        }
        // pattern move along the net displacement of the sweep
        let shift: Vec<f64> = lam.iter().zip(&start).map(|(a, b)| a - b).collect();
        if shift.iter().any(|v| *v != 0.0) {
            if let Some((l, v)) = line(&lam, &shift, best) {
                lam = l;
                best = v;
            }
        }
        if before - best <= 1e-15 * (best.abs() + scale_x) {
            break;
        }
    }
    best.max(0.0)
}

/// Dual gauge `H°` computed by numerical maximization over the sphere.
pub fn dual_gauge(h: &Gauge) -> Result<Gauge> {
    dual_gauge_with(h, sphere::default_direction_count(h.dim()))
}

/// [`dual_gauge`] with an explicit direction-sample count.
pub fn dual_gauge_with(h: &Gauge, samples: usize) -> Result<Gauge> {
    if !h.positive_on_sphere() {
        return Err(Error::DegenerateGauge(format!(
            "{} vanishes on some direction; the dual gauge needs H > 0 on the sphere",
            h.describe()
        )));
    }
    let min = h.min_on_sphere();
    if !(min > 0.0) {
        return Err(Error::DegenerateGauge(format!(
            "{} vanishes at a sampled direction",
            h.describe()
        )));
    }
    Ok(Gauge::with_kind(
        h.dim(),
        GaugeKind::Dual {
            base: Arc::new(h.clone()),
            samples,
        },
        true,
    ))
}

/// Gauge `H₀` of `W ∩ Σ`. Rejects empty or unbounded intersections.
pub fn restricted_gauge(h: &Gauge, cone: &ConvexCone) -> Result<Gauge> {
    if h.dim() != cone.dim() {
        return Err(Error::InvalidParameters(
            "gauge and cone dimensions differ".into(),
        ));
    }
    let dirs = sphere::directions(h.dim().min(4), 4096);
    let mut any_inside = false;
    for d in dirs.iter().filter(|d| cone.contains(d)) {
        let r = h.wulff_radius(d);
        if r.is_infinite() {
            return Err(Error::Unsupported(
                "W ∩ Σ is unbounded; the restricted gauge is only defined here for bounded intersections".into(),
            ));
        }
        if r > 1e-12 {
            any_inside = true;
        }
    }
    if !any_inside {
        let u = cone.interior_direction();
        if !(h.wulff_radius(&u) > 1e-12) {
            return Err(Error::EmptyIntersection("no point of W ∩ Σ found".into()));
        }
    }
    Ok(Gauge::with_kind(
        h.dim(),
        GaugeKind::Restricted {
            base: Arc::new(h.clone()),
            cone: cone.clone(),
        },
        false,
    ))
}

/// Wulff shape `W = {x : x·ν < H(ν) ∀ν}` of a gauge.
#[derive(Clone, Debug)]
pub struct WulffBody {
    gauge: Gauge,
    bounding_radius: f64,
}

impl WulffBody {
    pub fn new(gauge: Gauge) -> Self {
        let n = gauge.dim();
        let bounding_radius = sphere::directions(n.min(4), 2048)
            .iter()
            .filter(|d| d.len() == n)
            .map(|d| gauge.wulff_radius(d))
            .fold(0.0, f64::max)
            * 1.01;
        WulffBody {
            gauge,
            bounding_radius,
        }
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    /// Finite iff `H > 0` on the sphere.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        wulff_membership(&self.gauge, x)
    }
}

/// Whether `x·ν < H(ν) - margin` for every direction `ν`, i.e. `x ∈ W`
/// strictly. Points within [`MEMBERSHIP_MARGIN`] of `∂W` are reported outside.
pub fn wulff_membership(h: &Gauge, x: &[f64]) -> bool {
    if x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let dirs = h.sample_directions();
    let m = sphere::maximize(h.dim(), dirs, |nu| dot(x, nu) - h.eval(nu));
    m.value < -MEMBERSHIP_MARGIN
}

/// Sampled check of the gauge axioms.
#[derive(Clone, Debug)]
pub struct GaugeAxiomReport {
    pub samples: usize,
    pub max_homogeneity_error: f64,
    pub max_convexity_violation: f64,
    pub min_on_sphere: f64,
}

impl GaugeAxiomReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_homogeneity_error <= tol
            && self.max_convexity_violation <= tol
            && self.min_on_sphere >= -tol
    }
}

/// Homogeneity `H(tx) = tH(x)`, midpoint convexity and nonnegativity on random samples.
pub fn check_gauge_axioms(h: &Gauge, samples: usize, seed: u64) -> GaugeAxiomReport {
    let n = h.dim();
    let rows: Vec<(f64, f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let x = rng::gaussian_vec(&mut r, n);
            let y = rng::gaussian_vec(&mut r, n);
            let t: f64 = rand::Rng::gen_range(&mut r, 0.01..100.0);
            let hx = h.eval(&x);
            let hom = (h.eval(&scale(&x, t)) - t * hx).abs() / (1.0 + t * hx.abs());
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let conv = h.eval(&mid) - 0.5 * (hx + h.eval(&y));
            let u = normalized(&x);
            (hom, conv.max(0.0), h.eval(&u))
        })
        .collect();
    rows.iter().fold(
        GaugeAxiomReport {
            samples,
            max_homogeneity_error: 0.0,
            max_convexity_violation: 0.0,
            min_on_sphere: f64::INFINITY,
        },
        |mut acc, &(hom, conv, val)| {
            acc.max_homogeneity_error = acc.max_homogeneity_error.max(hom);
            acc.max_convexity_violation = acc.max_convexity_violation.max(conv);
            acc.min_on_sphere = acc.min_on_sphere.min(val);
            acc
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_norm_rejects_small_exponent() {
        assert!(Gauge::p_norm(2, 0.5).is_err());
        assert!(Gauge::p_norm(2, f64::INFINITY).is_ok());
    }

    #[test]
    fn wulff_shapes_of_p_norms() {
        let l2 = Gauge::euclidean(2);
        assert!(wulff_membership(&l2, &[0.0, 0.0]));
        assert!(!wulff_membership(&l2, &[1.0, 0.0]));
        assert!(wulff_membership(&l2, &[0.7, 0.7]));
        let l1 = Gauge::p_norm(2, 1.0).unwrap();
        // W = open unit cube
        assert!(wulff_membership(&l1, &[0.6, 0.3]));
        assert!(wulff_membership(&l1, &[0.95, -0.95]));
        assert!(!wulff_membership(&l1, &[1.0, 0.2]));
        let linf = Gauge::p_norm(2, f64::INFINITY).unwrap();
        assert_eq!(linf.eval(&[1.0, 1.0]), 1.0);
        // W = open cross-polytope; (0.5, 0.5) lies on its boundary
        assert!(!wulff_membership(&linf, &[0.5, 0.5]));
        assert!(wulff_membership(&linf, &[0.4, 0.5]));
    }

    #[test]
    fn dual_of_l1_is_linf() {
        let l1 = Gauge::p_norm(2, 1.0).unwrap();
        let d = dual_gauge(&l1).unwrap();
        // oracle: vertex enumeration over the cross-polytope {‖y‖₁ ≤ 1}
        let z = [3.0, 4.0];
        let vertices = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let oracle = vertices.iter().map(|v| dot(v, &z)).fold(f64::MIN, f64::max);
        assert!((d.eval(&z) - oracle).abs() < 1e-9);
        assert!((oracle - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dual_of_l3() {
        let l3 = Gauge::p_norm(2, 3.0).unwrap();
        let d = dual_gauge(&l3).unwrap();
        // oracle: conjugate exponent q = 3/2, ‖(1,1)‖_q = 2^{1/q}
        let oracle = 2f64.powf(1.0 / 1.5);
        assert!((d.eval(&[1.0, 1.0]) - oracle).abs() < 1e-6);
    }

    #[test]
    fn dual_of_euclidean_is_euclidean() {
        let d = dual_gauge(&Gauge::euclidean(3)).unwrap();
        for z in [[1.0, 2.0, -0.5], [0.0, 0.0, 3.0], [-1.0, 1.0, 1.0]] {
            assert!((d.eval(&z) - norm(&z)).abs() < 1e-7 * norm(&z));
        }
    }

    #[test]
    fn dual_requires_positive_gauge() {
        let h = Gauge::support(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!h.positive_on_sphere());
        assert!(matches!(dual_gauge(&h), Err(Error::DegenerateGauge(_))));
    }

    #[test]
    fn restricted_gauge_on_upper_half_disk() {
        let cone = ConvexCone::half_space(&[0.0, 1.0]).unwrap();
        let h0 = restricted_gauge(&Gauge::euclidean(2), &cone).unwrap();
        assert!(h0.eval(&[0.0, -1.0]).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        // oracle: dense sampling of the half-disk boundary (arc ∪ diameter)
        let oracle = |nu: [f64; 2]| {
            let mut best: f64 = 0.0;
            for k in 0..=200_000 {
                let t = std::f64::consts::PI * k as f64 / 200_000.0;
                best = best.max(nu[0] * t.cos() + nu[1] * t.sin());
                let x = -1.0 + 2.0 * k as f64 / 200_000.0;
                best = best.max(nu[0] * x);
            }
            best
        };
        for nu in [[0.0, 1.0], [s, -s], [0.6, 0.8], [-0.8, -0.6]] {
            let v = h0.eval(&nu);
            assert!(
                (v - oracle(nu)).abs() < 1e-8,
                "nu={nu:?} v={v} oracle={}",
                oracle(nu)
            );
        }
        assert!((h0.eval(&[0.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!((h0.eval(&[s, -s]) - s).abs() < 1e-9);
    }

    #[test]
    fn restricted_gauge_vanishes_on_outer_normals() {
        let cone = ConvexCone::orthant(3).unwrap();
        let h = Gauge::p_norm(3, 1.5).unwrap();
        let h0 = restricted_gauge(&h, &cone).unwrap();
        for a in cone.normals() {
            let minus: Vec<f64> = a.iter().map(|v| -v).collect();
            assert!(h0.eval(&minus) <= 1e-7);
        }
        let mut r = rng::stream(3, 0);
        for _ in 0..200 {
            let u = rng::unit_vector(&mut r, 3);
            assert!(h0.eval(&u) <= h.eval(&u) + 1e-12);
        }
    }

    #[test]
    fn restricted_rejects_empty_intersection() {
        // W = conv{0, (-1,0), (0,-1)} interior lies in the negative quadrant
        let h = Gauge::support(vec![vec![0.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let cone = ConvexCone::orthant(2).unwrap();
        assert!(matches!(
            restricted_gauge(&h, &cone),
            Err(Error::EmptyIntersection(_))
        ));
    }

    #[test]
    fn ellipsoidal_gauge_and_normals() {
        let h = Gauge::ellipsoidal(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        // W = {y : |M^{-T} y| < 1} = ellipse with semi-axes 2 and 1
        assert!((h.wulff_radius(&[1.0, 0.0]) - 2.0).abs() < 1e-14);
        assert!((h.wulff_radius(&[0.0, 1.0]) - 1.0).abs() < 1e-14);
        let x = [2.0f64.sqrt(), 0.5f64.sqrt()];
        let nu = h.wulff_normal(&x);
        // support property on ∂W: x·ν = H(ν)
        assert!((dot(&x, &nu) - h.eval(&nu)).abs() < 1e-12);
    }

    #[test]
    fn axioms_hold_for_constructed_gauges() {
        for g in [
            Gauge::euclidean(2),
            Gauge::p_norm(3, 1.0).unwrap(),
            Gauge::p_norm(3, 4.0).unwrap(),
            Gauge::ellipsoidal(&[vec![1.0, 0.3], vec![0.0, 2.0]]).unwrap(),
        ] {
            let rep = check_gauge_axioms(&g, 10_000, 11);
            assert!(rep.holds(1e-9), "{g:?} {rep:?}");
        }
    }
}
