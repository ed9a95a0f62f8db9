//! Computable set representations.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::linalg::{cross3, dot, norm, normalized, scale, sub};
use crate::sphere;

pub type RadialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TangentFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A set `E ⊂ R^n`; only `E ∩ Σ` enters the measures.
#[derive(Clone, Debug)]
pub enum RegionRep {
    /// `r W ∩ Σ` for the Wulff shape `W` of `gauge`.
    WulffSector {
        gauge: Gauge,
        scale: f64,
    },
    StarSet(StarSet),
    Polytope(Polytope),
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl RegionRep {
    pub fn wulff(gauge: Gauge, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "Wulff scale must be positive, got {scale}"
            )));
        }
        Ok(RegionRep::WulffSector { gauge, scale })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(RegionRep::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionRep::WulffSector { gauge, .. } => gauge.dim(),
            RegionRep::StarSet(s) => s.dim(),
            RegionRep::Polytope(p) => p.dim(),
            RegionRep::Ball { center, .. } => center.len(),
        }
    }

    /// Dilation `x ↦ r x`.
    pub fn scaled(&self, r: f64) -> RegionRep {
        match self {
            RegionRep::WulffSector { gauge, scale } => RegionRep::WulffSector {
                gauge: gauge.clone(),
                scale: scale * r,
            },
            RegionRep::StarSet(s) => RegionRep::StarSet(s.scaled(r)),
            RegionRep::Polytope(p) => RegionRep::Polytope(Polytope {
                vertices: p.vertices.iter().map(|v| scale(v, r)).collect(),
                facets: p.facets.clone(),
            }),
            RegionRep::Ball { center, radius } => RegionRep::Ball {
                center: scale(center, r),
                radius: radius * r,
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RegionRep::WulffSector { gauge, scale } => {
                format!("wulff({}, r={scale})", gauge.describe())
            }
            RegionRep::StarSet(s) => format!("star({})", s.label),
            RegionRep::Polytope(p) => format!("polytope({} vertices)", p.vertices.len()),
            RegionRep::Ball { center, radius } => format!("ball(c={center:?}, R={radius})"),
        }
    }
}

/// Periodic or clamped-natural cubic spline on a uniform grid.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    start: f64,
    step: f64,
    values: Vec<f64>,
    second: Vec<f64>,
    periodic: bool,
}

impl CubicSpline {
    /// Natural spline through `values` at `start + k·step`.
    pub fn natural(start: f64, end: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 4 || !(end > start) {
            return Err(Error::InvalidParameters(
                "spline needs at least 4 nodes on a nonempty interval".into(),
            ));
        }
        let step = (end - start) / (m - 1) as f64;
        // tridiagonal system for interior second derivatives (Thomas algorithm)
        let k = m - 2;
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<f64> = (1..m - 1)
            .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (step * step))
            .collect();
        for i in 1..k {
            let f = 1.0 / diag[i - 1];
            diag[i] -= f;
            rhs[i] -= f * rhs[i - 1];
        }
        let mut inner = vec![0.0; k];
        for i in (0..k).rev() {
            let next = if i + 1 < k { inner[i + 1] } else { 0.0 };
            inner[i] = (rhs[i] - next) / diag[i];
        }
        let mut second = vec![0.0];
        second.extend(inner);
        second.push(0.0);
        Ok(CubicSpline {
            start,
            step,
            values,
            second,
            periodic: false,
        })
    }

    /// Periodic spline through `values` at `start + k·period/m`, `k < m`.
    pub fn periodic(start: f64, period: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 4 || !(period > 0.0) {
            return Err(Error::InvalidParameters(
                "periodic spline needs at least 4 nodes".into(),
            ));
        }
        let step = period / m as f64;
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                6.0 * (values[(i + 1) % m] - 2.0 * values[i] + values[(i + m - 1) % m])
                    / (step * step)
            })
            .collect();
        // cyclic tridiagonal (1, 4, 1) solved as a dense system; node counts are modest
        let a = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                4.0
            } else if (i + 1) % m == j || (j + 1) % m == i {
                1.0
            } else {
                0.0
            }
        });
        let b = nalgebra::DVector::from_vec(rhs);
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidParameters("periodic spline system is singular".into()))?;
        Ok(CubicSpline {
            start,
            step,
            values,
            second: sol.iter().copied().collect(),
            periodic: true,
        })
    }

    fn locate(&self, t: f64) -> (usize, usize, f64) {
        let m = self.values.len();
        if self.periodic {
            let period = self.step * m as f64;
            let s = (t - self.start).rem_euclid(period) / self.step;
            let i = (s.floor() as usize).min(m - 1);
            (i, (i + 1) % m, s - i as f64)
        } else {
            let s = ((t - self.start) / self.step).clamp(0.0, (m - 1) as f64);
            let i = (s.floor() as usize).min(m - 2);
            (i, i + 1, s - i as f64)
        }
    }

    /// Value and first two derivatives at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (i, j, s) = self.locate(t);
        let h = self.step;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.second[i], self.second[j]);
        let a = 1.0 - s;
        let v = a * y0 + s * y1 + h * h / 6.0 * ((a * a * a - a) * m0 + (s * s * s - s) * m1);
        let d = (y1 - y0) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m0 + (3.0 * s * s - 1.0) * m1);
        let dd = a * m0 + s * m1;
        (v, d, dd)
    }

    fn scaled(&self, r: f64) -> Self {
        CubicSpline {
            values: self.values.iter().map(|v| v * r).collect(),
            second: self.second.iter().map(|v| v * r).collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone)]
enum Radial {
    /// Closed-form `ρ(u)` with an optional tangential gradient `∇_S ρ(u)`.
    Analytic {
        rho: RadialFn,
        grad: Option<TangentFn>,
        factor: f64,
    },
    /// Planar `ρ(θ)` as a cubic spline in the angle.
    Spline(CubicSpline),
}

/// Star-shaped set `{t u : u ∈ S^{n-1} ∩ Σ, 0 ≤ t < ρ(u)}`.
#[derive(Clone)]
pub struct StarSet {
    dim: usize,
    radial: Radial,
    smooth: bool,
    label: String,
}

impl fmt::Debug for StarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarSet({}, n={})", self.label, self.dim)
    }
}

impl StarSet {
    /// Radial function given in closed form. `smooth` declares `ρ ∈ C²`,
    /// which is needed for curvature evaluation. Bounds are checked on the
    /// cap of `cone`.
    pub fn analytic(
        cone: &ConvexCone,
        label: impl Into<String>,
        rho: RadialFn,
        grad: Option<TangentFn>,
        smooth: bool,
    ) -> Result<Self> {
        let s = StarSet {
            dim: cone.dim(),
            radial: Radial::Analytic {
                rho,
                grad,
                factor: 1.0,
            },
            smooth,
            label: label.into(),
        };
        s.check_bounds(cone)?;
        Ok(s)
    }

    /// Planar set whose radial function interpolates `values` on a uniform
    /// angle grid: periodic over the full circle for `Σ = R²`, natural on the
    /// closed arc `[lo, hi]` otherwise.
    pub fn spline_2d(
        cone: &ConvexCone,
        label: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let (lo, hi) = cone
            .arc()
            .ok_or_else(|| Error::InvalidParameters("spline star sets are planar".into()))?;
        let spline = if cone.is_full_space() {
            CubicSpline::periodic(lo, 2.0 * PI, values)?
        } else {
            CubicSpline::natural(lo, hi, values)?
        };
        let s = StarSet {
            dim: 2,
            radial: Radial::Spline(spline),
            smooth: true,
            label: label.into(),
        };
        s.check_bounds(cone)?;
        Ok(s)
    }

    /// The star set of `ρ_W(u) (1 + δ ξ(u))` for the Wulff shape of `gauge`.
    pub fn perturbed_wulff(
        cone: &ConvexCone,
        gauge: &Gauge,
        label: impl Into<String>,
        delta: f64,
        xi: RadialFn,
        xi_grad: TangentFn,
    ) -> Result<Self> {
        let g1 = gauge.clone();
        let g2 = gauge.clone();
        let xi1 = xi.clone();
        let rho: RadialFn = Arc::new(move |u: &[f64]| g1.wulff_radius(u) * (1.0 + delta * xi1(u)));
        let smooth = gauge.has_smooth_wulff_shape();
        let grad: TangentFn = Arc::new(move |u: &[f64]| {
            let rw = g2.wulff_radius(u);
            let f = 1.0 + delta * xi(u);
            // ∇_S ρ_W = -ρ_W² ∇_S H°(u); ∇_S H° is the tangential part of ∇H°
            let gw = if g2.has_closed_form_polar() {
                let nu = g2.wulff_normal(&scale(u, rw));
                let hp = 1.0 / rw;
                // ∇H° = H° ν / (ν·u)
                let full = scale(&nu, hp / dot(&nu, u));
                let tang = sub(&full, &scale(u, dot(&full, u)));
                scale(&tang, -rw * rw)
            } else {
                sphere::tangent_gradient(&|v: &[f64]| g2.wulff_radius(v), u, 1e-6)
            };
            let gx = xi_grad(u);
            gw.iter()
                .zip(&gx)
                .map(|(a, b)| a * f + rw * delta * b)
                .collect()
        });
        StarSet::analytic(cone, label, rho, Some(grad), smooth)
    }

    fn check_bounds(&self, cone: &ConvexCone) -> Result<()> {
        let n = self.dim;
        let count = if n == 2 { 4096 } else { 8192 };
        let dirs = sphere::directions(n.min(4), count);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut any = false;
        for d in dirs.iter().filter(|d| d.len() == n && cone.contains(d)) {
            let r = self.rho(d);
            lo = lo.min(r);
            hi = hi.max(r);
            any = true;
        }
        if !any {
            let u = cone.interior_direction();
            lo = self.rho(&u);
            hi = lo;
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "radial function must satisfy 0 < ρ < ∞ on the cap (sampled range [{lo}, {hi}])"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn rho(&self, u: &[f64]) -> f64 {
        match &self.radial {
            Radial::Analytic { rho, factor, .. } => factor * rho(u),
            Radial::Spline(s) => s.eval(sphere::angle_of(u)).0,
        }
    }

    /// Tangential gradient `∇_S ρ(u)`.
    pub fn tangent_gradient(&self, u: &[f64]) -> Vec<f64> {
        match &self.radial {
            Radial::Analytic {
                grad: Some(g),
                factor,
                ..
            } => scale(&g(u), *factor),
            Radial::Analytic {
                rho,
                grad: None,
                factor,
            } => scale(
                &sphere::tangent_gradient(&|v: &[f64]| rho(v), u, 1e-6),
                *factor,
            ),
            Radial::Spline(s) => {
                let d = s.eval(sphere::angle_of(u)).1;
                vec![-u[1] * d, u[0] * d]
            }
        }
    }

    fn scaled(&self, r: f64) -> StarSet {
        let radial = match &self.radial {
            Radial::Analytic { rho, grad, factor } => Radial::Analytic {
                rho: rho.clone(),
                grad: grad.clone(),
                factor: factor * r,
            },
            Radial::Spline(s) => Radial::Spline(s.scaled(r)),
        };
        StarSet {
            radial,
            ..self.clone()
        }
    }
}

/// Polygon (`n = 2`, facets are directed edges `[i, j]`) or polyhedron
/// (`n = 3`, facets are vertex loops ordered counterclockwise seen from outside).
#[derive(Clone, Debug)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    facets: Vec<Vec<usize>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>, facets: Vec<Vec<usize>>) -> Result<Self> {
        let n = vertices.first().map(|v| v.len()).unwrap_or(0);
        if !(n == 2 || n == 3)
            || vertices
                .iter()
                .any(|v| v.len() != n || v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidParameters(
                "polytopes are supported in dimensions 2 and 3".into(),
            ));
        }
        if facets.is_empty() {
            return Err(Error::InvalidParameters("polytope has no facets".into()));
        }
        for f in &facets {
            if f.iter().any(|&i| i >= vertices.len()) || f.len() < n {
                return Err(Error::InvalidParameters(
                    "facet references a missing vertex".into(),
                ));
            }
            if n == 2 && f.len() != 2 {
                return Err(Error::InvalidParameters(
                    "planar facets are edges [i, j]".into(),
                ));
            }
        }
        let p = Polytope { vertices, facets };
        // closed and consistently oriented: every directed edge has its reverse
        let mut edges: Vec<(usize, usize)> = Vec::new();
        if n == 2 {
            let mut starts: Vec<usize> = p.facets.iter().map(|f| f[0]).collect();
            let mut ends: Vec<usize> = p.facets.iter().map(|f| f[1]).collect();
            starts.sort_unstable();
            ends.sort_unstable();
            if starts != ends {
                return Err(Error::InvalidParameters(
                    "polygon edges do not form closed loops".into(),
                ));
            }
        } else {
            for f in &p.facets {
                for k in 0..f.len() {
                    edges.push((f[k], f[(k + 1) % f.len()]));
                }
            }
            let mut fwd = edges.clone();
            let mut rev: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (b, a)).collect();
            fwd.sort_unstable();
            rev.sort_unstable();
            if fwd != rev {
                return Err(Error::InvalidParameters(
                    "polyhedron facets are not consistently oriented or the surface is not closed"
                        .into(),
                ));
            }
        }
        let mut vol = 0.0;
        for k in 0..p.facets.len() {
            let (normal, area, h) = p.facet_plane(k)?;
            let _ = normal;
            vol += h * area;
        }
        if !(vol > 0.0) {
            return Err(Error::InvalidParameters(
                "facets must be oriented outward".into(),
            ));
        }
        Ok(p)
    }

    /// Counterclockwise polygon from its vertex loop (orientation is fixed
    /// automatically).
    pub fn polygon(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::InvalidParameters(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let area: f64 = (0..m)
            .map(|i| {
                let (a, b) = (&vertices[i], &vertices[(i + 1) % m]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        let facets = (0..m)
            .map(|i| {
                if area >= 0.0 {
                    vec![i, (i + 1) % m]
                } else {
                    vec![(i + 1) % m, i]
                }
            })
            .collect();
        Polytope::new(vertices, facets)
    }

    /// Axis-aligned box `[lo, hi]` in `R³`.
    pub fn cuboid(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        let v = |m: usize| {
            vec![
                if m & 1 == 0 { lo[0] } else { hi[0] },
                if m & 2 == 0 { lo[1] } else { hi[1] },
                if m & 4 == 0 { lo[2] } else { hi[2] },
            ]
        };
        let vertices = (0..8).map(v).collect();
        let facets = vec![
            vec![0, 2, 3, 1], // z = lo
            vec![4, 5, 7, 6], // z = hi
            vec![0, 1, 5, 4], // y = lo
            vec![2, 6, 7, 3], // y = hi
            vec![0, 4, 6, 2], // x = lo
            vec![1, 3, 7, 5], // x = hi
        ];
        Polytope::new(vertices, facets)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn facet_points(&self, k: usize) -> Vec<Vec<f64>> {
        self.facets[k]
            .iter()
            .map(|&i| self.vertices[i].clone())
            .collect()
    }

    /// Outward unit normal, measure and support value `h = x·ν` of facet `k`.
    pub fn facet_plane(&self, k: usize) -> Result<(Vec<f64>, f64, f64)> {
        let pts = self.facet_points(k);
        let (nrm, area) = if self.dim() == 2 {
            let d = sub(&pts[1], &pts[0]);
            let len = norm(&d);
            (vec![d[1], -d[0]], len)
        } else {
            // Newell's method
            let mut acc = [0.0; 3];
            for i in 0..pts.len() {
                let c = cross3(&pts[i], &pts[(i + 1) % pts.len()]);
                for j in 0..3 {
                    acc[j] += c[j];
                }
            }
            let a = norm(&acc);
            (acc.to_vec(), 0.5 * a)
        };
        if !(norm(&nrm) > 1e-300) || !(area > 0.0) {
            return Err(Error::DegenerateBoundary(format!(
                "facet {k} has no well-defined normal"
            )));
        }
        let nu = normalized(&nrm);
        let h = dot(&nu, &pts[0]);
        Ok((nu, area, h))
    }
}
