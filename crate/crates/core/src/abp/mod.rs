//! Numerical ABP construction: the weighted Neumann problem
//! `w⁻¹ div(w ∇u) = b_Ω` with `∂u/∂ν = g(ν)`, its lower contact set, the
//! gradient-image inclusion and the AM-GM chain at contact points.

mod grid;

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::measure::{weighted_perimeter, weighted_volume, QuadratureSpec, RegionRep};
use crate::rng::stream;
use crate::weights::Weight;

pub use grid::{region_box, Cell, CutCell, LevelSet, MaskedGrid, QPoint};

/// Slack factor of the chain links, `ε_chain = CHAIN_C · h`.
pub const CHAIN_C: f64 = 4.0;
/// Allowed `|∇u(x) - p|` in units of `h` for the inclusion check.
pub const INCLUSION_C: f64 = 2.0;
pub const DEFAULT_CELLS_2D: usize = 128;
pub const DEFAULT_CELLS_3D: usize = 48;

/// Values on the nodes of a masked grid with difference quotients.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<MaskedGrid>,
    values: Vec<f64>,
    gradient: Vec<Option<Vec<f64>>>,
    hessian: Vec<Option<Vec<f64>>>,
}

impl ScalarField {
    /// Field with the given node values, shifted to zero mean over `Ω`.
    pub fn new(grid: Arc<MaskedGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameters(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let vol: f64 = grid.cells().iter().map(|c| c.volume).sum();
        let mean = grid
            .cells()
            .iter()
            .zip(&values)
            .map(|(c, u)| c.volume * u)
            .sum::<f64>()
            / vol;
        for v in &mut values {
            *v -= mean;
        }
        let n = grid.dim();
        let h = grid.h();
        let (gradient, hessian): (Vec<_>, Vec<_>) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let u0 = values[i];
                let mut g = vec![0.0; n];
                let mut ok = true;
                let mut full = true;
                for k in 0..n {
                    let up = grid.neighbor(i, k, true);
                    let dn = grid.neighbor(i, k, false);
                    g[k] = match (dn, up) {
                        (Some(a), Some(b)) => (values[b] - values[a]) / (2.0 * h),
                        (None, Some(b)) => {
                            full = false;
                            (values[b] - u0) / h
                        }
                        (Some(a), None) => {
                            full = false;
                            (u0 - values[a]) / h
                        }
                        (None, None) => {
                            ok = false;
                            0.0
                        }
                    };
                }
                let grad = ok.then_some(g);
                let hess = if full {
                    let mut m = vec![0.0; n * n];
                    let mut ok = true;
                    for k in 0..n {
                        let a = grid.neighbor(i, k, false).unwrap();
                        let b = grid.neighbor(i, k, true).unwrap();
                        m[k * n + k] = (values[a] - 2.0 * u0 + values[b]) / (h * h);
                        for l in k + 1..n {
                            let mut v = 0.0;
                            for (sk, sl, sign) in
                                [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)]
                            {
                                let mut off = vec![0isize; n];
                                off[k] = sk;
                                off[l] = sl;
                                match grid.offset(i, &off) {
                                    Some(j) => v += sign * values[j],
                                    None => ok = false,
                                }
                            }
                            m[k * n + l] = v / (4.0 * h * h);
                            m[l * n + k] = m[k * n + l];
                        }
                    }
                    ok.then_some(m)
                } else {
                    None
                };
                (grad, hess)
            })
            .unzip();
        Ok(ScalarField {
            grid,
            values,
            gradient,
            hessian,
        })
    }

    /// Samples `f` at the node centres.
    pub fn from_fn(grid: Arc<MaskedGrid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let v = grid.cells().iter().map(|c| f(&c.center)).collect();
        Self::new(grid, v)
    }

    pub fn grid(&self) -> &MaskedGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn gradient(&self, i: usize) -> Option<&[f64]> {
        self.gradient[i].as_deref()
    }
    /// Row-major `D²u` when every stencil neighbour exists.
    pub fn hessian(&self, i: usize) -> Option<&[f64]> {
        self.hessian[i].as_deref()
    }

    /// `max |u - (f - mean)|` over nodes whose centre lies in `Ω`, with `f`
    /// shifted to the same zero mean.
    pub fn linf_error(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let cells = self.grid.cells();
        let vol: f64 = cells.iter().map(|c| c.volume).sum();
        let exact: Vec<f64> = cells.iter().map(|c| f(&c.center)).collect();
        let mean = cells
            .iter()
            .zip(&exact)
            .map(|(c, u)| c.volume * u)
            .sum::<f64>()
            / vol;
        cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.interior)
            .map(|(i, _)| (self.values[i] - exact[i] + mean).abs())
            .fold(0.0, f64::max)
    }

    /// CSV dump of `x, u, ∇u, interior, contact` per node.
    pub fn write_csv<W: Write>(&self, out: W, contact: Option<&ContactSet>) -> Result<()> {
        let n = self.grid.dim();
        let mut wtr = csv::Writer::from_writer(out);
        let mut head: Vec<String> = (0..n).map(|k| format!("x{}", k + 1)).collect();
        head.push("u".into());
        head.extend((0..n).map(|k| format!("du{}", k + 1)));
        head.push("interior".into());
        head.push("contact".into());
        wtr.write_record(&head)?;
        let member: Vec<bool> = match contact {
            Some(c) => {
                let mut m = vec![false; self.values.len()];
                for &i in &c.nodes {
                    m[i] = true;
                }
                m
            }
            None => vec![false; self.values.len()],
        };
        for (i, c) in self.grid.cells().iter().enumerate() {
            let mut row: Vec<String> = c.center.iter().map(|v| format!("{v:.12e}")).collect();
            row.push(format!("{:.12e}", self.values[i]));
            match &self.gradient[i] {
                Some(g) => row.extend(g.iter().map(|v| format!("{v:.12e}"))),
                None => row.extend((0..n).map(|_| String::new())),
            }
            row.push((c.interior as u8).to_string());
            row.push((member[i] as u8).to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NeumannSolution {
    pub field: ScalarField,
    /// Compatibility constant `P_{w,g}(Ω;Σ) / w(Ω)` from quadrature.
    pub b: f64,
    /// Same ratio from the cut-cell sums.
    pub b_discrete: f64,
    /// `|Σ f| / Σ |f|` before projection.
    pub defect: f64,
    /// `‖A u - f‖_∞ / ‖f‖_∞` after the solve.
    pub residual: f64,
    pub iterations: usize,
}

fn weight_at(w: &Weight, p: &[f64]) -> f64 {
    w.eval(p).max(0.0)
}

/// Solves `div(w∇u) = b w` in `Ω` with `w ∂u/∂ν = w g(ν)` on `∂Ω ∩ Σ` and no
/// flux through `∂Σ`.
pub fn solve_neumann(
    grid: Arc<MaskedGrid>,
    e: &RegionRep,
    w: &Weight,
    g: &Gauge,
    cone: &ConvexCone,
    q: &QuadratureSpec,
) -> Result<NeumannSolution> {
    if g.dim() != grid.dim() {
        return Err(Error::InvalidParameters(
            "dimension mismatch between grid and gauge".into(),
        ));
    }
    let vol = weighted_volume(e, w, cone, q)?;
    let per = weighted_perimeter(e, w, g, cone, q)?;
    if !(vol.value > 0.0) {
        return Err(Error::InvalidParameters("w(Ω) vanishes".into()));
    }
    let b = per.value / vol.value;
    let flux = solve_flux_problem(grid, w, cone, &|_| b, &|_, nu| g.eval(nu))?;
    Ok(NeumannSolution {
        field: flux.field,
        b,
        b_discrete: flux.boundary_total / flux.weight_total,
        defect: flux.defect,
        residual: flux.residual,
        iterations: flux.iterations,
    })
}

/// Solution of a general flux problem with the cut-cell totals.
#[derive(Clone, Debug)]
pub struct FluxSolution {
    pub field: ScalarField,
    /// `Σ_i ∫_{cell_i ∩ Ω} w`.
    pub weight_total: f64,
    /// `Σ_i ∫_{∂Ω ∩ cell_i} w ψ`.
    pub boundary_total: f64,
    pub defect: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `div(w∇u) = s w` in `Ω` with `∂u/∂ν = ψ(x, ν)` on `∂Ω ∩ Σ` and no
/// flux through `∂Σ`. The data need only be compatible up to discretisation
/// error; the defect is removed along the weighted cell volumes.
pub fn solve_flux_problem(
    grid: Arc<MaskedGrid>,
    w: &Weight,
    cone: &ConvexCone,
    source: &(dyn Fn(&[f64]) -> f64 + Sync),
    boundary: &(dyn Fn(&[f64], &[f64]) -> f64 + Sync),
) -> Result<FluxSolution> {
    let n = grid.dim();
    if w.dim() != n || cone.dim() != n {
        return Err(Error::InvalidParameters(
            "dimension mismatch between grid, weight and cone".into(),
        ));
    }
    let h = grid.h();
    let m = grid.len();
    if !grid.is_mixed() {
        if let Some(c) = grid
            .cells()
            .iter()
            .find(|c| c.interior && !(w.eval(&c.center) > 0.0))
        {
            return Err(Error::DomainError(format!(
                "the weight must be positive on Ω when Ω does not touch ∂Σ; w({:?}) = {}",
                c.center,
                w.eval(&c.center)
            )));
        }
    }
    // per node: ∫w, ∫sw, boundary flux, and upper-face coefficients ∫_face w / h
    let rows: Vec<(f64, f64, f64, Vec<(usize, f64)>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let pts = grid.volume_points(i);
            let wv: f64 = pts.iter().map(|(p, s)| s * weight_at(w, &p[..n])).sum();
            let sv: f64 = pts
                .iter()
                .map(|(p, s)| s * weight_at(w, &p[..n]) * source(&p[..n]))
                .sum();
            let flux: f64 = grid
                .cell(i)
                .cut
                .as_ref()
                .map(|c| {
                    c.boundary
                        .iter()
                        .map(|((p, s), nu)| s * weight_at(w, &p[..n]) * boundary(&p[..n], &nu[..n]))
                        .sum()
                })
                .unwrap_or(0.0);
            let faces = (0..n)
                .filter_map(|k| {
                    grid.neighbor(i, k, true).map(|j| {
                        let c: f64 = grid
                            .face_quadrature(i, k)
                            .iter()
                            .map(|(p, s)| s * weight_at(w, &p[..n]))
                            .sum();
                        (j, c / h)
                    })
                })
                .collect();
            (wv, sv, flux, faces)
        })
        .collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut diag = vec![0.0; m];
    for (i, row) in rows.iter().enumerate() {
        for &(j, c) in &row.3 {
            if c > 0.0 {
                adj[i].push((j, c));
                adj[j].push((i, c));
                diag[i] += c;
                diag[j] += c;
            }
        }
    }
    let wsum: f64 = rows.iter().map(|r| r.0).sum();
    let gsum: f64 = rows.iter().map(|r| r.2).sum();
    let mut f: Vec<f64> = rows.iter().map(|r| r.2 - r.1).collect();
    let fabs: f64 = f.iter().map(|v| v.abs()).sum();
    let defect = f.iter().sum::<f64>().abs() / fabs.max(1e-300);
    // oblique projection along the weighted volumes; for a constant source
    // this replaces b by its discrete value
    let shift = f.iter().sum::<f64>() / wsum;
    for (v, r) in f.iter_mut().zip(&rows) {
        *v -= shift * r.0;
    }
    let after = f.iter().sum::<f64>().abs() / fabs.max(1e-300);
    if after > 1e-8 {
        return Err(Error::IncompatibleData { defect: after });
    }
    if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::DegenerateBoundary(format!(
            "node {i} has no open face"
        )));
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..m {
            let mut s = diag[i] * x[i];
            for &(j, c) in &adj[i] {
                s -= c * x[j];
            }
            y[i] = s;
        }
    };
    let (u, iterations) = pcg(&apply, &diag, &f, 1e-13, 20 * m + 1000)?;
    let mut au = vec![0.0; m];
    apply(&u, &mut au);
    let fmax = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let residual = au
        .iter()
        .zip(&f)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        / fmax;
    Ok(FluxSolution {
        field: ScalarField::new(grid, u)?,
        weight_total: wsum,
        boundary_total: gsum,
        defect,
        residual,
        iterations,
    })
}

/// Jacobi-preconditioned conjugate gradients for a consistent positive
/// semidefinite system whose kernel is the constants.
fn pcg(
    apply: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    f: &[f64],
    tol: f64,
    budget: usize,
) -> Result<(Vec<f64>, usize)> {
    let m = f.len();
    let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; m];
    if fnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = f.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; m];
    for it in 1..=budget {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / fnorm;
            if res < 1e-10 {
                return Ok((x, it));
            }
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / fnorm;
        if res < tol {
            return Ok((x, it));
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / fnorm;
    Err(Error::NonConvergence {
        iterations: budget,
        residual: res,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContactSet {
    /// Member nodes, in increasing order.
    pub nodes: Vec<usize>,
    /// Slack of every interior node with a gradient, as `(node, slack)`.
    pub slack: Vec<(usize, f64)>,
    pub epsilon: f64,
}

impl ContactSet {
    pub fn contains(&self, i: usize) -> bool {
        self.nodes.binary_search(&i).is_ok()
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn interior_nodes(u: &ScalarField) -> Vec<usize> {
    u.grid
        .cells()
        .iter()
        .enumerate()
        .filter(|(i, c)| c.interior && u.gradient[*i].is_some())
        .map(|(i, _)| i)
        .collect()
}

/// Lower contact set by exhaustive comparison with every interior node, with
/// `ε = 10 h² max |D²u|`.
pub fn contact_set(u: &ScalarField) -> ContactSet {
    let h = u.grid.h();
    let hmax = u
        .hessian
        .iter()
        .flatten()
        .flat_map(|m| m.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let epsilon = 10.0 * h * h * hmax;
    let nodes = interior_nodes(u);
    let cells = u.grid.cells();
    let slack: Vec<(usize, f64)> = nodes
        .par_iter()
        .map(|&i| {
            let g = u.gradient[i].as_ref().unwrap();
            let x = &cells[i].center;
            let ux = u.values[i];
            let s = nodes
                .iter()
                .map(|&j| {
                    let y = &cells[j].center;
                    let lin: f64 = g
                        .iter()
                        .zip(y.iter().zip(x))
                        .map(|(gk, (a, b))| gk * (a - b))
                        .sum();
                    u.values[j] - ux - lin
                })
                .fold(f64::INFINITY, f64::min);
            (i, s)
        })
        .collect();
    let members = slack
        .iter()
        .filter(|(_, s)| *s >= -epsilon)
        .map(|(i, _)| *i)
        .collect();
    ContactSet {
        nodes: members,
        slack,
        epsilon,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionMiss {
    pub p: Vec<f64>,
    pub node: Vec<f64>,
    pub distance: f64,
    pub in_contact_set: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub samples: usize,
    pub covered: usize,
    pub fraction: f64,
    /// Largest `|∇u(x_p) - p|` over all samples.
    pub worst_miss: f64,
    pub misses: Vec<InclusionMiss>,
}

/// Node minimising `u(x) - p·x` over interior nodes.
pub fn legendre_minimizer(u: &ScalarField, p: &[f64]) -> Option<usize> {
    let cells = u.grid.cells();
    interior_nodes(u).into_iter().min_by(|&a, &b| {
        let fa = u.values[a]
            - p.iter()
                .zip(&cells[a].center)
                .map(|(x, y)| x * y)
                .sum::<f64>();
        let fb = u.values[b]
            - p.iter()
                .zip(&cells[b].center)
                .map(|(x, y)| x * y)
                .sum::<f64>();
        fa.total_cmp(&fb).then(a.cmp(&b))
    })
}

/// For every `p` the Legendre minimiser must be a contact node with
/// `|∇u - p| ≤ C h`.
pub fn inclusion_check(
    u: &ScalarField,
    gamma: &ContactSet,
    points: &[Vec<f64>],
) -> InclusionReport {
    let h = u.grid.h();
    let results: Vec<(bool, f64, Option<InclusionMiss>)> = points
        .par_iter()
        .map(|p| match legendre_minimizer(u, p) {
            Some(i) => {
                let g = u.gradient[i].as_ref().unwrap();
                let d = g
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let member = gamma.contains(i);
                let ok = member && d <= INCLUSION_C * h;
                let miss = (!ok).then(|| InclusionMiss {
                    p: p.clone(),
                    node: u.grid.cell(i).center.clone(),
                    distance: d,
                    in_contact_set: member,
                });
                (ok, d, miss)
            }
            None => (false, f64::INFINITY, None),
        })
        .collect();
    let covered = results.iter().filter(|r| r.0).count();
    InclusionReport {
        samples: points.len(),
        covered,
        fraction: if points.is_empty() {
            1.0
        } else {
            covered as f64 / points.len() as f64
        },
        worst_miss: results.iter().map(|r| r.1).fold(0.0, f64::max),
        misses: results.into_iter().filter_map(|r| r.2).collect(),
    }
}

/// Seeded points of `W ∩ Σ` at distance at least `margin` from its boundary.
pub fn sample_wulff_points(
    h: &Gauge,
    cone: &ConvexCone,
    margin: f64,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let n = h.dim();
    let lip = crate::sphere::directions(n, if n == 2 { 720 } else { 4000 })
        .iter()
        .map(|u| h.polar(u))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let mut rng = stream(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let u = cone.sample_direction(&mut rng, 0.0);
        let r = h.wulff_radius(&u) * rng.gen::<f64>().powf(1.0 / n as f64);
        let p: Vec<f64> = u.iter().map(|v| v * r).collect();
        if h.polar(&p) + margin * lip < 1.0
            && (cone.is_full_space() || cone.distance_to_boundary(&p) >= margin)
        {
            out.push(p);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainViolation {
    pub link: char,
    pub x: Vec<f64>,
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    /// Contact nodes with a Hessian and `∇u ∈ Σ`.
    pub checked: usize,
    pub epsilon: f64,
    /// Largest excess of each link `(a) -det ≤ 0`, `(b) det ≤ (Δu/n)^n`,
    /// `(c) w(∇u)/w(x) det ≤ (b/D)^D`.
    pub max_violation: [f64; 3],
    pub violations: Vec<ChainViolation>,
    /// Largest `det D²u / (Δu/n)^n`.
    pub max_amgm_ratio: f64,
    /// Median of the same ratio.
    pub median_amgm_ratio: f64,
    /// `Σ_{Γ_u} w(∇u) det D²u · |cell|` and `(b/D)^D Σ_{Γ_u} ∫_{cell ∩ Ω} w`.
    pub image_measure: f64,
    pub chain_bound: f64,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn det(m: &[f64], n: usize) -> f64 {
    match n {
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => nalgebra::DMatrix::from_row_slice(n, n, m).determinant(),
    }
}

/// Checks the three links at every contact node where `∇u ∈ Σ`.
pub fn amgm_chain_check(
    u: &ScalarField,
    gamma: &ContactSet,
    w: &Weight,
    cone: &ConvexCone,
    b: f64,
) -> ChainReport {
    let n = u.grid.dim();
    let d = w.effective_dimension();
    let h = u.grid.h();
    let rhs_c = (b / d).powf(d);
    let epsilon = CHAIN_C * h;
    let mut report = ChainReport {
        checked: 0,
        epsilon,
        max_violation: [0.0; 3],
        violations: Vec::new(),
        max_amgm_ratio: 0.0,
        median_amgm_ratio: 0.0,
        image_measure: 0.0,
        chain_bound: 0.0,
    };
    let mut ratios = Vec::new();
    for &i in &gamma.nodes {
        let cell = u.grid.cell(i);
        let wx = w.eval(&cell.center);
        report.chain_bound += rhs_c
            * u.grid
                .volume_points(i)
                .iter()
                .map(|(p, s)| s * weight_at(w, &p[..n]))
                .sum::<f64>();
        let (Some(m), Some(g)) = (u.hessian(i), u.gradient(i)) else {
            continue;
        };
        if !cone.contains(g) {
            continue;
        }
        report.checked += 1;
        let dt = det(m, n);
        let lap: f64 = (0..n).map(|k| m[k * n + k]).sum();
        let am = (lap / n as f64).powi(n as i32);
        let wg = w.eval(g);
        report.image_measure += wg * dt.max(0.0) * cell.volume;
        if am > 0.0 {
            ratios.push(dt / am);
        }
        let links = [
            -dt,
            dt - am,
            if wx > 0.0 { wg / wx * dt - rhs_c } else { 0.0 },
        ];
        for (k, v) in links.iter().enumerate() {
            report.max_violation[k] = report.max_violation[k].max(*v);
            if *v > epsilon {
                report.violations.push(ChainViolation {
                    link: (b'a' + k as u8) as char,
                    x: cell.center.clone(),
                    excess: *v,
                });
            }
        }
    }
    ratios.sort_by(f64::total_cmp);
    report.max_amgm_ratio = ratios.last().copied().unwrap_or(0.0);
    report.median_amgm_ratio = ratios.get(ratios.len() / 2).copied().unwrap_or(0.0);
    report
}

/// Minimal SVG of a planar contact set (dots) and its gradient image (crosses).
pub fn contact_svg(u: &ScalarField, gamma: &ContactSet) -> Result<String> {
    if u.grid.dim() != 2 {
        return Err(Error::Unsupported("SVG output is planar only".into()));
    }
    let cells = u.grid.cells();
    let mut pts: Vec<[f64; 2]> = cells.iter().map(|c| [c.center[0], c.center[1]]).collect();
    pts.extend(
        gamma
            .nodes
            .iter()
            .filter_map(|&i| u.gradient(i).map(|g| [g[0], g[1]])),
    );
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in &pts {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let s = 400.0 / (x1 - x0).max(y1 - y0).max(1e-12);
    let tx = |x: f64| 10.0 + (x - x0) * s;
    let ty = |y: f64| 10.0 + (y1 - y) * s;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n",
        20.0 + (x1 - x0) * s,
        20.0 + (y1 - y0) * s
    ));
    for &i in &gamma.nodes {
        let c = &cells[i].center;
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"#3465a4\"/>\n",
            tx(c[0]),
            ty(c[1])
        ));
    }
    for &i in &gamma.nodes {
        if let Some(g) = u.gradient(i) {
            out.push_str(&format!(
                "<path d=\"M{:.2} {:.2}l2 2m-2 0l2 -2\" stroke=\"#cc0000\" stroke-width=\"0.5\"/>\n",
                tx(g[0]) - 1.0,
                ty(g[1]) - 1.0
            ));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests;
