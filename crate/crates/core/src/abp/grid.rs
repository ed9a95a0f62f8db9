//! Cut-cell geometry of a region on a uniform grid.
//!
//! Cells are axis-aligned cubes of side `h` anchored at the origin. The
//! region is described by a level set `φ ≤ 0`; its zero set is reconstructed
//! from crossings on cell edges, so neighbouring cells always agree on the
//! shared face.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized, sub};
use crate::measure::{Polytope, RegionRep, StarSet};
use crate::quadrature::{gauss_legendre, radon7_points, Triangle};
use crate::sphere;

/// A point with quadrature weight, padded to three coordinates.
pub type QPoint = ([f64; 3], f64);

#[derive(Clone, Debug)]
pub enum LevelSet {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Wulff {
        gauge: crate::gauge::Gauge,
        scale: f64,
    },
    Star(StarSet),
    Polytope {
        planes: Vec<(Vec<f64>, f64)>,
    },
}

/// Axis-aligned box containing `E` (star sets get a 2% margin).
pub fn region_box(e: &RegionRep) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = e.dim();
    let (lo, hi) = match e {
        RegionRep::Polytope(p) => {
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            for v in p.vertices() {
                for k in 0..n {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
            (lo, hi)
        }
        _ => LevelSet::from_region(e)?.bounds(n),
    };
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters("region is unbounded".into()));
    }
    Ok((lo, hi))
}

impl LevelSet {
    pub fn from_region(e: &RegionRep) -> Result<Self> {
        Ok(match e {
            RegionRep::Ball { center, radius } => LevelSet::Ball {
                center: center.clone(),
                radius: *radius,
            },
            RegionRep::WulffSector { gauge, scale } => LevelSet::Wulff {
                gauge: gauge.clone(),
                scale: *scale,
            },
            RegionRep::StarSet(s) => LevelSet::Star(s.clone()),
            RegionRep::Polytope(p) => LevelSet::Polytope { planes: planes(p)? },
        })
    }

    /// Negative inside, positive outside.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            LevelSet::Ball { center, radius } => norm(&sub(x, center)) - radius,
            LevelSet::Wulff { gauge, scale } => gauge.polar(x) / scale - 1.0,
            LevelSet::Star(s) => {
                let r = norm(x);
                if r == 0.0 {
                    return -1.0;
                }
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                r / s.rho(&u) - 1.0
            }
            LevelSet::Polytope { planes } => planes
                .iter()
                .map(|(nu, h)| dot(nu, x) - h)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Outward unit normal of the level set through `x`.
    pub fn normal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LevelSet::Ball { center, .. } => normalized(&sub(x, center)),
            LevelSet::Wulff { gauge, .. } => gauge.wulff_normal(x),
            LevelSet::Polytope { planes } => planes
                .iter()
                .max_by(|a, b| (dot(&a.0, x) - a.1).total_cmp(&(dot(&b.0, x) - b.1)))
                .map(|p| p.0.clone())
                .expect("polytope has facets"),
            LevelSet::Star(_) => {
                let h = 1e-6 * norm(x).max(1e-3);
                let g: Vec<f64> = (0..x.len())
                    .map(|i| {
                        let mut a = x.to_vec();
                        let mut b = x.to_vec();
                        a[i] += h;
                        b[i] -= h;
                        (self.value(&a) - self.value(&b)) / (2.0 * h)
                    })
                    .collect();
                normalized(&g)
            }
        }
    }

    /// Axis-aligned bounds of `{φ < 0}`.
    fn bounds(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            LevelSet::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            LevelSet::Wulff { gauge, scale } => {
                let e = |k: usize, s: f64| {
                    let mut v = vec![0.0; n];
                    v[k] = s;
                    gauge.eval(&v) * scale
                };
                (
                    (0..n).map(|k| -e(k, -1.0)).collect(),
                    (0..n).map(|k| e(k, 1.0)).collect(),
                )
            }
            LevelSet::Star(s) => {
                let dirs = sphere::directions(n, if n == 2 { 4000 } else { 20000 });
                let mut lo = vec![0.0f64; n];
                let mut hi = vec![0.0f64; n];
                for u in &dirs {
                    let r = s.rho(u) * 1.02;
                    for k in 0..n {
                        lo[k] = lo[k].min(r * u[k]);
                        hi[k] = hi[k].max(r * u[k]);
                    }
                }
                (lo, hi)
            }
            LevelSet::Polytope { .. } => unreachable!("polytope bounds come from vertices"),
        }
    }
}

fn planes(p: &Polytope) -> Result<Vec<(Vec<f64>, f64)>> {
    (0..p.facets().len())
        .map(|k| p.facet_plane(k).map(|(nu, _, h)| (nu, h)))
        .collect()
}

/// Geometry of a cell that meets `∂Ω`.
#[derive(Clone, Debug, Default)]
pub struct CutCell {
    pub volume: Vec<QPoint>,
    /// Points on `∂Ω` with the outward unit normal.
    pub boundary: Vec<(QPoint, [f64; 3])>,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub index: Vec<usize>,
    pub center: Vec<f64>,
    /// Lebesgue measure of the cell part inside `Ω`.
    pub volume: f64,
    /// Whether the cell centre lies in `Ω`.
    pub interior: bool,
    pub cut: Option<CutCell>,
}

/// `Ω` on a uniform grid together with the cut-cell quadrature.
#[derive(Clone, Debug)]
pub struct MaskedGrid {
    dim: usize,
    h: f64,
    lo: Vec<f64>,
    shape: Vec<usize>,
    level: LevelSet,
    mixed: bool,
    node_of: Vec<usize>,
    cells: Vec<Cell>,
    cut_faces: HashMap<usize, Vec<QPoint>>,
}

const NONE: usize = usize::MAX;

fn pad3(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

/// Crossing of the zero set on the segment `a → b` with `φ(a) ≤ 0 < φ(b)` or
/// the reverse, by bisection.
fn crossing(level: &LevelSet, a: &[f64], b: &[f64], fa: f64) -> Vec<f64> {
    let (mut s0, mut s1) = (0.0f64, 1.0f64);
    let inside_a = fa <= 0.0;
    let at = |s: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect() };
    for _ in 0..60 {
        let m = 0.5 * (s0 + s1);
        if (level.value(&at(m)) <= 0.0) == inside_a {
            s0 = m;
        } else {
            s1 = m;
        }
        if s1 - s0 < 1e-16 {
            break;
        }
    }
    at(0.5 * (s0 + s1))
}

fn tet_points(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3], out: &mut Vec<QPoint>) {
    let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let e3 = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    let cr = crate::linalg::cross3(&e2, &e3);
    let vol = (e1[0] * cr[0] + e1[1] * cr[1] + e1[2] * cr[2]).abs() / 6.0;
    if vol == 0.0 {
        return;
    }
    // degree-2 four-point rule
    const P: f64 = 0.585_410_196_624_968_5;
    const Q: f64 = 0.138_196_601_125_010_5;
    let v = [a, b, c, d];
    for k in 0..4 {
        let mut p = [0.0; 3];
        for (j, vj) in v.iter().enumerate() {
            let l = if j == k { P } else { Q };
            for i in 0..3 {
                p[i] += l * vj[i];
            }
        }
        out.push((p, vol / 4.0));
    }
}

impl MaskedGrid {
    /// Grid of spacing `h` for `Ω = E ∩ Σ`. When `Ω` touches `∂Σ` the cone
    /// faces must be coordinate hyperplanes; they then become grid lines
    /// carrying a zero-flux condition.
    pub fn new(e: &RegionRep, cone: &ConvexCone, h: f64) -> Result<Self> {
        let n = e.dim();
        if n != cone.dim() {
            return Err(Error::InvalidParameters(
                "region and cone dimensions differ".into(),
            ));
        }
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!(
                "masked grids are available for n = 2, 3, not {n}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let level = LevelSet::from_region(e)?;
        let (mut lo, mut hi) = region_box(e)?;
        let mut first = Self::build(level.clone(), n, h, &lo, &hi, false)?;
        let touches = first
            .cells
            .iter()
            .any(|c| !cone.contains(&c.center) && c.interior || corner_outside(&first, c, cone));
        if touches {
            let mut axes = Vec::new();
            for a in cone.normals() {
                let k = (0..n).find(|&k| (a[k] - 1.0).abs() < 1e-14);
                match k {
                    Some(k) if a.iter().enumerate().all(|(j, v)| j == k || v.abs() < 1e-14) => axes.push(k),
                    _ => {
                        return Err(Error::Unsupported(
                            "Ω meets ∂Σ; this is supported only when the cone faces are coordinate hyperplanes".into(),
                        ))
                    }
                }
            }
            for k in axes {
                lo[k] = lo[k].max(0.0);
                hi[k] = hi[k].max(h);
            }
            first = Self::build(level, n, h, &lo, &hi, true)?;
        }
        first.check_connected()?;
        Ok(first)
    }

    fn build(
        level: LevelSet,
        n: usize,
        h: f64,
        lo: &[f64],
        hi: &[f64],
        mixed: bool,
    ) -> Result<Self> {
        let pad = 2.0;
        let lo: Vec<f64> = lo
            .iter()
            .map(|v| {
                if mixed && *v == 0.0 {
                    0.0
                } else {
                    ((v / h).floor() - pad) * h
                }
            })
            .collect();
        let shape: Vec<usize> = hi
            .iter()
            .zip(&lo)
            .map(|(b, a)| (((b - a) / h).ceil() + pad) as usize)
            .collect();
        let total: usize = shape.iter().product();
        if total > 50_000_000 {
            return Err(Error::InvalidParameters(format!(
                "grid with {total} cells is too large"
            )));
        }
        let vshape: Vec<usize> = shape.iter().map(|s| s + 1).collect();
        let vtotal: usize = vshape.iter().product();
        let vertex = |lin: usize| -> Vec<f64> {
            let mut r = lin;
            (0..n)
                .map(|k| {
                    let i = r % vshape[k];
                    r /= vshape[k];
                    lo[k] + i as f64 * h
                })
                .collect()
        };
        let phi: Vec<f64> = (0..vtotal)
            .into_par_iter()
            .map(|v| level.value(&vertex(v)))
            .collect();
        let mut grid = MaskedGrid {
            dim: n,
            h,
            lo: lo.clone(),
            shape: shape.clone(),
            level,
            mixed,
            node_of: vec![NONE; total],
            cells: Vec::new(),
            cut_faces: HashMap::new(),
        };
        let built: Vec<Option<Cell>> = (0..total)
            .into_par_iter()
            .map(|c| grid.make_cell(c, &phi, &vshape))
            .collect::<Result<Vec<_>>>()?;
        for (c, cell) in built.into_iter().enumerate() {
            if let Some(cell) = cell {
                grid.node_of[c] = grid.cells.len();
                grid.cells.push(cell);
            }
        }
        // cut faces between active cells
        let faces: Vec<((usize, usize), Vec<QPoint>)> = (0..grid.cells.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = Vec::new();
                for k in 0..n {
                    if let Some(j) = grid.neighbor(i, k, true) {
                        if let Some(pts) = grid.face_points(i, k, true, false, &phi, &vshape) {
                            out.push(((i * n + k, j), pts));
                        }
                    }
                }
                out
            })
            .collect();
        grid.cut_faces = faces.into_iter().map(|((key, _), p)| (key, p)).collect();
        // Ω boundary lying on grid faces: the neighbour holds no part of Ω
        let exposed: Vec<(usize, Vec<(QPoint, [f64; 3])>)> = (0..grid.cells.len())
            .into_par_iter()
            .filter_map(|i| {
                let mut caps = Vec::new();
                for k in 0..n {
                    for up in [false, true] {
                        if grid.neighbor(i, k, up).is_some()
                            || (mixed && !up && grid.cells[i].index[k] == 0 && grid.lo[k] == 0.0)
                        {
                            continue;
                        }
                        let mut nu = [0.0; 3];
                        nu[k] = if up { 1.0 } else { -1.0 };
                        let pts = grid
                            .face_points(i, k, up, true, &phi, &vshape)
                            .unwrap_or_default();
                        caps.extend(pts.into_iter().filter(|q| q.1 > 0.0).map(|q| (q, nu)));
                    }
                }
                (!caps.is_empty()).then_some((i, caps))
            })
            .collect();
        for (i, caps) in exposed {
            let c = &mut grid.cells[i];
            let cut = c.cut.get_or_insert_with(|| CutCell {
                volume: tensor_points(&c.center, h, n, None),
                boundary: Vec::new(),
            });
            cut.boundary.extend(caps);
        }
        if grid.cells.is_empty() {
            return Err(Error::EmptyIntersection("no grid cell meets Ω".into()));
        }
        Ok(grid)
    }

    fn vertex_lin(&self, idx: &[usize], vshape: &[usize]) -> usize {
        let mut lin = 0;
        for k in (0..self.dim).rev() {
            lin = lin * vshape[k] + idx[k];
        }
        lin
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.lo[k] + idx[k] as f64 * self.h)
            .collect()
    }

    fn cell_index(&self, lin: usize) -> Vec<usize> {
        let mut r = lin;
        (0..self.dim)
            .map(|k| {
                let i = r % self.shape[k];
                r /= self.shape[k];
                i
            })
            .collect()
    }

    fn cell_lin(&self, idx: &[usize]) -> usize {
        let mut lin = 0;
        for k in (0..self.dim).rev() {
            lin = lin * self.shape[k] + idx[k];
        }
        lin
    }

    /// Walks a cyclic list of lattice vertices and returns the inside polygon
    /// with, for each vertex, the lattice edge it was cut from (if any).
    fn walk(
        &self,
        corners: &[Vec<usize>],
        phi: &[f64],
        vshape: &[usize],
    ) -> Vec<(Vec<f64>, Option<(usize, usize)>)> {
        let m = corners.len();
        let mut out = Vec::with_capacity(m + 2);
        for i in 0..m {
            let a = &corners[i];
            let b = &corners[(i + 1) % m];
            let la = self.vertex_lin(a, vshape);
            let lb = self.vertex_lin(b, vshape);
            let (fa, fb) = (phi[la], phi[lb]);
            if fa <= 0.0 {
                out.push((self.point(a), None));
            }
            if (fa <= 0.0) != (fb <= 0.0) {
                // canonical direction so that both neighbours get the same point
                let (lo_v, hi_v, flo) = if la < lb { (a, b, fa) } else { (b, a, fb) };
                let x = crossing(&self.level, &self.point(lo_v), &self.point(hi_v), flo);
                out.push((x, Some((la.min(lb), la.max(lb)))));
            }
        }
        out
    }

    fn make_cell(&self, c: usize, phi: &[f64], vshape: &[usize]) -> Result<Option<Cell>> {
        let n = self.dim;
        let idx = self.cell_index(c);
        let h = self.h;
        let center: Vec<f64> = (0..n)
            .map(|k| self.lo[k] + (idx[k] as f64 + 0.5) * h)
            .collect();
        let corner = |m: usize| -> Vec<usize> { (0..n).map(|k| idx[k] + (m >> k & 1)).collect() };
        let inside: Vec<bool> = (0..1usize << n)
            .map(|m| phi[self.vertex_lin(&corner(m), vshape)] <= 0.0)
            .collect();
        let interior = self.level.value(&center) < 0.0;
        if inside.iter().all(|b| *b) {
            return Ok(Some(Cell {
                index: idx,
                center,
                volume: h.powi(n as i32),
                interior,
                cut: None,
            }));
        }
        if !inside.iter().any(|b| *b) {
            return Ok(None);
        }
        let mut cut = CutCell::default();
        if n == 2 {
            let ring = [corner(0), corner(1), corner(3), corner(2)];
            let poly = self.walk(&ring, phi, vshape);
            let pts: Vec<[f64; 3]> = poly.iter().map(|(p, _)| pad3(p)).collect();
            for i in 1..pts.len().saturating_sub(1) {
                let t: Triangle = [pts[0], pts[i], pts[i + 1]];
                cut.volume.extend(radon7_points(&t));
            }
            let (gx, gw) = gauss_legendre(4);
            let (tx, tw) = gauss_legendre(2);
            for (a, b) in cap_segments(&poly) {
                let len = norm(&sub(&b, &a));
                if len == 0.0 {
                    continue;
                }
                // chord normal, oriented like the level-set normal
                let tan = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let nm = self.level.normal(&mid);
                let sign = if -tan[1] * nm[0] + tan[0] * nm[1] >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                let nc = [-tan[1] * sign, tan[0] * sign];
                let offset = |s: f64| {
                    self.offset_to_zero(&[a[0] + s * len * tan[0], a[1] + s * len * tan[1]], &nc, h)
                };
                for (x, w) in gx.iter().zip(&gw) {
                    let s = 0.5 * (x + 1.0);
                    let c = [a[0] + s * len * tan[0], a[1] + s * len * tan[1]];
                    let d = offset(s);
                    let ds = 1e-4;
                    let slope = (offset((s + ds).min(1.0)) - offset((s - ds).max(0.0)))
                        / (((s + ds).min(1.0) - (s - ds).max(0.0)) * len);
                    let p = [c[0] + d * nc[0], c[1] + d * nc[1]];
                    let nu = self.level.normal(&p);
                    let wt = 0.5 * w * len;
                    cut.boundary
                        .push(((pad3(&p), wt * (1.0 + slope * slope).sqrt()), pad3(&nu)));
                    // sliver between the chord and the curve, signed
                    for (y, v) in tx.iter().zip(&tw) {
                        let t = 0.5 * (y + 1.0) * d;
                        let q = [c[0] + t * nc[0], c[1] + t * nc[1]];
                        cut.volume.push((pad3(&q), wt * 0.5 * v * d));
                    }
                }
            }
        } else {
            let mut faces: Vec<Vec<(Vec<f64>, Option<(usize, usize)>)>> = Vec::new();
            for k in 0..3 {
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                for side in 0..2 {
                    let base = side << k;
                    let ring = [
                        corner(base),
                        corner(base | 1 << a),
                        corner(base | 1 << a | 1 << b),
                        corner(base | 1 << b),
                    ];
                    let poly = self.walk(&ring, phi, vshape);
                    if !poly.is_empty() {
                        faces.push(poly);
                    }
                }
            }
            // chain interface segments into cycles through shared edge keys
            let mut next: HashMap<(usize, usize), Vec<((usize, usize), Vec<f64>)>> = HashMap::new();
            let mut points: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
            for f in &faces {
                let m = f.len();
                for i in 0..m {
                    if let (Some(ka), true) = (f[i].1, f[(i + 1) % m].1.is_some()) {
                        let kb = f[(i + 1) % m].1.unwrap();
                        if ka == kb {
                            continue;
                        }
                        // only consecutive crossings bound an interface segment
                        next.entry(ka)
                            .or_default()
                            .push((kb, f[(i + 1) % m].0.clone()));
                        next.entry(kb).or_default().push((ka, f[i].0.clone()));
                        points.insert(ka, f[i].0.clone());
                        points.insert(kb, f[(i + 1) % m].0.clone());
                    }
                }
            }
            let mut cycles: Vec<Vec<Vec<f64>>> = Vec::new();
            let mut used: HashMap<(usize, usize), bool> = HashMap::new();
            let mut keys: Vec<(usize, usize)> = points.keys().cloned().collect();
            keys.sort();
            for start in keys {
                if used.contains_key(&start) {
                    continue;
                }
                let mut cyc = vec![points[&start].clone()];
                used.insert(start, true);
                let mut prev = start;
                let mut cur = next[&start][0].0;
                while cur != start {
                    if used.contains_key(&cur) {
                        return Err(Error::DegenerateBoundary(format!(
                            "interface in cell {idx:?} is not a simple cycle"
                        )));
                    }
                    used.insert(cur, true);
                    cyc.push(points[&cur].clone());
                    let nb = &next[&cur];
                    let step = nb
                        .iter()
                        .find(|(k, _)| *k != prev)
                        .map(|(k, _)| *k)
                        .unwrap_or(prev);
                    prev = cur;
                    cur = step;
                }
                cycles.push(cyc);
            }
            let all: Vec<&Vec<f64>> = faces.iter().flatten().map(|(p, _)| p).collect();
            let c0 = pad3(
                &(0..3)
                    .map(|k| all.iter().map(|p| p[k]).sum::<f64>() / all.len() as f64)
                    .collect::<Vec<_>>(),
            );
            for f in &faces {
                let pts: Vec<[f64; 3]> = f.iter().map(|(p, _)| pad3(p)).collect();
                for i in 1..pts.len().saturating_sub(1) {
                    tet_points(&c0, &pts[0], &pts[i], &pts[i + 1], &mut cut.volume);
                }
            }
            for cyc in &cycles {
                let m = cyc.len() as f64;
                let cc = pad3(
                    &(0..3)
                        .map(|k| cyc.iter().map(|p| p[k]).sum::<f64>() / m)
                        .collect::<Vec<_>>(),
                );
                for i in 0..cyc.len() {
                    let a = pad3(&cyc[i]);
                    let b = pad3(&cyc[(i + 1) % cyc.len()]);
                    tet_points(&c0, &cc, &a, &b, &mut cut.volume);
                    self.curved_cap(&[cc, a, b], h, &mut cut);
                }
            }
        }
        let volume: f64 = cut.volume.iter().map(|q| q.1).sum();
        if !(volume > 1e-12 * h.powi(n as i32)) {
            return Ok(None);
        }
        Ok(Some(Cell {
            index: idx,
            center,
            volume,
            interior,
            cut: Some(cut),
        }))
    }

    /// Quadrature on the part of the zero set above the flat triangle `t`,
    /// plus the signed sliver between the two.
    fn curved_cap(&self, t: &Triangle, h: f64, cut: &mut CutCell) {
        let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
        let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
        let cr = crate::linalg::cross3(&e1, &e2);
        let area2 = norm(&cr);
        if area2 == 0.0 {
            return;
        }
        let centroid: Vec<f64> = (0..3)
            .map(|k| (t[0][k] + t[1][k] + t[2][k]) / 3.0)
            .collect();
        let lev = self.level.normal(&centroid);
        let sign = if dot(&cr, &lev) >= 0.0 { 1.0 } else { -1.0 };
        let nt: Vec<f64> = cr.iter().map(|v| sign * v / area2).collect();
        let u1 = normalized(&e1);
        let u2 = normalized(&crate::linalg::cross3(&nt, &u1));
        let (tx, tw) = gauss_legendre(2);
        let delta = 1e-3 * h;
        for (p, wt) in radon7_points(t) {
            let d = self.offset_to_zero(&p, &nt, h);
            let shifted = |v: &[f64], s: f64| -> f64 {
                let q: Vec<f64> = (0..3).map(|k| p[k] + s * v[k]).collect();
                self.offset_to_zero(&q, &nt, h)
            };
            let g1 = (shifted(&u1, delta) - shifted(&u1, -delta)) / (2.0 * delta);
            let g2 = (shifted(&u2, delta) - shifted(&u2, -delta)) / (2.0 * delta);
            let x: Vec<f64> = (0..3).map(|k| p[k] + d * nt[k]).collect();
            let nu = self.level.normal(&x);
            cut.boundary
                .push(((pad3(&x), wt * (1.0 + g1 * g1 + g2 * g2).sqrt()), pad3(&nu)));
            for (y, v) in tx.iter().zip(&tw) {
                let s = 0.5 * (y + 1.0) * d;
                let q: Vec<f64> = (0..3).map(|k| p[k] + s * nt[k]).collect();
                cut.volume.push((pad3(&q), wt * 0.5 * v * d));
            }
        }
    }

    /// Signed distance along `dir` from `c` to the zero set, by Newton steps;
    /// zero when no root is found within `h`.
    fn offset_to_zero(&self, c: &[f64], dir: &[f64], h: f64) -> f64 {
        let at = |d: f64| -> f64 {
            let x: Vec<f64> = c.iter().zip(dir).map(|(a, b)| a + d * b).collect();
            self.level.value(&x)
        };
        let mut d = 0.0;
        let step = 1e-7 * h;
        for _ in 0..8 {
            let f = at(d);
            let df = (at(d + step) - at(d - step)) / (2.0 * step);
            if !(df.abs() > 1e-12) {
                return 0.0;
            }
            let nd = d - f / df;
            if !(nd.abs() < h) {
                return 0.0;
            }
            let done = (nd - d).abs() < 1e-15 * h.max(1.0);
            d = nd;
            if done {
                break;
            }
        }
        d
    }

    /// Quadrature on the inside part of a face of node `i` normal to axis `k`.
    /// `None` when the face is fully inside, unless `keep_full` is set.
    fn face_points(
        &self,
        i: usize,
        k: usize,
        up: bool,
        keep_full: bool,
        phi: &[f64],
        vshape: &[usize],
    ) -> Option<Vec<QPoint>> {
        let n = self.dim;
        let idx = &self.cells[i].index;
        let mut base = idx.clone();
        base[k] += up as usize;
        let others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let corner = |m: usize| -> Vec<usize> {
            let mut v = base.clone();
            for (b, &j) in others.iter().enumerate() {
                v[j] += m >> b & 1;
            }
            v
        };
        let ring: Vec<Vec<usize>> = if n == 2 {
            vec![corner(0), corner(1)]
        } else {
            vec![corner(0), corner(1), corner(3), corner(2)]
        };
        if !keep_full && ring.iter().all(|c| phi[self.vertex_lin(c, vshape)] <= 0.0) {
            return None;
        }
        let mut out = Vec::new();
        if n == 2 {
            let (a, b) = (&ring[0], &ring[1]);
            let (la, lb) = (self.vertex_lin(a, vshape), self.vertex_lin(b, vshape));
            let (ia, ib) = (phi[la] <= 0.0, phi[lb] <= 0.0);
            let seg = match (ia, ib) {
                (false, false) => return Some(out),
                (true, false) => (
                    self.point(a),
                    crossing(&self.level, &self.point(a), &self.point(b), phi[la]),
                ),
                (false, true) => (
                    crossing(&self.level, &self.point(a), &self.point(b), phi[la]),
                    self.point(b),
                ),
                (true, true) => (self.point(a), self.point(b)),
            };
            let len = norm(&sub(&seg.1, &seg.0));
            let (gx, gw) = gauss_legendre(3);
            for (x, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (x + 1.0);
                let p: Vec<f64> = seg
                    .0
                    .iter()
                    .zip(&seg.1)
                    .map(|(p, q)| p + s * (q - p))
                    .collect();
                out.push((pad3(&p), 0.5 * w * len));
            }
        } else {
            let poly = self.walk(&ring, phi, vshape);
            let pts: Vec<[f64; 3]> = poly.iter().map(|(p, _)| pad3(p)).collect();
            for j in 1..pts.len().saturating_sub(1) {
                out.extend(radon7_points(&[pts[0], pts[j], pts[j + 1]]));
            }
        }
        Some(out)
    }

    fn check_connected(&self) -> Result<()> {
        let m = self.cells.len();
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for k in 0..self.dim {
                for up in [false, true] {
                    if let Some(j) = self.neighbor(i, k, up) {
                        let a = if up { i } else { j };
                        let open = match self.cut_faces.get(&(a * self.dim + k)) {
                            Some(p) => p.iter().any(|q| q.1 > 0.0),
                            None => true,
                        };
                        if open && !seen[j] {
                            seen[j] = true;
                            count += 1;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        if count != m {
            return Err(Error::InvalidParameters(format!(
                "Ω is not connected on the grid ({count} of {m} cells reachable)"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn lower_corner(&self) -> &[f64] {
        &self.lo
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    /// Whether `Ω` touches `∂Σ`.
    pub fn is_mixed(&self) -> bool {
        self.mixed
    }
    pub fn level_set(&self) -> &LevelSet {
        &self.level
    }
    pub fn len(&self) -> usize {
        self.cells.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    /// Neighbour of node `i` along axis `k`.
    pub fn neighbor(&self, i: usize, k: usize, up: bool) -> Option<usize> {
        let mut idx = self.cells[i].index.clone();
        if up {
            idx[k] += 1;
            if idx[k] >= self.shape[k] {
                return None;
            }
        } else {
            if idx[k] == 0 {
                return None;
            }
            idx[k] -= 1;
        }
        let j = self.node_of[self.cell_lin(&idx)];
        (j != NONE).then_some(j)
    }

    /// Node at an offset from node `i`.
    pub fn offset(&self, i: usize, off: &[isize]) -> Option<usize> {
        let idx = &self.cells[i].index;
        let mut t = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let v = idx[k] as isize + off[k];
            if v < 0 || v >= self.shape[k] as isize {
                return None;
            }
            t.push(v as usize);
        }
        let j = self.node_of[self.cell_lin(&t)];
        (j != NONE).then_some(j)
    }

    /// Volume quadrature of node `i` (tensor Gauss on full cells).
    pub fn volume_points(&self, i: usize) -> Vec<QPoint> {
        let c = &self.cells[i];
        match &c.cut {
            Some(cut) => cut.volume.clone(),
            None => tensor_points(&c.center, self.h, self.dim, None),
        }
    }

    /// Quadrature of the open face between `i` and its upper neighbour along `k`.
    pub fn face_quadrature(&self, i: usize, k: usize) -> Vec<QPoint> {
        match self.cut_faces.get(&(i * self.dim + k)) {
            Some(p) => p.clone(),
            None => {
                let mut c = self.cells[i].center.clone();
                c[k] += 0.5 * self.h;
                tensor_points(&c, self.h, self.dim, Some(k))
            }
        }
    }
}

fn corner_outside(g: &MaskedGrid, c: &Cell, cone: &ConvexCone) -> bool {
    match &c.cut {
        Some(cut) => cut
            .boundary
            .iter()
            .any(|(q, _)| !cone.contains(&q.0[..g.dim])),
        None => {
            let h = g.h;
            (0..1usize << g.dim).any(|m| {
                let p: Vec<f64> = (0..g.dim)
                    .map(|k| c.center[k] + if m >> k & 1 == 1 { 0.5 * h } else { -0.5 * h })
                    .collect();
                !cone.contains(&p)
            })
        }
    }
}

/// Three-point Gauss tensor rule on the cube of side `h` centred at `c`,
/// or on its face orthogonal to axis `skip`.
fn tensor_points(c: &[f64], h: f64, n: usize, skip: Option<usize>) -> Vec<QPoint> {
    let (gx, gw) = gauss_legendre(3);
    let axes: Vec<usize> = (0..n).filter(|k| Some(*k) != skip).collect();
    let m = axes.len();
    let mut out = Vec::with_capacity(3usize.pow(m as u32));
    for t in 0..3usize.pow(m as u32) {
        let mut p = pad3(c);
        let mut w = 1.0;
        let mut r = t;
        for &k in &axes {
            let j = r % 3;
            r /= 3;
            p[k] = c[k] + 0.5 * h * gx[j];
            w *= 0.5 * h * gw[j];
        }
        out.push((p, w));
    }
    out
}

/// Interface segments of a planar walk: each exit crossing joined to the
/// next crossing in cyclic order.
fn cap_segments(poly: &[(Vec<f64>, Option<(usize, usize)>)]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let m = poly.len();
    let mut out = Vec::new();
    for i in 0..m {
        let j = (i + 1) % m;
        if poly[i].1.is_some() && poly[j].1.is_some() && poly[i].1 != poly[j].1 {
            out.push((poly[i].0.clone(), poly[j].0.clone()));
        }
    }
    out
}
