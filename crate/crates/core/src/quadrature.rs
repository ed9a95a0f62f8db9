//! Adaptive quadrature engines: Gauss-Kronrod on intervals and a nested
//! degree-5 rule on triangles. Both refine the worst cell first from a
//! deterministic priority queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Value and error estimate of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl Integral {
    pub fn zero() -> Self {
        Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
            evaluations: 0,
        }
    }

    pub fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scaled(self, s: f64) -> Integral {
        Integral {
            value: self.value * s,
            error: self.error * s.abs(),
            ..self
        }
    }
}

/// Stopping rule shared by the adaptive engines.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_cells: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_cells: usize) -> Self {
        Tolerance {
            rel,
            abs,
            max_cells,
        }
    }

    fn satisfied(&self, value: f64, error: f64) -> bool {
        error <= self.abs.max(self.rel * value.abs())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

// Gauss-Kronrod 7/15 abscissae and weights (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Debug)]
struct Cell<T> {
    error: f64,
    id: usize,
    value: f64,
    data: T,
}

impl<T> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Cell<T> {}
impl<T> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Summation roundoff allowance for `cells` cell contributions.
fn roundoff_floor(value: f64, cells: usize) -> f64 {
    2.0 * f64::EPSILON * (1.0 + (cells as f64).sqrt()) * value.abs()
}

fn run_adaptive<T, E, S>(
    initial: Vec<T>,
    estimate: E,
    split: S,
    tol: Tolerance,
    evals_per_cell: usize,
) -> Integral
where
    E: Fn(&T) -> (f64, f64),
    S: Fn(&T) -> Vec<T>,
{
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for data in initial {
        let (v, e) = estimate(&data);
        evaluations += evals_per_cell;
        value += v;
        error += e;
        heap.push(Cell {
            error: e,
            id: next_id,
            value: v,
            data,
        });
        next_id += 1;
    }
    while !tol.satisfied(value, error + roundoff_floor(value, heap.len()))
        && heap.len() < tol.max_cells
    {
        let Some(worst) = heap.pop() else { break };
        value -= worst.value;
        error -= worst.error;
        for data in split(&worst.data) {
            let (v, e) = estimate(&data);
            evaluations += evals_per_cell;
            value += v;
            error += e;
            heap.push(Cell {
                error: e,
                id: next_id,
                value: v,
                data,
            });
            next_id += 1;
        }
    }
    let loop_satisfied = tol.satisfied(value, error + roundoff_floor(value, heap.len()));
    // re-sum in id order so the running-sum drift does not leak into the result
    let mut cells: Vec<Cell<T>> = heap.into_vec();
    cells.sort_by_key(|c| c.id);
    let value: f64 = cells.iter().map(|c| c.value).sum();
    let error: f64 = cells.iter().map(|c| c.error).sum();
    let error = error + roundoff_floor(value, cells.len());
    Integral {
        value,
        error,
        converged: loop_satisfied || tol.satisfied(value, error),
        evaluations,
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration over `[a, b]`, optionally
/// pre-split at `breaks` (known kinks of the integrand).
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Integral {
    if b <= a {
        return Integral::zero();
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let initial: Vec<(f64, f64)> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    run_adaptive(
        initial,
        |&(l, r)| gk15(&f, l, r),
        |&(l, r)| {
            let m = 0.5 * (l + r);
            vec![(l, m), (m, r)]
        },
        tol,
        15,
    )
}

/// Planar triangle embedded in `R^3`.
pub type Triangle = [[f64; 3]; 3];

// Radon's degree-5 seven-point rule in barycentric coordinates.
const RADON_A1: f64 = 0.059_715_871_789_769_82;
const RADON_B1: f64 = 0.470_142_064_105_115_1;
const RADON_A2: f64 = 0.797_426_985_353_087_3;
const RADON_B2: f64 = 0.101_286_507_323_456_3;
const RADON_W0: f64 = 0.225;
const RADON_W1: f64 = 0.132_394_152_788_506_2;
const RADON_W2: f64 = 0.125_939_180_544_827_2;

pub fn triangle_area(t: &Triangle) -> f64 {
    let u = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
    let v = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
    let c = crate::linalg::cross3(&u, &v);
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

fn bary(t: &Triangle, l: [f64; 3]) -> [f64; 3] {
    let mut p = [0.0; 3];
    for k in 0..3 {
        p[k] = l[0] * t[0][k] + l[1] * t[1][k] + l[2] * t[2][k];
    }
    p
}

/// Degree-5 rule on one triangle.
pub fn radon7<F: Fn(&[f64; 3]) -> f64>(f: &F, t: &Triangle) -> f64 {
    let area = triangle_area(t);
    let c = f(&bary(t, [1.0 / 3.0; 3]));
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in 0..3 {
        let mut l = [RADON_B1; 3];
        l[k] = RADON_A1;
        s1 += f(&bary(t, l));
        let mut l = [RADON_B2; 3];
        l[k] = RADON_A2;
        s2 += f(&bary(t, l));
    }
    area * (RADON_W0 * c + RADON_W1 * s1 + RADON_W2 * s2)
}

/// Points and weights of the seven-point rule on one triangle.
pub fn radon7_points(t: &Triangle) -> Vec<([f64; 3], f64)> {
    let area = triangle_area(t);
    let mut out = Vec::with_capacity(7);
    out.push((bary(t, [1.0 / 3.0; 3]), area * RADON_W0));
    for k in 0..3 {
        let mut l = [RADON_B1; 3];
        l[k] = RADON_A1;
        out.push((bary(t, l), area * RADON_W1));
        let mut l = [RADON_B2; 3];
        l[k] = RADON_A2;
        out.push((bary(t, l), area * RADON_W2));
    }
    out
}

fn mid(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

pub fn split_triangle(t: &Triangle) -> Vec<Triangle> {
    let m01 = mid(&t[0], &t[1]);
    let m12 = mid(&t[1], &t[2]);
    let m20 = mid(&t[2], &t[0]);
    vec![
        [t[0], m01, m20],
        [m01, t[1], m12],
        [m20, m12, t[2]],
        [m01, m12, m20],
    ]
}

/// Adaptive integration over a union of triangles. Each cell's estimate is
/// the sum over its four children, and the error is the gap to the parent rule.
pub fn integrate_triangles<F: Fn(&[f64; 3]) -> f64>(
    f: F,
    triangles: Vec<Triangle>,
    tol: Tolerance,
) -> Integral {
    run_adaptive(
        triangles,
        |t| {
            let coarse = radon7(&f, t);
            let fine: f64 = split_triangle(t).iter().map(|c| radon7(&f, c)).sum();
            (fine, (fine - coarse).abs())
        },
        split_triangle,
        tol,
        35,
    )
}

/// Embed a planar triangle.
pub fn planar(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Triangle {
    [[a[0], a[1], 0.0], [b[0], b[1], 0.0], [c[0], c[1], 0.0]]
}
