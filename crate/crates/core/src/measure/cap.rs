//! Integration over the spherical cap `S^{n-1} ∩ Σ`, over segments and
//! planar polygons, and a chunked Monte Carlo driver.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::cone::ConvexCone;
use crate::linalg::{axpy, dot, norm, scale, sub};
use crate::quadrature::{integrate_1d, integrate_triangles, Integral, Tolerance, Triangle};
use crate::rng::{stream, Stream};
use crate::sphere;

const MC_CHUNK: usize = 4096;

/// Mean and standard error of `f` over `samples` draws. Draws are split into
/// fixed chunks with one random stream each, and chunk sums are combined in
/// chunk order, so the result does not depend on the thread count.
pub fn monte_carlo<F>(samples: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let samples = samples.max(2);
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let v = f(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2, count)
        })
        .collect();
    let (s, s2, m) = sums.iter().fold((0.0, 0.0, 0usize), |acc, x| {
        (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2)
    });
    let m = m as f64;
    let mean = s / m;
    let var = ((s2 / m - mean * mean) * m / (m - 1.0)).max(0.0);
    (mean, (var / m).sqrt())
}

/// Keep the part of a planar-or-spatial polygon with `a·x ≥ 0`.
pub fn clip_polygon(poly: &[Vec<f64>], a: &[f64]) -> Vec<Vec<f64>> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 2);
    for i in 0..m {
        let p = &poly[i];
        let q = &poly[(i + 1) % m];
        let dp = dot(a, p);
        let dq = dot(a, q);
        if dp >= 0.0 {
            out.push(p.clone());
        }
        if (dp >= 0.0) != (dq >= 0.0) {
            let t = dp / (dp - dq);
            out.push(axpy(p, t, &sub(q, p)));
        }
    }
    out
}

/// Parameter range `[s0, s1] ⊂ [0, 1]` of the segment `p + s(q - p)` inside
/// the closed cone, or `None`.
pub fn clip_segment(p: &[f64], q: &[f64], cone: &ConvexCone) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for a in cone.normals() {
        let ap = dot(a, p);
        let ad = dot(a, &sub(q, p));
        if ad.abs() < 1e-300 {
            if ap < 0.0 {
                return None;
            }
            continue;
        }
        let s = -ap / ad;
        if ad > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
    }
    (hi > lo).then_some((lo, hi))
}

/// Whether every point lies on one supporting hyperplane of the cone.
pub fn lies_on_boundary(points: &[Vec<f64>], cone: &ConvexCone) -> bool {
    let scale_x = points
        .iter()
        .map(|p| norm(p))
        .fold(0.0, f64::max)
        .max(1e-300);
    cone.normals()
        .iter()
        .any(|a| points.iter().all(|p| dot(a, p).abs() <= 1e-12 * scale_x))
}

/// `∫_0^1 f(p + s(q - p)) |q - p| ds` restricted to `[s0, s1]`.
pub fn segment_integral<F: Fn(&[f64]) -> f64>(
    p: &[f64],
    q: &[f64],
    s: (f64, f64),
    f: F,
    tol: Tolerance,
) -> Integral {
    let d = sub(q, p);
    let len = norm(&d);
    integrate_1d(|t| f(&axpy(p, t, &d)) * len, s.0, s.1, &[], tol)
}

/// Fan triangulation of a convex polygon in `R³`.
pub fn fan(poly: &[Vec<f64>]) -> Vec<Triangle> {
    let to3 = |v: &Vec<f64>| [v[0], v[1], v[2]];
    (1..poly.len().saturating_sub(1))
        .map(|i| [to3(&poly[0]), to3(&poly[i]), to3(&poly[i + 1])])
        .collect()
}

/// `∫ f dA` over a convex planar polygon in `R³`.
pub fn polygon_integral<F: Fn(&[f64]) -> f64>(poly: &[Vec<f64>], f: F, tol: Tolerance) -> Integral {
    let tris = fan(poly);
    if tris.is_empty() {
        return Integral::zero();
    }
    integrate_triangles(|p: &[f64; 3]| f(p), tris, tol)
}

/// Octahedron faces `{s·p = 1}` clipped to the closed cone, in gnomonic form.
fn cap_faces(cone: &ConvexCone) -> Vec<Vec<Vec<f64>>> {
    let mut faces = Vec::new();
    for m in 0..8 {
        let s: Vec<f64> = (0..3)
            .map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let mut poly: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut e = vec![0.0; 3];
                e[i] = s[i];
                e
            })
            .collect();
        for a in cone.normals() {
            poly = clip_polygon(&poly, a);
            if poly.len() < 3 {
                break;
            }
        }
        if poly.len() >= 3 {
            faces.push(poly);
        }
    }
    faces
}

/// Angles of `dirs` shifted into `[lo, hi]`.
fn angles_in(dirs: &[Vec<f64>], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for d in dirs {
        let mut t = sphere::angle_of(d);
        while t > lo {
            t -= 2.0 * PI;
        }
        while t < hi {
            if t > lo {
                out.push(t);
            }
            t += 2.0 * PI;
        }
    }
    out
}

/// Deterministic `∫_{S^{n-1} ∩ Σ} g(u) du` for `n ∈ {2, 3}`; `kinks` are
/// directions where `g` may be non-smooth (used as breakpoints in the plane).
pub fn cap_integral<G>(cone: &ConvexCone, g: G, kinks: &[Vec<f64>], tol: Tolerance) -> Integral
where
    G: Fn(&[f64]) -> f64,
{
    match cone.dim() {
        2 => {
            let (lo, hi) = cone.arc().expect("planar cone");
            let breaks = angles_in(kinks, lo, hi);
            integrate_1d(|t| g(&[t.cos(), t.sin()]), lo, hi, &breaks, tol)
        }
        3 => {
            let h = 1.0 / 3f64.sqrt();
            let tris: Vec<Triangle> = cap_faces(cone).iter().flat_map(|f| fan(f)).collect();
            integrate_triangles(
                |p: &[f64; 3]| {
                    let r = norm(p);
                    g(&scale(p, 1.0 / r)) * h / (r * r * r)
                },
                tris,
                tol,
            )
        }
        n => panic!("deterministic cap integration is available for n = 2, 3, not {n}"),
    }
}

/// Monte Carlo `∫_{S^{n-1} ∩ Σ} g(u) du` with uniform directions.
pub fn cap_integral_mc<G>(cone: &ConvexCone, g: G, samples: usize, seed: u64) -> (f64, f64)
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let n = cone.dim();
    let area = sphere::sphere_area(n);
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let u = crate::rng::unit_vector(rng, n);
        if cone.contains(&u) {
            g(&u)
        } else {
            0.0
        }
    });
    (area * m, area * se)
}

/// Uniform point in a triangle.
pub fn sample_triangle<R: Rng>(rng: &mut R, t: &Triangle) -> Vec<f64> {
    let r1: f64 = rng.gen::<f64>().sqrt();
    let r2: f64 = rng.gen();
    (0..3)
        .map(|k| (1.0 - r1) * t[0][k] + r1 * (1.0 - r2) * t[1][k] + r1 * r2 * t[2][k])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::new(1e-11, 1e-15, 100_000)
    }

    #[test]
    fn cap_areas() {
        let full = ConvexCone::full_space(3).unwrap();
        let r = cap_integral(&full, |_| 1.0, &[], tol());
        assert!((r.value - 4.0 * PI).abs() < 1e-9, "{}", r.value);
        let oct = ConvexCone::orthant(3).unwrap();
        let r = cap_integral(&oct, |_| 1.0, &[], tol());
        assert!((r.value - PI / 2.0).abs() < 1e-10);
        // ∫_{octant cap} u_3 du = π/4
        let r = cap_integral(&oct, |u| u[2], &[], tol());
        assert!((r.value - PI / 4.0).abs() < 1e-10);
        let cone = ConvexCone::polyhedral(vec![vec![1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0]]).unwrap();
        let r = cap_integral(&cone, |_| 1.0, &[], tol());
        // dihedral wedge of opening π/2: one quarter of the sphere
        assert!((r.value - PI).abs() < 1e-10);
    }

    #[test]
    fn planar_cap() {
        let half = ConvexCone::half_space(&[0.0, 1.0]).unwrap();
        let r = cap_integral(&half, |u| u[1], &[], tol());
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let oct = ConvexCone::orthant(3).unwrap();
        let a = cap_integral_mc(&oct, |_| 1.0, 100_000, 3);
        let b = cap_integral_mc(&oct, |_| 1.0, 100_000, 3);
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!((a.0 - PI / 2.0).abs() < 4.0 * a.1);
    }

    #[test]
    fn segment_clipping() {
        let q = ConvexCone::orthant(2).unwrap();
        let s = clip_segment(&[-1.0, 1.0], &[1.0, 1.0], &q).unwrap();
        assert!((s.0 - 0.5).abs() < 1e-15 && (s.1 - 1.0).abs() < 1e-15);
        assert!(clip_segment(&[-1.0, 1.0], &[-1.0, 2.0], &q).is_none());
        assert!(lies_on_boundary(&[vec![0.0, 1.0], vec![0.0, 2.0]], &q));
    }
}
