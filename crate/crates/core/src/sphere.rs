//! Deterministic direction sets on `S^{n-1}` and sup-evaluation over the sphere.

use std::f64::consts::PI;

use crate::linalg::{axpy, dot, normalized, tangent_basis};

/// Default number of sampled directions for sup-type evaluations.
pub fn default_direction_count(n: usize) -> usize {
    if n <= 3 {
        4096
    } else {
        32768
    }
}

/// Radical inverse of `i` in base `b` (van der Corput).
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Low-discrepancy point set on `S^{n-1}`, `n ∈ {2, 3, 4}`.
///
/// * `n = 2`: equispaced angles `2πk/m`.
/// * `n = 3`: Fibonacci lattice.
/// * `n = 4`: Halton triples pushed through the uniform unit-quaternion map.
pub fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        4 => (0..count as u64)
            .map(|k| {
                let u1 = radical_inverse(k + 1, 2);
                let u2 = radical_inverse(k + 1, 3);
                let u3 = radical_inverse(k + 1, 5);
                let a = (1.0 - u1).sqrt();
                let b = u1.sqrt();
                let (s2, c2) = (2.0 * PI * u2).sin_cos();
                let (s3, c3) = (2.0 * PI * u3).sin_cos();
                vec![a * s2, a * c2, b * s3, b * c3]
            })
            .collect(),
        _ => panic!("direction sets are provided for n in 2..=4, got {n}"),
    }
}

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n),
    }
}

/// Lebesgue measure of the unit ball of `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    sphere_area(k) / k as f64
}

/// `Γ(n/2)` for positive integers `n`.
fn gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Result of a sup search over directions.
#[derive(Clone, Debug)]
pub struct SphereMax {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Maximize `f` over `S^{n-1}`: best of `samples`, then local refinement.
///
/// In the plane the refinement is a golden-section search on the angle; in
/// higher dimensions it is a shrinking compass search in the tangent plane,
/// which also copes with kinks of piecewise-linear gauges.
pub fn maximize<F>(n: usize, samples: &[Vec<f64>], f: F) -> SphereMax
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = f64::NEG_INFINITY;
    let mut arg = samples[0].clone();
    for d in samples {
        let v = f(d);
        if v > best {
            best = v;
            arg = d.clone();
        }
    }
    if n == 2 {
        let spacing = 2.0 * PI / samples.len() as f64;
        let t0 = arg[1].atan2(arg[0]);
        let g = |t: f64| f(&[t.cos(), t.sin()]);
        let (t, v) = golden_max(&g, t0 - spacing, t0 + spacing, 80);
        if v > best {
            best = v;
            arg = vec![t.cos(), t.sin()];
        }
        return SphereMax {
            value: best,
            argmax: arg,
        };
    }
    // compass search
    let spacing = (sphere_area(n) / samples.len() as f64).powf(1.0 / (n as f64 - 1.0));
    let mut step = spacing;
    for _ in 0..200 {
        let basis = tangent_basis(&arg);
        let mut improved = false;
        for b in &basis {
            for s in [step, -step] {
                let cand = normalized(&axpy(&arg, s, b));
                let v = f(&cand);
                if v > best {
                    best = v;
                    arg = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-13 {
                break;
            }
        }
    }
    SphereMax {
        value: best,
        argmax: arg,
    }
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let candidates = [(a, g(a)), (c, fc), (d, fd), (b, g(b))];
    candidates.into_iter().fold(
        (a, f64::NEG_INFINITY),
        |acc, (t, v)| if v > acc.1 { (t, v) } else { acc },
    )
}

/// Golden-section minimization; thin wrapper over [`golden_max`].
pub fn golden_min<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (t, v) = golden_max(&|x| -g(x), a, b, iters);
    (t, -v)
}

/// Angle of a planar vector in `[0, 2π)`.
pub fn angle_of(v: &[f64]) -> f64 {
    let t = v[1].atan2(v[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Spherical gradient of `f` at the unit vector `u` by central differences in
/// the tangent plane.
pub fn tangent_gradient<F: Fn(&[f64]) -> f64>(f: &F, u: &[f64], h: f64) -> Vec<f64> {
    let basis = tangent_basis(u);
    let mut g = vec![0.0; u.len()];
    for b in &basis {
        let p = normalized(&axpy(u, h, b));
        let m = normalized(&axpy(u, -h, b));
        // geodesic distance between p and m is 2·atan(h)
        let d = (f(&p) - f(&m)) / (2.0 * h.atan());
        for (gi, bi) in g.iter_mut().zip(b) {
            *gi += d * bi;
        }
    }
    debug_assert!(dot(&g, u).abs() < 1e-6 * (1.0 + crate::linalg::norm(&g)));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn directions_are_unit() {
        for n in 2..=4 {
            for d in directions(n, 257) {
                assert!((norm(&d) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn areas_and_ball_volumes() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((sphere_area(6) - PI.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn fibonacci_mean_is_small() {
        let ds = directions(3, 4096);
        let mut m = [0.0; 3];
        for d in &ds {
            for i in 0..3 {
                m[i] += d[i] / ds.len() as f64;
            }
        }
        assert!(norm(&m) < 1e-3);
    }

    #[test]
    fn maximize_linear_functional() {
        for n in 2..=4 {
            let target: Vec<f64> = normalized(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
            let samples = directions(n, 2048);
            let m = maximize(n, &samples, |u| dot(u, &target));
            assert!((m.value - 1.0).abs() < 1e-10, "n={n} value={}", m.value);
        }
    }
}
