use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::gauge::restricted_gauge;
use crate::weights::WeightKind;

fn q() -> QuadratureSpec {
    QuadratureSpec::deterministic(1e-10)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn plane() -> ConvexCone {
    ConvexCone::full_space(2).unwrap()
}

fn quadrant() -> ConvexCone {
    ConvexCone::orthant(2).unwrap()
}

fn upper() -> ConvexCone {
    ConvexCone::half_space(&[0.0, 1.0]).unwrap()
}

fn xy() -> Weight {
    Weight::monomial(vec![1.0, 1.0], quadrant()).unwrap()
}

fn x2() -> Weight {
    Weight::new(WeightKind::DistancePower, 1.0, upper(), "x2").unwrap()
}

fn unit_ball(n: usize) -> RegionRep {
    RegionRep::ball(vec![0.0; n], 1.0).unwrap()
}

#[test]
fn volume_examples() {
    let one = Weight::constant(plane());
    let v = weighted_volume(&unit_ball(2), &one, &plane(), &q()).unwrap();
    assert!(rel(v.value, PI) < 1e-9);
    let v = weighted_volume(&unit_ball(2), &xy(), &quadrant(), &q()).unwrap();
    assert!(rel(v.value, 0.125) < 1e-9);
    let v = weighted_volume(&unit_ball(2), &x2(), &upper(), &q()).unwrap();
    assert!(rel(v.value, 2.0 / 3.0) < 1e-9);
    assert!(v.error_estimate >= 0.0);
}

#[test]
fn perimeter_examples() {
    let h = Gauge::euclidean(2);
    let one = Weight::constant(plane());
    let p = weighted_perimeter(&unit_ball(2), &one, &h, &plane(), &q()).unwrap();
    assert!(rel(p.value, 2.0 * PI) < 1e-9);
    let p = weighted_perimeter(&unit_ball(2), &xy(), &h, &quadrant(), &q()).unwrap();
    assert!(rel(p.value, 0.5) < 1e-9);
    let p = weighted_perimeter(&unit_ball(2), &x2(), &h, &upper(), &q()).unwrap();
    assert!(rel(p.value, 2.0) < 1e-9);
}

#[test]
fn identity_examples() {
    let h = Gauge::euclidean(2);
    for (w, c) in [
        (Weight::constant(plane()), plane()),
        (xy(), quadrant()),
        (x2(), upper()),
    ] {
        let r = per_vol_identity_check(&w, &h, &c, &q()).unwrap();
        assert!(r.relative_gap <= 1e-6, "{w:?}: {r:?}");
    }
}

#[test]
fn off_centre_disk_with_radial_weight() {
    // ∫_{B_1((1,0))} |x| dx = 32/9 and ∫_{∂B_1((1,0))} |x| ds = 8
    let w = Weight::radial(1.0, plane()).unwrap();
    let b = RegionRep::ball(vec![1.0, 0.0], 1.0).unwrap();
    let v = weighted_volume(&b, &w, &plane(), &q()).unwrap();
    assert!(rel(v.value, 32.0 / 9.0) < 1e-8, "{v:?}");
    let p = weighted_perimeter(&b, &w, &Gauge::euclidean(2), &plane(), &q()).unwrap();
    assert!(rel(p.value, 8.0) < 1e-8, "{p:?}");
}

#[test]
fn clipped_disk_area_against_chord_integration() {
    let one = Weight::constant(quadrant());
    let (cx, cy) = (0.5, 0.3);
    let b = RegionRep::ball(vec![cx, cy], 1.0).unwrap();
    let v = weighted_volume(&b, &one, &quadrant(), &q()).unwrap();
    // oracle: composite Simpson over x of the clipped chord length
    let chord = |x: f64| {
        let s = (1.0 - (x - cx) * (x - cx)).max(0.0).sqrt();
        ((cy + s) - (cy - s).max(0.0)).max(0.0)
    };
    let m = 200_000;
    let (a, bnd) = (0.0, cx + 1.0);
    let hh = (bnd - a) / m as f64;
    let mut s = chord(a) + chord(bnd);
    for k in 1..m {
        s += chord(a + k as f64 * hh) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = s * hh / 3.0;
    assert!(rel(v.value, oracle) < 1e-6, "{} vs {oracle}", v.value);
}

#[test]
fn polygon_and_cube() {
    let sq = RegionRep::Polytope(
        Polytope::polygon(vec![
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap(),
    );
    let v = weighted_volume(&sq, &xy(), &quadrant(), &q()).unwrap();
    assert!(rel(v.value, 0.25) < 1e-10);
    let p = weighted_perimeter(&sq, &xy(), &Gauge::euclidean(2), &quadrant(), &q()).unwrap();
    assert!(rel(p.value, 1.0) < 1e-10);

    let oct = ConvexCone::orthant(3).unwrap();
    let w = Weight::monomial(vec![1.0, 1.0, 1.0], oct.clone()).unwrap();
    let cube = RegionRep::Polytope(Polytope::cuboid([0.0; 3], [1.0; 3]).unwrap());
    let v = weighted_volume(&cube, &w, &oct, &q()).unwrap();
    assert!(rel(v.value, 0.125) < 1e-10);
    let p = weighted_perimeter(&cube, &w, &Gauge::euclidean(3), &oct, &q()).unwrap();
    assert!(rel(p.value, 0.75) < 1e-10);
}

#[test]
fn octant_ball_with_product_weight() {
    // ∫_{S² ∩ octant} u₁u₂u₃ = 1/8 (Dirichlet integral), D = 6
    let oct = ConvexCone::orthant(3).unwrap();
    let w = Weight::monomial(vec![1.0, 1.0, 1.0], oct.clone()).unwrap();
    let v = weighted_volume(&unit_ball(3), &w, &oct, &q()).unwrap();
    assert!(rel(v.value, 1.0 / 48.0) < 1e-8, "{v:?}");
    let r = per_vol_identity_check(&w, &Gauge::euclidean(3), &oct, &q()).unwrap();
    assert!(rel(r.lhs.value, 0.125) < 1e-8 && r.relative_gap < 1e-8);
}

#[test]
fn ellipse_area() {
    let h = Gauge::ellipsoidal(&[vec![2.0, 0.5], vec![0.0, 1.0]]).unwrap();
    let one = Weight::constant(plane());
    let e = RegionRep::wulff(h.clone(), 1.0).unwrap();
    let v = weighted_volume(&e, &one, &plane(), &q()).unwrap();
    assert!(rel(v.value, 2.0 * PI) < 1e-9);
    let r = per_vol_identity_check(&one, &h, &plane(), &q()).unwrap();
    assert!(r.relative_gap < 1e-8);
}

#[test]
fn polygonal_wulff_shape() {
    // support gauge of the square [-1,1]²: W is the square itself
    let h = Gauge::support(vec![
        vec![1.0, 1.0],
        vec![-1.0, 1.0],
        vec![-1.0, -1.0],
        vec![1.0, -1.0],
    ])
    .unwrap();
    let w = xy();
    let e = RegionRep::wulff(h.clone(), 1.0).unwrap();
    let v = weighted_volume(&e, &w, &quadrant(), &q()).unwrap();
    assert!(rel(v.value, 0.25) < 1e-8, "{v:?}");
    let r = per_vol_identity_check(&w, &h, &quadrant(), &q()).unwrap();
    assert!(r.relative_gap < 1e-7, "{r:?}");
}

#[test]
fn scaling_laws() {
    let w = xy();
    let h = Gauge::p_norm(2, 3.0).unwrap();
    let d = w.effective_dimension();
    let regions = [
        RegionRep::wulff(h.clone(), 1.0).unwrap(),
        RegionRep::ball(vec![0.4, 0.7], 0.5).unwrap(),
        RegionRep::Polytope(
            Polytope::polygon(vec![vec![0.1, 0.2], vec![1.0, 0.0], vec![0.7, 0.9]]).unwrap(),
        ),
    ];
    for e in &regions {
        let v1 = weighted_volume(e, &w, &quadrant(), &q()).unwrap().value;
        let p1 = weighted_perimeter(e, &w, &h, &quadrant(), &q())
            .unwrap()
            .value;
        for r in [0.5, 2.0, 3.0] {
            let er = e.scaled(r);
            let v = weighted_volume(&er, &w, &quadrant(), &q()).unwrap().value;
            let p = weighted_perimeter(&er, &w, &h, &quadrant(), &q())
                .unwrap()
                .value;
            assert!(rel(v, r.powf(d) * v1) < 1e-6);
            assert!(rel(p, r.powf(d - 1.0) * p1) < 1e-6);
        }
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let h = Gauge::euclidean(2);
    let mc = QuadratureSpec::monte_carlo(400_000, 11);
    let b = RegionRep::ball(vec![0.6, 0.5], 0.8).unwrap();
    for e in [unit_ball(2), b] {
        let a = weighted_volume(&e, &xy(), &quadrant(), &q()).unwrap();
        let m = weighted_volume(&e, &xy(), &quadrant(), &mc).unwrap();
        assert!(
            (a.value - m.value).abs() <= 3.0 * (a.error_estimate + m.error_estimate),
            "{a:?} {m:?}"
        );
        let a = weighted_perimeter(&e, &xy(), &h, &quadrant(), &q()).unwrap();
        let m = weighted_perimeter(&e, &xy(), &h, &quadrant(), &mc).unwrap();
        assert!(
            (a.value - m.value).abs() <= 3.0 * (a.error_estimate + m.error_estimate),
            "{a:?} {m:?}"
        );
    }
    let cube = RegionRep::Polytope(Polytope::cuboid([0.2, -0.5, 0.1], [1.0, 1.0, 0.9]).unwrap());
    let oct = ConvexCone::orthant(3).unwrap();
    let w = Weight::monomial(vec![1.0, 0.0, 2.0], oct.clone()).unwrap();
    let a = weighted_volume(&cube, &w, &oct, &q()).unwrap();
    let m = weighted_volume(&cube, &w, &oct, &mc).unwrap();
    assert!(
        (a.value - m.value).abs() <= 3.0 * (a.error_estimate + m.error_estimate),
        "{a:?} {m:?}"
    );
}

#[test]
fn spline_star_set_circle() {
    let one = Weight::constant(plane());
    let s = StarSet::spline_2d(&plane(), "circle", vec![1.0; 64]).unwrap();
    let e = RegionRep::StarSet(s);
    assert!(rel(weighted_volume(&e, &one, &plane(), &q()).unwrap().value, PI) < 1e-9);
    let p = weighted_perimeter(&e, &one, &Gauge::euclidean(2), &plane(), &q()).unwrap();
    assert!(rel(p.value, 2.0 * PI) < 1e-9);
    let s = StarSet::spline_2d(&quadrant(), "arc", vec![1.0; 16]).unwrap();
    let v = weighted_volume(&RegionRep::StarSet(s), &xy(), &quadrant(), &q()).unwrap();
    assert!(rel(v.value, 0.125) < 1e-9);
}

#[test]
fn nested_star_sets_are_monotone() {
    let c = quadrant();
    let small =
        StarSet::analytic(&c, "a", Arc::new(|u: &[f64]| 1.0 + 0.1 * u[0]), None, true).unwrap();
    let big =
        StarSet::analytic(&c, "b", Arc::new(|u: &[f64]| 1.2 + 0.1 * u[0]), None, true).unwrap();
    let a = weighted_volume(&RegionRep::StarSet(small), &xy(), &c, &q()).unwrap();
    let b = weighted_volume(&RegionRep::StarSet(big), &xy(), &c, &q()).unwrap();
    assert!(a.value < b.value);
}

#[test]
fn restricted_gauge_never_increases_perimeter() {
    let h = Gauge::euclidean(2);
    let c = quadrant();
    let h0 = restricted_gauge(&h, &c).unwrap();
    let w = xy();
    let b = RegionRep::ball(vec![0.9, 0.2], 0.6).unwrap();
    let p = weighted_perimeter(&b, &w, &h, &c, &q()).unwrap().value;
    let p0 = weighted_perimeter(&b, &w, &h0, &c, &q()).unwrap().value;
    assert!(p0 <= p + 1e-8 && p0 < p * 0.999);
    let e = RegionRep::wulff(h.clone(), 1.0).unwrap();
    let p = weighted_perimeter(&e, &w, &h, &c, &q()).unwrap().value;
    let p0 = weighted_perimeter(&e, &w, &h0, &c, &q()).unwrap().value;
    assert!((p - p0).abs() <= 1e-8);
}

#[test]
fn mean_curvature() {
    let one = Weight::constant(plane());
    for t in [0.0f64, 1.0, 2.5] {
        let hw = generalized_mean_curvature(&unit_ball(2), &one, &[t.cos(), t.sin()]).unwrap();
        assert!((hw - 1.0).abs() < 1e-12);
    }
    // centred ball, product weight: H_w = 1/R + α/(nR)
    let r = 1.5;
    let b = RegionRep::ball(vec![0.0, 0.0], r).unwrap();
    let vals: Vec<f64> = (1..20)
        .map(|k| {
            let t = 0.5 * PI * k as f64 / 20.0;
            generalized_mean_curvature(&b, &xy(), &[t.cos(), t.sin()]).unwrap()
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    assert!(var <= 1e-8 && (mean - 2.0 / r).abs() < 1e-10);
    // for |x| on a circle through the origin ∂_ν w / w = 1/2 identically
    let w = Weight::radial(1.0, plane()).unwrap();
    let off = RegionRep::ball(vec![1.0, 0.0], 1.0).unwrap();
    for t in [0.0, 0.5 * PI, 2.0, 3.0] {
        let x = [1.0 + t.cos(), t.sin()];
        let hw = generalized_mean_curvature(&off, &w, &x).unwrap();
        assert!((hw - 1.25).abs() < 1e-12);
    }
    // a circle missing the origin does not have constant H_w
    let far = RegionRep::ball(vec![2.0, 0.0], 1.0).unwrap();
    let a = generalized_mean_curvature(&far, &w, &[3.0, 0.0]).unwrap();
    let b = generalized_mean_curvature(&far, &w, &[1.0, 0.0]).unwrap();
    assert!((a - b).abs() > 0.1);
    // smooth Wulff shape and star set agree with the sphere value
    let e = RegionRep::wulff(Gauge::euclidean(2), 2.0).unwrap();
    let hw = generalized_mean_curvature(&e, &one, &[1.0, 1.0]).unwrap();
    assert!((hw - 0.5).abs() < 1e-6);
    let s = StarSet::analytic(&plane(), "r2", Arc::new(|_| 2.0), None, true).unwrap();
    let hw = generalized_mean_curvature(&RegionRep::StarSet(s), &one, &[0.3, 1.0]).unwrap();
    assert!((hw - 0.5).abs() < 1e-6);
    let sq = RegionRep::Polytope(
        Polytope::polygon(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap(),
    );
    assert!(matches!(
        generalized_mean_curvature(&sq, &one, &[1.0, 0.5]),
        Err(Error::CurvatureUndefined(_))
    ));
}

#[test]
fn four_dimensional_monte_carlo() {
    let c = ConvexCone::full_space(4).unwrap();
    let one = Weight::constant(c.clone());
    let spec = QuadratureSpec::monte_carlo(200_000, 5);
    let v = weighted_volume(&unit_ball(4), &one, &c, &spec).unwrap();
    assert!((v.value - PI * PI / 2.0).abs() < 1e-9);
    assert!(v.method.starts_with("monte_carlo"));
}
