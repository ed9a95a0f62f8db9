use std::f64::consts::PI;

use super::*;
use crate::measure::{Polytope, StarSet};

fn q() -> QuadratureSpec {
    QuadratureSpec::deterministic(1e-10)
}

fn model(h: f64) -> (Arc<MaskedGrid>, NeumannSolution) {
    let quad = ConvexCone::orthant(2).unwrap();
    let w = Weight::monomial(vec![1.0, 1.0], quad.clone()).unwrap();
    let g = crate::gauge::restricted_gauge(&Gauge::euclidean(2), &quad).unwrap();
    let e = RegionRep::ball(vec![0.0, 0.0], 1.0).unwrap();
    let grid = Arc::new(MaskedGrid::new(&e, &quad, h).unwrap());
    let sol = solve_neumann(grid.clone(), &e, &w, &g, &quad, &q()).unwrap();
    (grid, sol)
}

fn half_sq(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v * v).sum::<f64>()
}

#[test]
fn model_case_is_reproduced() {
    for k in [16.0, 32.0, 64.0] {
        let (grid, sol) = model(1.0 / k);
        assert!(grid.is_mixed());
        assert!((sol.b - 4.0).abs() < 1e-3, "b = {}", sol.b);
        assert!((sol.b_discrete - 4.0).abs() < 1e-10);
        assert!(sol.residual < 1e-8);
        // face fluxes of a quadratic are exact, so only round-off remains
        assert!(sol.field.linf_error(half_sq) < 1e-11);
    }
}

#[test]
fn quartic_manufactured_solution_converges_at_second_order() {
    // u = |x|⁴/4 with w = x₁x₂: w⁻¹ div(w∇u) = 6|x|², ∂u/∂ν = 1 on the arc
    let quad = ConvexCone::orthant(2).unwrap();
    let w = Weight::monomial(vec![1.0, 1.0], quad.clone()).unwrap();
    let e = RegionRep::ball(vec![0.0, 0.0], 1.0).unwrap();
    let mut errs = Vec::new();
    for k in [16.0, 32.0, 64.0] {
        let grid = Arc::new(MaskedGrid::new(&e, &quad, 1.0 / k).unwrap());
        let src = |x: &[f64]| 6.0 * (x[0] * x[0] + x[1] * x[1]);
        let bnd =
            |x: &[f64], nu: &[f64]| (x[0] * x[0] + x[1] * x[1]) * (x[0] * nu[0] + x[1] * nu[1]);
        let sol = solve_flux_problem(grid, &w, &quad, &src, &bnd).unwrap();
        errs.push(
            sol.field
                .linf_error(|x| 0.25 * (x[0] * x[0] + x[1] * x[1]).powi(2)),
        );
    }
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    assert!(o1 >= 1.7 && o2 >= 1.7, "errors {errs:?}, orders {o1} {o2}");
}

#[test]
fn unit_disk_and_square_constants() {
    let plane = ConvexCone::full_space(2).unwrap();
    let one = Weight::constant(plane.clone());
    let eu = Gauge::euclidean(2);
    let disk = RegionRep::ball(vec![0.0, 0.0], 1.0).unwrap();
    let grid = Arc::new(MaskedGrid::new(&disk, &plane, 1.0 / 32.0).unwrap());
    assert!(!grid.is_mixed());
    let sol = solve_neumann(grid, &disk, &one, &eu, &plane, &q()).unwrap();
    assert!((sol.b - 2.0).abs() < 1e-9);
    assert!(sol.field.linf_error(half_sq) < 1e-3);

    let sq = RegionRep::Polytope(
        Polytope::polygon(vec![
            vec![1.0, 1.0],
            vec![2.0, 1.0],
            vec![2.0, 2.0],
            vec![1.0, 2.0],
        ])
        .unwrap(),
    );
    let grid = Arc::new(MaskedGrid::new(&sq, &plane, 1.0 / 32.0).unwrap());
    let sol = solve_neumann(grid, &sq, &one, &eu, &plane, &q()).unwrap();
    // perimeter 4 over area 1
    assert!((sol.b - 4.0).abs() < 1e-9, "{}", sol.b);
    assert!((sol.b_discrete - 4.0).abs() < 1e-9, "{}", sol.b_discrete);
    assert!(sol.residual <= 1e-8);
}

#[test]
fn contact_set_examples() {
    let (grid, sol) = model(1.0 / 32.0);
    let gamma = contact_set(&sol.field);
    let interior = grid
        .cells()
        .iter()
        .enumerate()
        .filter(|(i, c)| c.interior && sol.field.gradient(*i).is_some())
        .count();
    assert_eq!(gamma.len(), interior);

    let concave = ScalarField::from_fn(grid.clone(), |x| -half_sq(x)).unwrap();
    assert!(contact_set(&concave).is_empty());

    // |x₁| on a box: planes of slope p₁ ∈ (-1, 1) touch only at the crease
    let plane = ConvexCone::full_space(2).unwrap();
    let bx = RegionRep::Polytope(
        Polytope::polygon(vec![
            vec![-1.0, -0.5],
            vec![1.0, -0.5],
            vec![1.0, 0.5],
            vec![-1.0, 0.5],
        ])
        .unwrap(),
    );
    let h = 1.0 / 32.0;
    let grid = Arc::new(MaskedGrid::new(&bx, &plane, h).unwrap());
    let crease = ScalarField::from_fn(grid.clone(), |x| x[0].abs()).unwrap();
    for p1 in [-0.6, -0.2, 0.0, 0.3, 0.8] {
        let i = legendre_minimizer(&crease, &[p1, 0.0]).unwrap();
        assert!(grid.cell(i).center[0].abs() <= h, "p₁ = {p1}");
    }
}

#[test]
fn inclusion_examples() {
    let h = 1.0 / 32.0;
    let (_, sol) = model(h);
    let gamma = contact_set(&sol.field);
    let quad = ConvexCone::orthant(2).unwrap();
    let eu = Gauge::euclidean(2);
    let pts = sample_wulff_points(&eu, &quad, 2.0 * h, 400, 7);
    assert_eq!(pts.len(), 400);
    let r = inclusion_check(&sol.field, &gamma, &pts);
    assert_eq!(r.covered, r.samples);
    assert!(r.worst_miss <= 2.0 * h);

    let outside = vec![vec![1.2 * (PI / 5.0).cos(), 1.2 * (PI / 5.0).sin()]];
    let r = inclusion_check(&sol.field, &gamma, &outside);
    assert_eq!(r.covered, 0);
    assert!(r.worst_miss > 2.0 * h);

    // a non-convex star domain in the plane
    let plane = ConvexCone::full_space(2).unwrap();
    let one = Weight::constant(plane.clone());
    let s = StarSet::analytic(
        &plane,
        "1+0.3cos5θ",
        Arc::new(|u: &[f64]| 1.0 + 0.3 * (5.0 * u[1].atan2(u[0])).cos()),
        None,
        true,
    )
    .unwrap();
    let e = RegionRep::StarSet(s);
    let grid = Arc::new(MaskedGrid::new(&e, &plane, 1.0 / 48.0).unwrap());
    let sol = solve_neumann(grid, &e, &one, &eu, &plane, &q()).unwrap();
    let gamma = contact_set(&sol.field);
    let pts = sample_wulff_points(&eu, &plane, 2.0 / 48.0, 200, 3);
    let r = inclusion_check(&sol.field, &gamma, &pts);
    assert_eq!(r.covered, r.samples, "{:?}", r.misses.first());
}

#[test]
fn chain_examples() {
    let h = 1.0 / 32.0;
    let quad = ConvexCone::orthant(2).unwrap();
    let (_, sol) = model(h);
    let gamma = contact_set(&sol.field);
    let w = Weight::monomial(vec![1.0, 1.0], quad.clone()).unwrap();
    let r = amgm_chain_check(&sol.field, &gamma, &w, &quad, sol.b);
    assert!(r.holds(), "{:?}", r.max_violation);
    assert!(r.checked > 500);
    assert!(
        r.max_violation.iter().all(|v| *v < 1e-6),
        "{:?}",
        r.max_violation
    );
    let wulff = 0.125;
    assert!(r.image_measure <= r.chain_bound * (1.0 + CHAIN_C * h));
    assert!(
        wulff <= r.chain_bound * (1.0 + CHAIN_C * h),
        "{} {}",
        wulff,
        r.chain_bound
    );

    let plane = ConvexCone::full_space(2).unwrap();
    let one = Weight::constant(plane.clone());
    let eu = Gauge::euclidean(2);
    let disk = RegionRep::ball(vec![0.0, 0.0], 1.0).unwrap();
    let grid = Arc::new(MaskedGrid::new(&disk, &plane, h).unwrap());
    let sol = solve_neumann(grid, &disk, &one, &eu, &plane, &q()).unwrap();
    let gamma = contact_set(&sol.field);
    let r = amgm_chain_check(&sol.field, &gamma, &one, &plane, sol.b);
    assert!(r.holds());
    assert!((r.median_amgm_ratio - 1.0).abs() < 1e-3);

    let ell = StarSet::analytic(
        &plane,
        "ellipse(2,0.6)",
        Arc::new(|u: &[f64]| 1.0 / (u[0] * u[0] / 4.0 + u[1] * u[1] / 0.36).sqrt()),
        None,
        true,
    )
    .unwrap();
    let e = RegionRep::StarSet(ell);
    let grid = Arc::new(MaskedGrid::new(&e, &plane, h).unwrap());
    let sol = solve_neumann(grid, &e, &one, &eu, &plane, &q()).unwrap();
    let gamma = contact_set(&sol.field);
    let r = amgm_chain_check(&sol.field, &gamma, &one, &plane, sol.b);
    assert!(r.holds());
    assert!(r.median_amgm_ratio < 0.99, "{}", r.median_amgm_ratio);
}

#[test]
fn three_dimensional_ball() {
    let space = ConvexCone::full_space(3).unwrap();
    let one = Weight::constant(space.clone());
    let eu = Gauge::euclidean(3);
    let ball = RegionRep::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let grid = Arc::new(MaskedGrid::new(&ball, &space, 1.0 / 8.0).unwrap());
    let vol: f64 = grid.cells().iter().map(|c| c.volume).sum();
    assert!((vol - 4.0 * PI / 3.0).abs() < 1e-2, "{vol}");
    let sol = solve_neumann(grid, &ball, &one, &eu, &space, &q()).unwrap();
    assert!((sol.b - 3.0).abs() < 1e-9);
    assert!((sol.b_discrete - 3.0).abs() < 3e-2);
    assert!(sol.field.linf_error(half_sq) < 2e-2);
}

#[test]
fn rejects_unsupported_mixed_geometry() {
    let sector = ConvexCone::sector(PI / 3.0, PI / 4.0).unwrap();
    let e = RegionRep::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!(matches!(
        MaskedGrid::new(&e, &sector, 0.05),
        Err(Error::Unsupported(_))
    ));
}
