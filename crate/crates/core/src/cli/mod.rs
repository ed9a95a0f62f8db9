//! Experiment runner behind the `coneiso` binary.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::abp::{
    amgm_chain_check, contact_set, contact_svg, inclusion_check, sample_wulff_points,
    solve_neumann, MaskedGrid, INCLUSION_C,
};
use crate::error::{Error, Result};
use crate::gauge::restricted_gauge;
use crate::isoperimetry::{perturbation_search, quotient, search_candidate};
use crate::lifting::{lifted_quotient_convergence, lifted_volume, LiftedCone};
use crate::measure::{per_vol_identity_check, QuadratureSpec};
use crate::weights::{catalog, check_concavity, controls, Verdict};
use crate::wirtinger::{wirtinger_eigenvalue, SectorDensity};

pub use config::{ExperimentConfig, Scenario};
pub use report::{num, Report};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CONEISO_THREADS";

/// Errors below this are round-off; no convergence order is read off them.
const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed = 0,
    Violation = 1,
    Failure = 2,
}

/// Files written by [`run`].
#[derive(Clone, Debug)]
pub struct Written {
    pub report: Report,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Compute the report of `scenario` without touching the file system.
pub fn execute(scenario: Scenario, cfg: &ExperimentConfig) -> Result<Report> {
    match scenario {
        Scenario::Identity => identity(cfg),
        Scenario::Quotient => quotient_scenario(cfg),
        Scenario::Search => search(cfg),
        Scenario::Abp => abp(cfg),
        Scenario::Wirtinger => wirtinger(cfg),
        Scenario::Lift => lift(cfg),
        Scenario::Catalog => catalog_list(cfg),
    }
}

/// Run a scenario and write `<case_id>.csv` (and `.svg`) into `out`.
pub fn run(
    scenario: Scenario,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<Written> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None if scenario == Scenario::Catalog => ExperimentConfig::empty(),
        None => {
            return Err(Error::config(
                "--config",
                format!("the '{scenario}' scenario needs a config file"),
            ))
        }
    };
    cfg.finalize(scenario, seed)?;
    let report = execute(scenario, &cfg)?;
    fs::create_dir_all(out)?;
    let stem = file_stem(&report.case_id);
    let csv = out.join(format!("{stem}.csv"));
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    fs::write(&csv, buf)?;
    let svg = match &report.svg {
        Some(s) => {
            let p = out.join(format!("{stem}.svg"));
            fs::write(&p, s)?;
            Some(p)
        }
        None => None,
    };
    Ok(Written { report, csv, svg })
}

fn file_stem(case_id: &str) -> String {
    case_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn identity(cfg: &ExperimentConfig) -> Result<Report> {
    let cone = cfg.require_cone()?;
    let w = cfg.require_weight()?;
    let h = cfg.gauge()?;
    let r = per_vol_identity_check(w, &h, cone, &cfg.quadrature)?;
    let case = cfg.case_id(Scenario::Identity);
    let mut rep = Report::new(
        "identity",
        &case,
        cfg.seed(),
        &[
            "weight",
            "gauge",
            "perimeter",
            "d_times_volume",
            "relative_gap",
            "tolerance",
            "pass",
        ],
    );
    let rel_err = r.lhs.relative_error() + r.rhs.relative_error();
    let tol = cfg.identity.tolerance.max(3.0 * rel_err);
    let pass = r.relative_gap <= tol;
    rep.push(
        &case,
        format!("{} | {}", r.lhs.method, r.rhs.method),
        rel_err,
        vec![
            w.tag().into(),
            h.describe(),
            num(r.lhs.value),
            num(r.rhs.value),
            num(r.relative_gap),
            num(tol),
            pass.to_string(),
        ],
    );
    rep.failed = !pass;
    rep.summary = format!(
        "P = {}, D·w(W∩Σ) = {}, gap {:.3e}",
        r.lhs.value, r.rhs.value, r.relative_gap
    );
    Ok(rep)
}

fn quotient_scenario(cfg: &ExperimentConfig) -> Result<Report> {
    let cone = cfg.require_cone()?;
    let w = cfg.require_weight()?;
    let h = cfg.gauge()?;
    let e = cfg.region(&h)?;
    let r = quotient(&e, w, &h, cone, &cfg.quadrature)?;
    let case = cfg.case_id(Scenario::Quotient);
    let mut rep = Report::new(
        "quotient",
        &case,
        cfg.seed(),
        &[
            "region",
            "perimeter",
            "volume",
            "quotient",
            "sharp_constant",
            "sharp_error",
            "margin",
            "violation",
        ],
    );
    let err = r.quotient_error + r.sharp_error;
    let violation = r.quotient < r.sharp_constant - 3.0 * err;
    rep.push(
        &case,
        method_of(&cfg.quadrature),
        r.quotient_error,
        vec![
            e.describe(),
            num(r.perimeter.value),
            num(r.volume.value),
            num(r.quotient),
            num(r.sharp_constant),
            num(r.sharp_error),
            num(r.margin),
            violation.to_string(),
        ],
    );
    rep.failed = violation;
    rep.summary = format!("Q = {}, Q* = {}", r.quotient, r.sharp_constant);
    Ok(rep)
}

fn method_of(q: &QuadratureSpec) -> String {
    match q.method {
        crate::measure::QuadratureMethod::Deterministic => {
            format!("deterministic(rel_tol={})", q.rel_tol)
        }
        crate::measure::QuadratureMethod::MonteCarlo { samples, .. } => {
            format!("monte_carlo(n={samples})")
        }
    }
}

fn search(cfg: &ExperimentConfig) -> Result<Report> {
    let cone = cfg.require_cone()?;
    let w = cfg.require_weight()?;
    let h = cfg.gauge()?;
    let s = &cfg.search;
    let seed = cfg.seed();
    let r = perturbation_search(
        w,
        &h,
        cone,
        &s.perturbation,
        s.trials,
        seed,
        &cfg.quadrature,
    )?;
    let case = cfg.case_id(Scenario::Search);
    let mut rep = Report::new(
        "search",
        &case,
        seed,
        &[
            "trial",
            "candidate",
            "quotient",
            "sharp_constant",
            "margin",
            "violation",
            "inconclusive",
        ],
    );
    for t in &r.trials {
        rep.push(
            format!("{case}#{}", t.trial),
            method_of(&cfg.quadrature),
            t.error,
            vec![
                t.trial.to_string(),
                t.candidate.clone(),
                num(t.quotient),
                num(r.sharp_constant),
                num(t.margin),
                t.violation.to_string(),
                t.inconclusive.clone().unwrap_or_default(),
            ],
        );
    }
    rep.failed = !r.violations.is_empty();
    let inconclusive = r.trials.iter().filter(|t| t.inconclusive.is_some()).count();
    rep.summary = format!(
        "{} trials, {} violations, {} inconclusive, min Q = {} ({}), Q* = {}",
        r.trials.len(),
        r.violations.len(),
        inconclusive,
        r.min_quotient,
        r.argmin,
        r.sharp_constant
    );
    if cone.dim() == 2 {
        let mut shapes = vec![(
            "Wulff sector".to_string(),
            report::outline(
                &crate::measure::RegionRep::wulff(h.clone(), 1.0)?,
                cone,
                report::OUTLINE_POINTS,
            ),
        )];
        let mut picks: Vec<usize> = r.argmin_trial.into_iter().collect();
        picks.extend(
            r.violations
                .iter()
                .copied()
                .filter(|v| Some(*v) != r.argmin_trial)
                .take(4),
        );
        for i in picks {
            let (region, label) = search_candidate(&h, cone, &s.perturbation, s.trials, seed, i);
            if let Ok(e) = region {
                shapes.push((
                    format!("trial {i}: {label}"),
                    report::outline(&e, cone, report::OUTLINE_POINTS),
                ));
            }
        }
        rep.svg = Some(report::outlines_svg(cone, &shapes));
    }
    Ok(rep)
}

fn abp(cfg: &ExperimentConfig) -> Result<Report> {
    let cone = cfg.require_cone()?;
    let w = cfg.require_weight()?;
    let h = cfg.gauge()?;
    let h0 = if cone.is_full_space() {
        h.clone()
    } else {
        restricted_gauge(&h, cone)?
    };
    let e = cfg.region(&h)?;
    let a = &cfg.abp;
    if a.spacings.is_empty() || a.spacings.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::config(
            "abp.spacings",
            "need at least one positive spacing",
        ));
    }
    let case = cfg.case_id(Scenario::Abp);
    let seed = cfg.seed();
    let mut rep = Report::new(
        "abp",
        &case,
        seed,
        &[
            "h",
            "cells",
            "b",
            "b_discrete",
            "residual",
            "iterations",
            "linf_error",
            "order",
            "contact_nodes",
            "coverage",
            "worst_miss",
            "chain_det",
            "chain_amgm",
            "chain_weighted",
            "chain_holds",
        ],
    );
    let mut failed = false;
    let mut prev: Option<(f64, f64)> = None;
    let mut last_svg = None;
    let mut notes = Vec::new();
    for (k, &hs) in a.spacings.iter().enumerate() {
        let grid = Arc::new(MaskedGrid::new(&e, cone, hs)?);
        let sol = solve_neumann(grid.clone(), &e, w, &h0, cone, &cfg.quadrature)?;
        let gamma = contact_set(&sol.field);
        let pts = sample_wulff_points(
            &h0,
            cone,
            INCLUSION_C * hs,
            a.inclusion_samples,
            seed.wrapping_add(k as u64),
        );
        let inc = inclusion_check(&sol.field, &gamma, &pts);
        let chain = amgm_chain_check(&sol.field, &gamma, w, cone, sol.b);
        let err = if a.reference_parabola {
            sol.field
                .linf_error(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>())
        } else {
            f64::NAN
        };
        let order = match prev {
            Some((hp, ep)) if err.is_finite() && ep.max(err) > ROUNDOFF_FLOOR && err > 0.0 => {
                (ep / err).ln() / (hp / hs).ln()
            }
            _ => f64::NAN,
        };
        prev = Some((hs, err));
        let inc_ok =
            inc.samples > 0 && inc.covered == inc.samples && inc.worst_miss <= INCLUSION_C * hs;
        failed |= !inc_ok || !chain.holds();
        rep.push(
            format!("{case}@h={hs}"),
            "cut_cell_finite_volume+jacobi_pcg",
            (sol.b - sol.b_discrete).abs(),
            vec![
                num(hs),
                grid.len().to_string(),
                num(sol.b),
                num(sol.b_discrete),
                num(sol.residual),
                sol.iterations.to_string(),
                num(err),
                num(order),
                gamma.len().to_string(),
                num(inc.fraction),
                num(inc.worst_miss),
                num(chain.max_violation[0]),
                num(chain.max_violation[1]),
                num(chain.max_violation[2]),
                chain.holds().to_string(),
            ],
        );
        notes.push(format!(
            "h={hs}: b={:.6}, coverage {:.4}",
            sol.b, inc.fraction
        ));
        if grid.dim() == 2 {
            last_svg = Some(contact_svg(&sol.field, &gamma)?);
        }
    }
    rep.failed = failed;
    rep.summary = notes.join("; ");
    rep.svg = last_svg;
    Ok(rep)
}

fn wirtinger(cfg: &ExperimentConfig) -> Result<Report> {
    use config::WirtingerCase as C;
    let sec = cfg
        .wirtinger
        .as_ref()
        .ok_or_else(|| Error::config("wirtinger", "missing section"))?;
    if sec.cases.is_empty() {
        return Err(Error::config("wirtinger.cases", "no cases"));
    }
    let case = cfg.case_id(Scenario::Wirtinger);
    let mut rep = Report::new(
        "wirtinger",
        &case,
        cfg.seed(),
        &[
            "density",
            "beta",
            "alpha",
            "nodes",
            "lambda1",
            "threshold",
            "satisfies",
        ],
    );
    let mut bad = 0;
    for (k, c) in sec.cases.iter().enumerate() {
        let s = match c {
            C::Constant { beta, nodes } => SectorDensity::constant(*beta, *nodes),
            C::SinPower { alpha, nodes } => SectorDensity::sin_power(*alpha, *nodes),
            C::Weight { nodes } => SectorDensity::from_weight(cfg.require_weight()?, *nodes),
        }
        .map_err(|e| Error::config(format!("wirtinger.cases[{k}]"), e.to_string()))?;
        let fine = wirtinger_eigenvalue(&s)?;
        // second-order discretization: Richardson estimate from half the nodes
        let coarse =
            wirtinger_eigenvalue(&s.with_nodes((s.nodes() / 2).max(crate::wirtinger::MIN_NODES))?)?;
        let est = (fine.lambda1 - coarse.lambda1).abs() / 3.0;
        if !fine.satisfies {
            bad += 1;
        }
        rep.push(
            format!("{case}#{k}"),
            "p1_fem_generalized_eigen",
            est,
            vec![
                fine.tag.clone(),
                num(fine.beta),
                num(fine.alpha),
                s.nodes().to_string(),
                num(fine.lambda1),
                num(fine.threshold),
                fine.satisfies.to_string(),
            ],
        );
    }
    rep.failed = bad > 0;
    rep.summary = format!(
        "{} cases, {} below the 1 + α threshold",
        sec.cases.len(),
        bad
    );
    Ok(rep)
}

fn lift(cfg: &ExperimentConfig) -> Result<Report> {
    let sec = cfg
        .lift
        .as_ref()
        .ok_or_else(|| Error::config("lift", "missing section"))?;
    if sec.epsilons.is_empty() {
        return Err(Error::config("lift.epsilons", "empty"));
    }
    let w = cfg.require_weight()?;
    let h = cfg.gauge()?;
    let e = cfg.region(&h)?;
    let seed = cfg.seed();
    let l = LiftedCone::new(w.clone(), sec.epsilons[0])
        .map_err(|e| Error::config("weight", e.to_string()))?;
    let case = cfg.case_id(Scenario::Lift);
    let mut rep = Report::new(
        "lift",
        &case,
        seed,
        &[
            "quantity",
            "epsilon",
            "lifted",
            "predicted_or_normalized",
            "target",
            "relative_error",
        ],
    );
    let vol = lifted_volume(&e, &l, &QuadratureSpec::monte_carlo(sec.samples, seed))?;
    rep.push(
        format!("{case}#volume"),
        format!("monte_carlo(n={})", sec.samples),
        vol.lifted_error,
        vec![
            "volume".into(),
            num(l.epsilon()),
            num(vol.lifted),
            num(vol.predicted),
            num(vol.predicted),
            num(vol.relative_gap),
        ],
    );
    let rows =
        lifted_quotient_convergence(&e, &l, &sec.epsilons, sec.samples, seed).map_err(|err| {
            match err {
                Error::InvalidParameters(m) => Error::config("lift.epsilons", m),
                other => other,
            }
        })?;
    for r in &rows {
        rep.push(
            format!("{case}#eps={}", r.epsilon),
            format!("monte_carlo(n={})+cylindrical_factorization", sec.samples),
            r.normalized_error,
            vec![
                "normalized_quotient".into(),
                num(r.epsilon),
                num(r.lifted_quotient),
                num(r.normalized_quotient),
                num(r.target),
                num(r.relative_error),
            ],
        );
    }
    let last = rows.last().expect("non-empty");
    let vol_ok = vol.sigmas <= 3.0;
    let q_ok = last.relative_error <= sec.tolerance;
    rep.failed = !(vol_ok && q_ok);
    rep.summary = format!(
        "volume {:.2}σ from prediction; normalized quotient at ε={} off by {:.3}%",
        vol.sigmas,
        last.epsilon,
        100.0 * last.relative_error
    );
    Ok(rep)
}

/// Concavity verdicts for the reference catalog and the two controls.
pub fn catalog_list(cfg: &ExperimentConfig) -> Result<Report> {
    let samples = cfg.catalog.samples;
    let seed = cfg.seed();
    let case = cfg.case_id(Scenario::Catalog);
    let mut rep = Report::new(
        "catalog",
        &case,
        seed,
        &[
            "tag",
            "dim",
            "degree",
            "cone",
            "expected",
            "verdict",
            "midpoint_violations",
            "max_relative_eigenvalue",
        ],
    );
    let mut mismatches = Vec::new();
    for e in catalog().into_iter().chain(controls()) {
        let r = check_concavity(&e.weight, samples, seed)?;
        let expected = if e.admissible {
            Verdict::Admissible
        } else {
            Verdict::Inadmissible
        };
        if r.verdict != expected {
            mismatches.push(e.tag.clone());
        }
        rep.push(
            format!("{case}:{}", e.tag),
            "sampled_hessian+midpoint",
            1.0 / samples as f64,
            vec![
                e.tag.clone(),
                e.weight.dim().to_string(),
                num(e.weight.alpha()),
                format!("{:?}", e.weight.cone().kind()),
                expected.as_str().into(),
                r.verdict.as_str().into(),
                r.midpoint_violations.to_string(),
                num(r.max_relative_eigenvalue),
            ],
        );
    }
    rep.failed = !mismatches.is_empty();
    rep.summary = if mismatches.is_empty() {
        format!("{} entries, all verdicts as expected", rep.rows.len())
    } else {
        format!("unexpected verdicts for {}", mismatches.join(", "))
    };
    Ok(rep)
}
