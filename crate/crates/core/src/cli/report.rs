//! CSV and SVG emission.

use std::f64::consts::PI;
use std::io::Write;

use crate::cone::ConvexCone;
use crate::error::Result;
use crate::measure::RegionRep;

/// Version of the CSV layout, written in the leading comment line.
pub const CSV_SCHEMA: u32 = 1;

/// Columns every row starts with.
pub const COMMON_COLUMNS: [&str; 4] = ["case_id", "seed", "method", "error_estimate"];

/// A table of results plus the verdict of the scenario.
#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: String,
    pub case_id: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Whether a mathematical check failed.
    pub failed: bool,
    pub summary: String,
    pub svg: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub case_id: String,
    pub method: String,
    pub error_estimate: f64,
    pub values: Vec<String>,
}

/// Shortest decimal that round-trips, so equal values print identically.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

impl Report {
    pub fn new(scenario: &str, case_id: &str, seed: u64, columns: &[&str]) -> Self {
        Report {
            scenario: scenario.into(),
            case_id: case_id.into(),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            failed: false,
            summary: String::new(),
            svg: None,
        }
    }

    pub fn push(
        &mut self,
        case_id: impl Into<String>,
        method: impl Into<String>,
        error_estimate: f64,
        values: Vec<String>,
    ) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row {
            case_id: case_id.into(),
            method: method.into(),
            error_estimate,
            values,
        });
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# coneiso-csv schema={CSV_SCHEMA} scenario={}",
            self.scenario
        )?;
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = COMMON_COLUMNS
            .iter()
            .copied()
            .chain(self.columns.iter().map(|s| s.as_str()))
            .collect();
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.case_id.clone(),
                self.seed.to_string(),
                r.method.clone(),
                num(r.error_estimate),
            ];
            rec.extend(r.values.iter().cloned());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `PASS`/`FAIL` line for the terminal.
    pub fn verdict(&self) -> String {
        format!(
            "{} {} {}: {}",
            if self.failed { "FAIL" } else { "PASS" },
            self.scenario,
            self.case_id,
            self.summary
        )
    }
}

/// Boundary polyline of `E ∩ Σ` in the plane (closed through the vertex for
/// proper cones when `E` is star-shaped about the origin).
pub fn outline(e: &RegionRep, cone: &ConvexCone, points: usize) -> Vec<[f64; 2]> {
    let (lo, hi) = cone.arc().unwrap_or((0.0, 2.0 * PI));
    let full = cone.is_full_space();
    let radial = |rho: &dyn Fn(&[f64]) -> f64| {
        let mut out = Vec::with_capacity(points + 2);
        if !full {
            out.push([0.0, 0.0]);
        }
        for k in 0..=points {
            let t = lo + (hi - lo) * k as f64 / points as f64;
            let u = [t.cos(), t.sin()];
            let r = rho(&u);
            out.push([r * u[0], r * u[1]]);
        }
        if !full {
            out.push([0.0, 0.0]);
        }
        out
    };
    match e {
        RegionRep::WulffSector { gauge, scale } => radial(&|u| scale * gauge.wulff_radius(u)),
        RegionRep::StarSet(s) => radial(&|u| s.rho(u)),
        RegionRep::Ball { center, radius } => (0..=points)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / points as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect(),
        RegionRep::Polytope(p) => {
            let mut v: Vec<[f64; 2]> = p.vertices().iter().map(|x| [x[0], x[1]]).collect();
            if let Some(first) = v.first().copied() {
                v.push(first);
            }
            v
        }
    }
}

/// Overlay of planar outlines; the first one is drawn as the reference.
pub fn outlines_svg(cone: &ConvexCone, shapes: &[(String, Vec<[f64; 2]>)]) -> String {
    let mut x0 = f64::INFINITY;
    let mut y0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for p in shapes
        .iter()
        .flat_map(|s| s.1.iter())
        .chain(std::iter::once(&[0.0, 0.0]))
    {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let s = 400.0 / (x1 - x0).max(y1 - y0).max(1e-12);
    let tx = |x: f64| 20.0 + (x - x0) * s;
    let ty = |y: f64| 20.0 + (y1 - y) * s;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n",
        40.0 + (x1 - x0) * s,
        40.0 + (y1 - y0) * s
    );
    if let Some((lo, hi)) = cone.arc().filter(|_| !cone.is_full_space()) {
        let r = 2.0 * (x1 - x0).max(y1 - y0);
        for t in [lo, hi] {
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
                tx(0.0),
                ty(0.0),
                tx(r * t.cos()),
                ty(r * t.sin())
            ));
        }
    }
    let colors = [
        "#222222", "#cc0000", "#3465a4", "#4e9a06", "#f57900", "#75507b",
    ];
    for (k, (label, pts)) in shapes.iter().enumerate() {
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!(
                    "{}{:.2} {:.2}",
                    if i == 0 { "M" } else { "L" },
                    tx(p[0]),
                    ty(p[1])
                )
            })
            .collect();
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"><title>{}</title></path>\n",
            d.join(" "),
            colors[k % colors.len()],
            if k == 0 { 2 } else { 1 },
            escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Number of boundary points used for SVG outlines.
pub const OUTLINE_POINTS: usize = 720;
