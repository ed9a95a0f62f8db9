use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use coneiso::cli::{run, Outcome, Scenario, THREADS_ENV};

/// Numerical checks of weighted anisotropic isoperimetric inequalities in convex cones.
#[derive(Parser, Debug)]
#[command(name = "coneiso", version)]
struct Args {
    /// identity | quotient | search | abp | wirtinger | lift | catalog
    scenario: String,
    /// TOML experiment file (optional for `catalog`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and SVG files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(Outcome::Failure as u8);
    }
    let outcome = args
        .scenario
        .parse::<Scenario>()
        .and_then(|s| run(s, args.config.as_deref(), args.seed, &args.out));
    match outcome {
        Ok(w) => {
            // a closed stdout (e.g. piped into `head`) must not change the status
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", w.report.verdict());
            let _ = writeln!(out, "csv: {}", w.csv.display());
            if let Some(svg) = &w.svg {
                let _ = writeln!(out, "svg: {}", svg.display());
            }
            ExitCode::from(if w.report.failed {
                Outcome::Violation
            } else {
                Outcome::Passed
            } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Outcome::Failure as u8)
        }
    }
}
