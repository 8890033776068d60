//! Adaptive versus uniform refinement against a uniform reference
//! solution: rate fits, contraction, effectivity and a log-log plot.
//!
//! Usage: `convergence_study [example] [reference divisions] [out_dir]`.
//! The default reference `h = 1/128` keeps the run short; the fitted error
//! rates flatten once the adaptive error reaches the reference error.

use std::path::PathBuf;

use afem::adapt::AdaptiveConfig;
use afem::bench::{reference_solve, run_experiment, ExperimentConfig};
use afem::problem::ProblemSpec;
use afem::solver::REFERENCE_EPS;
use anyhow::{Context, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let example: u32 = args.next().map(|s| s.parse()).transpose().context("example")?.unwrap_or(1);
    let divisions: usize = args.next().map(|s| s.parse()).transpose().context("divisions")?.unwrap_or(128);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "convergence_study".into()));

    let spec = ProblemSpec::example(example)?;
    let reference = reference_solve(&spec, divisions, REFERENCE_EPS)?;
    println!("reference h = 1/{divisions}: |u|_H1 = {:.8}", reference.h1_norm);

    let adaptive = AdaptiveConfig { tau: 1e-2, ..AdaptiveConfig::default() };
    let report = run_experiment(&spec, &reference, ExperimentConfig::new(example, adaptive))?;
    print!("{}", report.summary());
    report.write_outputs(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
