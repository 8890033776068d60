//! Adaptive loop for the cubic-law problem (cathode on the left side),
//! driven by the estimator alone.
//!
//! Usage: `adaptive_cubic [theta] [out_dir]`. Writes `run.csv`.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use afem::adapt::{adaptive_loop, AdaptiveConfig};
use afem::bench::INITIAL_H;
use afem::problem::ProblemSpec;
use anyhow::{Context, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let theta: f64 = args.next().map(|s| s.parse()).transpose().context("theta")?.unwrap_or(0.3);
    let out = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let spec = ProblemSpec::example(1)?;
    let config = AdaptiveConfig { theta, ..AdaptiveConfig::default() };
    let run = adaptive_loop(&spec, spec.initial_mesh(INITIAL_H)?, config)?;
    println!("   k  triangles     dofs        eta^2  marked  newton");
    for r in &run.records {
        println!("{:>4}  {:>9}  {:>7}  {:>11.4e}  {:>6}  {:>6}", r.k, r.n_elem, r.dofs, r.eta_sq_sum, r.n_marked, r.newton_iters);
    }
    println!("stopped at k = {} (tolerance reached: {}), closure ratio {:.2}", run.final_k(), run.reached_tolerance(), run.max_closure_ratio());
    run.write_csv(BufWriter::new(File::create(out.join("run.csv"))?))?;
    Ok(())
}
