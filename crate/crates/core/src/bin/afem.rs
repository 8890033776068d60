use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::time::Instant;

use afem::adapt::{read_run_csv, AdaptiveConfig};
use afem::bench::{
    divisions_for, fit_rate, reference_solve_with, run_experiment, ExperimentConfig, ReferenceSolution,
    REFERENCE_DIVISIONS,
};
use afem::mesh::{read_mesh, RefineMode};
use afem::problem::ProblemSpec;
use afem::solver::{ADAPTIVE_EPS, REFERENCE_EPS};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "afem", about = "Adaptive P1 finite elements for nonlinear boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adaptive run plus uniform baseline, compared against a reference solution.
    Run {
        #[arg(long)]
        example: u32,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        #[arg(long, default_value = "all-edges")]
        mode: RefineMode,
        #[arg(long)]
        out: PathBuf,
        /// Reference mesh size.
        #[arg(long, default_value_t = 1.0 / REFERENCE_DIVISIONS as f64)]
        h_ref: f64,
        /// Precomputed reference from `afem reference`.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// TOML problem description overriding the example data.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_k: usize,
        #[arg(long, default_value_t = 1.0)]
        window_decades: f64,
        /// Also write the final mesh and solution as legacy VTK.
        #[arg(long)]
        vtk: bool,
    },
    /// Solve on a fine uniform mesh and save the nodal values.
    Reference {
        #[arg(long)]
        example: u32,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit convergence rates to a run CSV.
    Rates {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        window_decades: f64,
    },
    /// Validate a mesh file.
    MeshCheck { file: PathBuf },
}

fn load_spec(example: u32, config: Option<&PathBuf>) -> Result<ProblemSpec> {
    match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(ProblemSpec::from_config_str(&text)?)
        }
        None => Ok(ProblemSpec::example(example)?),
    }
}

fn solve_reference(spec: &ProblemSpec, h: f64) -> Result<ReferenceSolution> {
    let n = divisions_for(h)?;
    let start = Instant::now();
    let r = reference_solve_with(spec, n, REFERENCE_EPS, &mut |n, it| {
        eprintln!("reference h=1/{n}: {it} Newton iterations ({:.1?})", start.elapsed());
    })?;
    Ok(r)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { example, theta, tau, mode, out, h_ref, reference, config, max_k, window_decades, vtk } => {
            let spec = load_spec(example, config.as_ref())?;
            let reference = match reference {
                Some(path) => {
                    let f = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                    ReferenceSolution::read(BufReader::new(f), &spec)?
                }
                None => solve_reference(&spec, h_ref)?,
            };
            let adaptive = AdaptiveConfig { theta, tau, eps_newton: ADAPTIVE_EPS, mode, max_k };
            let mut cfg = ExperimentConfig::new(example, adaptive);
            cfg.window_decades = window_decades;
            cfg.write_vtk = vtk;
            let start = Instant::now();
            let report = run_experiment(&spec, &reference, cfg)?;
            report.write_outputs(&out)?;
            print!("{}", report.summary());
            eprintln!("finished in {:.1?}; outputs in {}", start.elapsed(), out.display());
        }
        Command::Reference { example, h, out } => {
            let spec = ProblemSpec::example(example)?;
            let r = solve_reference(&spec, h)?;
            r.write(BufWriter::new(File::create(&out)?))?;
            println!("reference h=1/{} written to {} (|u|_H1 = {:.12})", r.divisions, out.display(), r.h1_norm);
        }
        Command::Rates { csv, window_decades } => {
            let f = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let records = read_run_csv(BufReader::new(f))?;
            let est: Vec<_> = records.iter().map(|r| (r.dofs as f64, r.eta_sq_sum.sqrt())).collect();
            let fit = fit_rate(&est, window_decades)?;
            println!("estimator_slope = {:.4} over dofs {}..{} ({} points)", fit.slope, fit.n_min, fit.n_max, fit.points);
            let err: Vec<_> = records.iter().filter_map(|r| r.h1_err_sq.map(|e| (r.dofs as f64, e.sqrt()))).collect();
            if !err.is_empty() {
                let fit = fit_rate(&err, window_decades)?;
                println!("h1_error_slope = {:.4} over dofs {}..{} ({} points)", fit.slope, fit.n_min, fit.n_max, fit.points);
            }
        }
        Command::MeshCheck { file } => {
            let f = File::open(&file).with_context(|| format!("opening {}", file.display()))?;
            let mesh = read_mesh(BufReader::new(f))?;
            if let Err(e) = mesh.validate_conformity() {
                bail!("{}: {e}", file.display());
            }
            println!(
                "{}: conforming, {} vertices, {} triangles, area {:.12}, shape regularity {:.4}",
                file.display(),
                mesh.n_vertices(),
                mesh.n_triangles(),
                mesh.total_area(),
                mesh.shape_regularity()
            );
        }
    }
    Ok(())
}
