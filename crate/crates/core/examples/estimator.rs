//! Residual indicators and data oscillation of a discrete solution.
//!
//! Prints the largest indicators and writes `indicators.csv` to the directory
//! given as the first argument (default: current directory).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use afem::assembly::FeFunction;
use afem::estimator::compute_indicators;
use afem::problem::ProblemSpec;
use afem::solver::{newton_solve, ADAPTIVE_EPS, DEFAULT_MAX_ITER};
use anyhow::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let spec = ProblemSpec::example(2)?;
    let mesh = spec.initial_mesh(0.1)?;
    let (u, _) = newton_solve(&mesh, &spec, &FeFunction::zeros(&mesh), ADAPTIVE_EPS, DEFAULT_MAX_ITER)?;
    let field = compute_indicators(&mesh, &spec, &u)?;
    println!("eta^2 = {:.6e}, osc^2 = {:.6e} over {} triangles", field.eta_sq_sum(), field.osc_sq_sum(), mesh.n_triangles());

    let mut order: Vec<usize> = (0..mesh.n_triangles()).collect();
    order.sort_by(|&a, &b| field.eta_sq[b].total_cmp(&field.eta_sq[a]));
    println!("largest indicators:");
    for &t in &order[..8] {
        let [a, b, c] = mesh.triangle_points(t);
        let (cx, cy) = ((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        println!("  T{t:<5} centroid ({cx:+.3}, {cy:+.3})  eta^2 = {:.4e}  osc^2 = {:.4e}", field.eta_sq[t], field.osc_sq[t]);
    }
    field.write_csv(BufWriter::new(File::create(out.join("indicators.csv"))?))?;
    Ok(())
}
