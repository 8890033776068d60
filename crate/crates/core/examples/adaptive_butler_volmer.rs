//! Adaptive loop for the Butler-Volmer problem with cathodes at the
//! re-entrant corner and an oscillating anode flux. Single-edge bisection
//! keeps the mesh growth per step small.
//!
//! Writes `final.vtk` with the solution and the last indicators to the
//! directory given as the first argument (default: current directory).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use afem::adapt::{adaptive_loop_with, AdaptiveConfig};
use afem::bench::INITIAL_H;
use afem::mesh::{write_vtk, RefineMode};
use afem::problem::ProblemSpec;
use anyhow::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let spec = ProblemSpec::example(2)?;
    let config = AdaptiveConfig { theta: 0.3, tau: 5e-3, mode: RefineMode::SingleEdge, ..AdaptiveConfig::default() };

    let mut last_eta = Vec::new();
    let run = adaptive_loop_with(&spec, spec.initial_mesh(INITIAL_H)?, config, &mut |snap| {
        let corner = snap.mesh.vertices.iter().position(|p| p.x == 0.0 && p.y == 0.0).unwrap();
        println!(
            "k = {:>3}: {:>6} dofs, eta^2 = {:.4e}, u(0,0) = {:+.6}",
            snap.k,
            snap.mesh.n_vertices(),
            snap.indicators.eta_sq_sum(),
            snap.solution.coeffs[corner]
        );
        last_eta = snap.indicators.eta_sq.clone();
        Ok(None)
    })?;

    if let (Some(mesh), Some(u)) = (&run.final_mesh, &run.final_solution) {
        let file = BufWriter::new(File::create(out.join("final.vtk"))?);
        write_vtk(mesh, &[("u", &u.coeffs)], &[("eta_sq", &last_eta)], file)?;
    }
    Ok(())
}
