//! Newton iteration for both L-shape problems on a uniform mesh, showing
//! the quadratic decay of the H1 increment and the monotone energy.

use afem::assembly::{FeFunction, h1_norm_sq};
use afem::problem::ProblemSpec;
use afem::solver::{newton_solve, ADAPTIVE_EPS, DEFAULT_MAX_ITER};
use anyhow::Result;

fn main() -> Result<()> {
    for example in [1, 2] {
        let spec = ProblemSpec::example(example)?;
        let mesh = spec.initial_mesh(0.05)?;
        let u0 = FeFunction::zeros(&mesh);
        let (u, report) = newton_solve(&mesh, &spec, &u0, ADAPTIVE_EPS, DEFAULT_MAX_ITER)?;
        println!("example {example}: {} dofs, {} Newton steps, {} CG iterations", mesh.n_vertices(), report.iterations, report.inner_iterations.iter().sum::<usize>());
        for (i, e) in report.energies.iter().enumerate() {
            println!("  J(u_{i}) = {e:.12}");
        }
        println!("  last |delta|_H1 = {:.3e}", report.final_step_h1);
        println!("  |u_h|_H1 = {:.6}, range [{:.4}, {:.4}]", h1_norm_sq(&mesh, &u.coeffs).sqrt(), min(&u.coeffs), max(&u.coeffs));
    }
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
