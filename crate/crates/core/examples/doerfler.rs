//! Dörfler marking of the indicators of a coarse solution for several bulk
//! parameters.

use afem::adapt::doerfler_mark;
use afem::assembly::FeFunction;
use afem::estimator::{compute_indicators, global_indicator};
use afem::problem::ProblemSpec;
use afem::solver::{newton_solve, ADAPTIVE_EPS, DEFAULT_MAX_ITER};
use anyhow::Result;

fn main() -> Result<()> {
    let spec = ProblemSpec::example(1)?;
    let mesh = spec.initial_mesh(0.1)?;
    let (u, _) = newton_solve(&mesh, &spec, &FeFunction::zeros(&mesh), ADAPTIVE_EPS, DEFAULT_MAX_ITER)?;
    let field = compute_indicators(&mesh, &spec, &u)?;
    let total = field.eta_sq_sum();
    println!("{} triangles, eta^2 = {total:.6e}", mesh.n_triangles());
    println!("theta  marked  captured");
    for theta in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
        let marked = doerfler_mark(&field.eta_sq, theta)?;
        let (captured, _) = global_indicator(&field, Some(&marked));
        println!("{theta:>5}  {:>6}  {:>8.4}", marked.len(), captured / total);
    }
    Ok(())
}
