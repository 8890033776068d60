//! A problem read from a TOML description: the Butler-Volmer law with an
//! asymmetric exponent, a single cathode segment and an insulated top side.

use afem::adapt::{adaptive_loop, AdaptiveConfig};
use afem::mesh::BoundaryLabel;
use afem::problem::ProblemSpec;
use anyhow::Result;

const CONFIG: &str = r#"
example = 2
c3 = 3.0
c4 = 6.0
gamma_c = [[0.0, -1.0, 0.0, 0.0]]
gamma_0 = [[-1.0, 1.0, 1.0, 1.0]]
"#;

fn main() -> Result<()> {
    let spec = ProblemSpec::from_config_str(CONFIG)?;
    let mesh = spec.initial_mesh(0.2)?;
    for label in [BoundaryLabel::GammaC, BoundaryLabel::GammaA, BoundaryLabel::Gamma0] {
        let length: f64 = mesh.boundary_edges(label).map(|e| mesh.edge_length(e)).sum();
        println!("{:>7}: length {length:.3}", label.as_str());
    }
    let config = AdaptiveConfig { theta: 0.3, tau: 1e-2, ..AdaptiveConfig::default() };
    let run = adaptive_loop(&spec, mesh, config)?;
    let last = run.records.last().unwrap();
    println!("k = {}: {} dofs, eta^2 = {:.4e}, coercivity {:.3}", last.k, last.dofs, last.eta_sq_sum, spec.law.coercivity());
    Ok(())
}
