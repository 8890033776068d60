//! Newton iteration for `G(u) = 0` with a Jacobi-preconditioned CG inner
//! solve, plus the coarse-to-fine prolongation used for warm starts.

mod cg;
mod interpolate;

pub use cg::{linear_solve, LinearSolve, DEFAULT_TOLERANCE};
pub use interpolate::interpolate;

use crate::assembly::{h1_norm_sq, Discretization, FeFunction};
use crate::mesh::Mesh;
use crate::problem::ProblemSpec;
use crate::{Error, Result};

/// Increment tolerance for adaptive solves.
pub const ADAPTIVE_EPS: f64 = 1e-7;
/// Increment tolerance for reference solves.
pub const REFERENCE_EPS: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    /// Number of Newton updates (linear solves) performed.
    pub iterations: usize,
    /// `||u^(n) - u^(n-1)||_{H^1}` of the last update.
    pub final_step_h1: f64,
    pub converged: bool,
    pub inner_iterations: Vec<usize>,
    /// `J(u^(n))` for `n = 0..=iterations`.
    pub energies: Vec<f64>,
}

impl NewtonReport {
    /// Largest energy increase over steps `n >= 1`, or 0 if monotone.
    pub fn worst_energy_increase(&self) -> f64 {
        self.energies.windows(2).skip(1).fold(0.0, |m, w| m.max(w[1] - w[0]))
    }
}

/// Newton's method from `u0`, stopping once the H1 norm of the increment
/// is at most `eps`.
pub fn newton_solve(
    mesh: &Mesh,
    spec: &ProblemSpec,
    u0: &FeFunction,
    eps: f64,
    max_iter: usize,
) -> Result<(FeFunction, NewtonReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("Newton tolerance must be positive, got {eps}")));
    }
    u0.check(mesh)?;
    let disc = Discretization::new(mesh, spec)?;
    let mut u = u0.coeffs.clone();
    let mut report = NewtonReport { energies: vec![disc.energy(&u)?], ..Default::default() };
    let mut last = f64::INFINITY;
    for n in 1..=max_iter {
        let g = disc.residual(&u)?;
        let jac = disc.jacobian(&u)?;
        let step = linear_solve(&jac, &g, DEFAULT_TOLERANCE)?;
        for (ui, di) in u.iter_mut().zip(&step.x) {
            *ui -= di;
        }
        last = h1_norm_sq(mesh, &step.x).sqrt();
        report.iterations = n;
        report.final_step_h1 = last;
        report.inner_iterations.push(step.iterations);
        if !last.is_finite() || u.iter().any(|c| !c.is_finite()) {
            return Err(Error::NewtonDiverged { iterations: n, last_step: last });
        }
        report.energies.push(disc.energy(&u)?);
        if last <= eps {
            report.converged = true;
            return Ok((FeFunction { generation: mesh.generation, coeffs: u }, report));
        }
    }
    Err(Error::NewtonDiverged { iterations: max_iter, last_step: last })
}
