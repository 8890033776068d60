//! Adaptive P1 finite elements for steady diffusion with a nonlinear
//! electrode boundary law.
//!
//! The crate solves
//!
//! ```text
//!   -div(sigma grad u) = 0              in the domain
//!    sigma du/dn       = 0              on the insulated boundary
//!    sigma du/dn       = g              on the anodes
//!    sigma du/dn       = -f(u)          on the cathodes
//! ```
//!
//! with `f` either the cubic law `C1 t + C2 t^3` or the Butler-Volmer law
//! `C5 (exp(C3 t) - exp(-C4 t))`, and drives the
//! SOLVE -> ESTIMATE -> MARK -> REFINE loop on triangle meshes refined by
//! newest vertex bisection.
//!
//! Modules follow the stages of that loop:
//!
//! - [`mesh`]: conforming triangulations, bisection refinement, point location, IO
//! - [`problem`]: nonlinear laws, anode flux data and the two L-shape experiments
//! - [`assembly`]: quadrature, residual, Jacobian and energy functional
//! - [`solver`]: Newton iteration, preconditioned CG and mesh-to-mesh transfer
//! - [`estimator`]: residual error indicators and data oscillation
//! - [`adapt`]: Dörfler marking and the adaptive driver
//! - [`bench`]: reference solutions, error measurement, rate fits and reports

pub mod adapt;
pub mod assembly;
pub mod bench;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
