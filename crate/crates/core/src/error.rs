use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh size {0} does not divide 1 evenly")]
    InvalidMeshSize(f64),

    #[error("degenerate triangle {id} (signed area {area:e})")]
    DegenerateTriangle { id: usize, area: f64 },

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("triangle id {0} out of range")]
    UnknownTriangle(usize),

    #[error("unknown example id {0}")]
    UnknownExample(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nonlinear law overflow at argument {0}")]
    Overflow(f64),

    #[error("unsupported quadrature order {0}")]
    UnsupportedQuadrature(usize),

    #[error("function bound to mesh {found}, expected mesh {expected}")]
    GenerationMismatch { expected: u64, found: u64 },

    #[error("linear solver breakdown after {iterations} iterations (relative residual {residual:e})")]
    LinearSolverBreakdown { iterations: usize, residual: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (last increment {last_step:e})")]
    NewtonDiverged { iterations: usize, last_step: f64 },

    #[error("adaptive loop aborted at iteration {}: {source}", partial.records.len())]
    AdaptiveAborted {
        source: Box<Error>,
        partial: Box<crate::adapt::AdaptiveRun>,
    },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
