//! Reference solutions, error against them, rate fits and the experiment
//! driver behind the `afem` binary.

mod experiment;
mod plot;
mod rates;
mod reference;

use std::sync::OnceLock;

pub use experiment::{
    adaptive_with_reference, contraction_search, effectivity_spread, flux_norm, run_experiment, snapshot_dofs,
    snapshot_error, uniform_baseline, Contraction, ExperimentConfig, ExperimentReport, UniformRecord,
    CONTRACTION_START, EFFECTIVITY_START, INITIAL_H, UNIFORM_LEVELS,
};
pub use plot::{loglog_svg, Series};
pub use rates::{fit_rate, RateFit, MIN_POINTS};
pub use reference::{divisions_for, reference_solve, reference_solve_with, transfer, ReferenceSolution};

/// Default reference resolution, `h = 1/512`.
pub const REFERENCE_DIVISIONS: usize = 512;
pub const THREADS_ENV: &str = "AFEM_THREADS";

/// Worker count from `AFEM_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Pool shared by all parallel loops; sized by `AFEM_THREADS` when set.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = configured_threads() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("thread pool")
    })
}
