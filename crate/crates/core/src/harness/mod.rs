//! Payoff-matrix construction and the evaluation experiments.

pub mod config;
pub mod cross_eval;
pub mod generalization;
pub mod matrix;
pub mod online;
pub mod report;

pub use config::{ExperimentConfig, SeedRange, VariantOptions};
pub use cross_eval::{cross_evaluate, simulate_cross_evaluation, CrossEntry, CrossEvaluation};
pub use generalization::{generalization_experiment, GeneralizationReport, GeneralizationRow};
pub use matrix::{build_matrix, MatrixBuild, Population};
pub use online::{
    online_experiment, pure_opponent_sweep, CurvePoint, OnlineReport, OpponentKind, PureTrial,
};

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}
