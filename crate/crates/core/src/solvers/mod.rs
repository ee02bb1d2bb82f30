//! Gradient Method, Nesterov's FGM (constant step schemes I and III) and the
//! memory-augmented accelerated method, as explicit state machines.
//!
//! The memory-augmented method keeps the FGM iterate structure but adds a
//! weighted sum of previously built scanning quadratics to the estimating
//! sequence. The weights `β_{i,k}` come from a [`BetaSchedule`] and must satisfy
//! `Σ β_{i,k} γ_i ≤ min(γ_k, μ)`. With all weights zero the method is FGM.

mod config;
mod driver;
mod schedule;
mod steps;

pub use config::{InitialCurvature, Method, SolverConfig, StoppingRule, DEFAULT_MAX_ITERS};
pub use driver::{
    peek_memory, run, run_observed, step, IterationRecord, RunOutput, SolverState, StepObserver, StepView,
};
pub use schedule::{BetaKind, BetaSchedule, MemoryEntry, PastScan, Weights};
pub use steps::{advance_gamma, advance_v, compute_alpha, compute_y, gradient_step};

use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("alpha is degenerate: gamma_k, S and mu are all zero")]
    DegenerateAlpha,
    #[error("y_k is degenerate: zero denominator")]
    DegenerateY,
    #[error("gamma_{{k+1}} = {0} is not positive")]
    DegenerateGamma(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("memory weights infeasible at k={k}: sum beta*gamma = {sum:e} > min(gamma_k, mu) = {bound:e}")]
    InfeasibleMemory { k: usize, sum: f64, bound: f64 },
    #[error("objective increased for 10 consecutive iterations ending at k={k} (f = {f:e}); the Lipschitz constant is probably too small")]
    Stall { k: usize, f: f64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
