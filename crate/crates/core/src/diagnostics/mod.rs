//! Estimating-sequence bookkeeping and runtime certification of the
//! convergence bounds against solver traces.
//!
//! Hard checks are algebraic identities that must hold up to rounding
//! (`λ_k = ∏(1 − α_i)`, `γ_{k+1} = Lα_k²`, memory feasibility, the descent
//! inequality of the gradient step). Soft checks compare observed quantities
//! against analytic bounds and are reported without affecting exit status.

mod bounds;
mod certify;
mod tracker;

pub use bounds::{iteration_lower_bounds, lemma4_bounds, theorem1_bound, IterationBounds, GapBound};
pub use certify::{
    certify_run, check_identities, run_certified, write_certification_csv, BoundReport, CertificationSummary,
    CertifiedRun, IdentityViolations, CERTIFICATION_CSV_HEADER,
};
pub use tracker::{phi_star_next, phi_star_terms, EstimatingTracker, PhiStarInputs, TrackerRow};

use thiserror::Error;

use crate::solvers::SolverError;

/// Additive slack `1e-8 · (1 + |bound|)` used by every bound comparison.
pub fn certification_slack(bound: f64) -> f64 {
    1e-8 * (1.0 + bound.abs())
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("scanning function has nonpositive curvature gamma_k - S = {curvature:e}")]
    FlatScanningFunction { curvature: f64 },
    #[error("eps = {eps:e} is outside the validity domain: need eps <= mu*R0^2/2 = {limit:e}")]
    ValidityDomain { eps: f64, limit: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
