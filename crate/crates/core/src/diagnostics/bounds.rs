use serde::{Deserialize, Serialize};

use super::DiagnosticsError;

/// Exponential and polynomial upper bounds on `λ_k` for the memory-augmented
/// method, with `S = Σ β_{i,k} γ_i`:
///
/// `2μ / (L (e^t − e^{−t})²)` with `t = ((k + 1)/2) √((μ + S)/L)`, and
/// `2μ / ((μ + S)(k + 1)²)`.
pub fn lemma4_bounds(k: usize, mu: f64, lipschitz: f64, s: f64) -> (f64, f64) {
    let kp1 = (k + 1) as f64;
    let t = 0.5 * kp1 * ((mu + s) / lipschitz).sqrt();
    let two_sinh = 2.0 * t.sinh();
    let exponential = 2.0 * mu / (lipschitz * two_sinh * two_sinh);
    let polynomial = 2.0 * mu / ((mu + s) * kp1 * kp1);
    (exponential, polynomial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    /// `λ_k (f₀ − f* + γ₀R₀²/2) − (1 − λ_k) ψ_k(x*)`
    pub full: f64,
    /// The same with the `ψ_k(x*) ≥ 0` term dropped.
    pub relaxed: f64,
}

/// Upper bound on `f(x_k) − f*`.
pub fn theorem1_bound(lambda: f64, f0: f64, f_star: f64, gamma0: f64, r0: f64, psi_at_xstar: f64) -> GapBound {
    let relaxed = lambda * (f0 - f_star + 0.5 * gamma0 * r0 * r0);
    GapBound {
        full: relaxed - (1.0 - lambda) * psi_at_xstar,
        relaxed,
    }
}

/// Iteration counts sufficient (or necessary, for `lower`) to reach
/// `f(x_k) − f* ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationBounds {
    /// `√(L/(μ + S)) (ln(μR₀²/(2ε)) + ln 5)`
    pub sfgm: f64,
    /// The previous bound with `S = μ`.
    pub sfgm_asymptotic: f64,
    /// `√(L/μ) (ln(μR₀²/(2ε)) + ln(23/3))`
    pub fgm: f64,
    /// Lower complexity bound `((√(L/μ) − 1)/4) ln(μR₀²/(2ε))`.
    pub lower: f64,
}

impl IterationBounds {
    pub fn fgm_over_sfgm_asymptotic(&self) -> f64 {
        self.fgm / self.sfgm_asymptotic
    }
}

pub fn iteration_lower_bounds(
    lipschitz: f64,
    mu: f64,
    s: f64,
    r0: f64,
    eps: f64,
) -> Result<IterationBounds, DiagnosticsError> {
    if !(lipschitz > 0.0 && mu > 0.0 && mu <= lipschitz) {
        return Err(DiagnosticsError::InvalidInput(format!(
            "need 0 < mu <= L, got mu = {mu}, L = {lipschitz}"
        )));
    }
    if !(s >= 0.0 && r0 >= 0.0 && eps > 0.0 && s.is_finite() && r0.is_finite()) {
        return Err(DiagnosticsError::InvalidInput(format!(
            "need S >= 0, R0 >= 0, eps > 0; got S = {s}, R0 = {r0}, eps = {eps}"
        )));
    }
    let limit = 0.5 * mu * r0 * r0;
    if eps > limit {
        return Err(DiagnosticsError::ValidityDomain { eps, limit });
    }
    let log_term = (limit / eps).ln();
    let ln5 = 5f64.ln();
    Ok(IterationBounds {
        sfgm: (lipschitz / (mu + s)).sqrt() * (log_term + ln5),
        sfgm_asymptotic: (lipschitz / (2.0 * mu)).sqrt() * (log_term + ln5),
        fgm: (lipschitz / mu).sqrt() * (log_term + (23.0f64 / 3.0).ln()),
        lower: 0.25 * ((lipschitz / mu).sqrt() - 1.0) * log_term,
    })
}
