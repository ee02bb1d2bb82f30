//! The scalar and vector updates of one accelerated iteration.

use super::schedule::MemoryEntry;
use super::SolverError;

/// Nonnegative root of `Lα² + (γ_k − μ − S)α − γ_k = 0`, clamped to `[0, 1]`.
pub fn compute_alpha(gamma_k: f64, s: f64, mu: f64, lipschitz: f64) -> Result<f64, SolverError> {
    if gamma_k == 0.0 && s == 0.0 && mu == 0.0 {
        return Err(SolverError::DegenerateAlpha);
    }
    let b = mu + s - gamma_k;
    let disc = (b * b + 4.0 * lipschitz * gamma_k).sqrt();
    // pick the cancellation-free form of the positive root
    let alpha = if b >= 0.0 {
        (b + disc) / (2.0 * lipschitz)
    } else {
        2.0 * gamma_k / (disc - b)
    };
    Ok(alpha.clamp(0.0, 1.0))
}

/// `γ_{k+1} = (1 − α)γ_k + α(μ + S)`
pub fn advance_gamma(gamma_k: f64, alpha: f64, s: f64, mu: f64) -> f64 {
    (1.0 - alpha) * gamma_k + alpha * (mu + s)
}

/// `y_k = (γ_{k+1} x + α γ_k v + α² Σ β γ_i v_i) / (γ_{k+1} + α γ_k + α² Σ β γ_i)`
pub fn compute_y(
    x: &[f64],
    v: &[f64],
    memory: &[MemoryEntry],
    gamma_k: f64,
    gamma_next: f64,
    alpha: f64,
) -> Result<Vec<f64>, SolverError> {
    let a2 = alpha * alpha;
    let s: f64 = memory.iter().map(MemoryEntry::weight).sum();
    let den = gamma_next + alpha * gamma_k + a2 * s;
    if !(den > 0.0) {
        return Err(SolverError::DegenerateY);
    }
    let (cx, cv) = (gamma_next, alpha * gamma_k);
    let mut y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| cx * xi + cv * vi).collect();
    for e in memory {
        let c = a2 * e.weight();
        if c != 0.0 {
            for (yi, vi) in y.iter_mut().zip(&e.v) {
                *yi += c * vi;
            }
        }
    }
    y.iter_mut().for_each(|yi| *yi /= den);
    Ok(y)
}

/// `x_{k+1} = y − h ∇f(y)`
pub fn gradient_step(y: &[f64], grad: &[f64], step: f64) -> Vec<f64> {
    y.iter().zip(grad).map(|(yi, gi)| yi - step * gi).collect()
}

/// `v_{k+1} = ((1 − α)γ_k v + α(μ y − ∇f(y) + Σ β γ_i v_i)) / γ_{k+1}`
///
/// This is the usual recursion with the `1/μ` inside and `μ` outside cancelled,
/// so it stays finite for tiny `μ`.
#[allow(clippy::too_many_arguments)]
pub fn advance_v(
    v: &[f64],
    y: &[f64],
    grad: &[f64],
    memory: &[MemoryEntry],
    gamma_k: f64,
    gamma_next: f64,
    alpha: f64,
    mu: f64,
) -> Result<Vec<f64>, SolverError> {
    if !(gamma_next > 0.0) {
        return Err(SolverError::DegenerateGamma(gamma_next));
    }
    let cv = (1.0 - alpha) * gamma_k;
    let mut acc: Vec<f64> = y.iter().zip(grad).map(|(yi, gi)| mu * yi - gi).collect();
    for e in memory {
        let w = e.weight();
        if w != 0.0 {
            for (ai, vi) in acc.iter_mut().zip(&e.v) {
                *ai += w * vi;
            }
        }
    }
    Ok(v
        .iter()
        .zip(&acc)
        .map(|(vi, ai)| (cv * vi + alpha * ai) / gamma_next)
        .collect())
}
