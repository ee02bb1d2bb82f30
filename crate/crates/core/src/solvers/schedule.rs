use std::collections::VecDeque;

use log::warn;
use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaKind {
    /// No memory: FGM.
    Zero,
    /// `β_{0,k} = 1`.
    FirstTerm,
    /// `β_{k−1,k} = min(1, μ/γ_{k−1})`.
    LastTerm,
    /// The last `w` scans with a common weight, as large as feasibility allows.
    Window(usize),
}

impl BetaKind {
    pub fn tag(&self) -> String {
        match self {
            BetaKind::Zero => "zero".into(),
            BetaKind::FirstTerm => "first".into(),
            BetaKind::LastTerm => "last".into(),
            BetaKind::Window(w) => format!("window{w}"),
        }
    }
}

/// Rule producing `β_{i,k}`. With `clamp` set, weights that break
/// `Σ β_{i,k} γ_i ≤ min(γ_k, μ)` are scaled down onto the bound; otherwise the
/// step fails with [`SolverError::InfeasibleMemory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub kind: BetaKind,
    pub clamp: bool,
}

impl BetaSchedule {
    pub fn new(kind: BetaKind) -> Self {
        BetaSchedule { kind, clamp: true }
    }

    /// How many past scans must be retained.
    pub fn retention(&self) -> usize {
        match self.kind {
            BetaKind::Zero => 0,
            BetaKind::FirstTerm | BetaKind::LastTerm => 1,
            BetaKind::Window(w) => w,
        }
    }

    /// Whether the scan built at iteration `index` must be retained.
    pub(crate) fn keeps(&self, index: usize) -> bool {
        match self.kind {
            BetaKind::Zero => false,
            BetaKind::FirstTerm => index == 0,
            BetaKind::LastTerm | BetaKind::Window(_) => true,
        }
    }

    /// Weights for iteration `k` given `γ_k`, `μ` and the retained scans.
    pub fn weights(
        &self,
        k: usize,
        gamma_k: f64,
        mu: f64,
        history: &VecDeque<PastScan>,
    ) -> Result<Weights, SolverError> {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        match self.kind {
            BetaKind::Zero => {}
            BetaKind::FirstTerm => {
                if k >= 1 {
                    if let Some(s) = history.iter().find(|s| s.index == 0) {
                        entries.push((0, 1.0));
                        debug_assert_eq!(s.index, 0);
                    }
                }
            }
            BetaKind::LastTerm => {
                if k >= 1 {
                    if let Some(s) = history.iter().find(|s| s.index == k - 1) {
                        let beta = if s.gamma > 0.0 { (mu / s.gamma).min(1.0) } else { 1.0 };
                        entries.push((s.index, beta));
                    }
                }
            }
            BetaKind::Window(w) => {
                let lo = k.saturating_sub(w);
                let window: Vec<&PastScan> = history.iter().filter(|s| s.index >= lo && s.index < k).collect();
                let total: f64 = window.iter().map(|s| s.gamma).sum();
                let bound = gamma_k.min(mu);
                let beta = if total > 0.0 { (bound / total).min(1.0) } else { 1.0 };
                entries.extend(window.iter().map(|s| (s.index, beta)));
            }
        }

        let gamma_of = |i: usize| history.iter().find(|s| s.index == i).map(|s| s.gamma).unwrap_or(0.0);
        let sum: f64 = entries.iter().map(|&(i, b)| b * gamma_of(i)).sum();
        let bound = gamma_k.min(mu);
        let mut clamped = false;
        if sum > bound {
            let excess = sum - bound;
            if excess > 1e-9 * bound.max(f64::MIN_POSITIVE) {
                warn!("memory weights exceed min(gamma_k, mu) at k={k} by {excess:e}");
            }
            if !self.clamp {
                return Err(SolverError::InfeasibleMemory { k, sum, bound });
            }
            let s = if sum > 0.0 { bound / sum } else { 0.0 };
            for e in entries.iter_mut() {
                e.1 *= s;
            }
            clamped = true;
        }
        let sum = entries.iter().map(|&(i, b)| b * gamma_of(i)).sum::<f64>().min(bound.max(0.0));
        Ok(Weights {
            entries,
            sum,
            bound,
            clamped,
        })
    }
}

/// A previously built scanning quadratic `(γ_i, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PastScan {
    pub index: usize,
    pub gamma: f64,
    pub v: Vec<f64>,
}

/// Weights for one iteration: `(i, β_{i,k})` pairs, `S = Σ β_{i,k} γ_i`, and the
/// feasibility bound `min(γ_k, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub entries: Vec<(usize, f64)>,
    pub sum: f64,
    pub bound: f64,
    pub clamped: bool,
}

/// A weighted memory term `β_{i,k} (γ_i/2)‖x − v_i‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub index: usize,
    pub gamma: f64,
    pub v: Vec<f64>,
    pub beta: f64,
}

impl MemoryEntry {
    pub fn weight(&self) -> f64 {
        self.beta * self.gamma
    }
}
