use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Method, SolverConfig, StoppingRule};
use super::schedule::{MemoryEntry, PastScan};
use super::steps::{advance_gamma, advance_v, compute_alpha, compute_y, gradient_step};
use super::SolverError;
use crate::linalg::{dist, norm};
use crate::oracle::{GroundTruth, Objective, OracleError};

/// Consecutive increases of `f(x_k)` that abort a run. Only increases that end
/// above `f(x₀)` count: accelerated methods ripple on ill-conditioned problems,
/// but a run with a valid `L` never climbs back over its starting value for
/// long, while a diverging one does.
pub const STALL_WINDOW: usize = 10;
/// Relative size of an increase that counts towards [`STALL_WINDOW`].
pub const STALL_TOL: f64 = 1e-6;

/// Complete iterate state of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub k: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
    pub alpha_prev: f64,
    /// Memory terms used by the most recent step.
    pub memory: Vec<MemoryEntry>,
    pub y_last: Vec<f64>,
    pub grad_last: Vec<f64>,
    pub f_last: f64,
    /// `f(x_k)`.
    pub f_x: f64,
    /// `∏ (1 − α_i)`.
    pub lambda: f64,
    /// Retained past scans `(γ_i, v_i)`, oldest first.
    pub history: VecDeque<PastScan>,
    /// Steps at which the schedule weights had to be scaled down.
    pub clamp_events: usize,
    pub gamma0: f64,
    pub lipschitz: f64,
    pub mu: f64,
    pub step_size: f64,
}

impl SolverState {
    /// Validates `config` and sets `v₀ = x₀`, `γ₀` from the config.
    pub fn new<O: Objective + ?Sized>(oracle: &O, config: &SolverConfig, x0: &[f64]) -> Result<Self, SolverError> {
        let gamma0 = config.validate(oracle)?;
        let f0 = crate::oracle::eval_value(oracle, x0)?;
        let lipschitz = oracle.lipschitz();
        Ok(SolverState {
            k: 0,
            x: x0.to_vec(),
            v: x0.to_vec(),
            gamma: if config.method == Method::Gm { 0.0 } else { gamma0 },
            alpha_prev: 0.0,
            memory: Vec::new(),
            y_last: x0.to_vec(),
            grad_last: vec![0.0; x0.len()],
            f_last: f0,
            f_x: f0,
            lambda: 1.0,
            history: VecDeque::new(),
            clamp_events: 0,
            gamma0,
            lipschitz,
            mu: oracle.strong_convexity(),
            step_size: config.step.unwrap_or(1.0 / lipschitz),
        })
    }
}

/// Everything one iteration touched, handed to a [`StepObserver`].
#[derive(Debug)]
pub struct StepView<'a> {
    pub k: usize,
    pub x: &'a [f64],
    pub v: &'a [f64],
    pub gamma: f64,
    pub memory: &'a [MemoryEntry],
    pub beta_gamma_sum: f64,
    pub alpha: f64,
    pub gamma_next: f64,
    pub y: &'a [f64],
    pub grad: &'a [f64],
    pub f_y: f64,
    pub x_next: &'a [f64],
    pub v_next: &'a [f64],
    pub f_next: f64,
    pub mu: f64,
    pub lipschitz: f64,
}

pub trait StepObserver {
    fn on_start(&mut self, _state: &SolverState) {}
    fn on_step(&mut self, _view: &StepView<'_>) {}
}

/// One row of a run trace, written after iteration `k − 1` completes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Iterations completed.
    pub k: usize,
    /// `f(x_k)`.
    pub f: f64,
    pub gap: Option<f64>,
    /// `‖∇f(y_{k−1})‖`; for the gradient method `‖∇f(x_{k−1})‖`.
    pub grad_norm: f64,
    /// `α_{k−1}`.
    pub alpha: f64,
    /// `γ_k`.
    pub gamma: f64,
    /// `λ_k`.
    pub lambda: f64,
    pub dist_to_opt: Option<f64>,
    pub wall_ns: u64,
    pub f_y: f64,
    /// `γ_{k−1}`.
    pub gamma_prev: f64,
    /// `Σ β_{i,k−1} γ_i`.
    pub beta_gamma_sum: f64,
    /// `min(γ_{k−1}, μ)`.
    pub feasibility_bound: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolverState,
    pub trace: Vec<IterationRecord>,
    /// Whether the stopping rule fired before `max_iters`.
    pub converged: bool,
}

/// Memory terms the schedule assigns at the state's current iteration,
/// without advancing anything.
pub fn peek_memory(config: &SolverConfig, state: &SolverState) -> Result<(Vec<MemoryEntry>, f64), SolverError> {
    let w = config.beta.weights(state.k, state.gamma, state.mu, &state.history)?;
    Ok((resolve_memory(&w.entries, &state.history), w.sum))
}

fn resolve_memory(entries: &[(usize, f64)], history: &VecDeque<PastScan>) -> Vec<MemoryEntry> {
    entries
        .iter()
        .filter_map(|&(index, beta)| {
            history.iter().find(|s| s.index == index).map(|s| MemoryEntry {
                index,
                gamma: s.gamma,
                v: s.v.clone(),
                beta,
            })
        })
        .collect()
}

/// Performs one iteration in place.
pub fn step<O: Objective + ?Sized>(oracle: &O, config: &SolverConfig, state: &mut SolverState) -> Result<(), SolverError> {
    step_observed(oracle, config, state, None).map(|_| ())
}

struct StepSummary {
    grad_norm: f64,
    f_y: f64,
    gamma_prev: f64,
    beta_gamma_sum: f64,
    feasibility_bound: f64,
}

fn step_observed<O: Objective + ?Sized>(
    oracle: &O,
    config: &SolverConfig,
    state: &mut SolverState,
    observer: Option<&mut (dyn StepObserver + '_)>,
) -> Result<StepSummary, SolverError> {
    match config.method {
        Method::Gm => gm_step(oracle, state, observer),
        Method::FgmCss1 | Method::FgmCss3 => fgm_step(oracle, state, observer),
        Method::Sfgm => sfgm_step(oracle, config, state, observer),
    }
}

fn check_finite(v: &[f64]) -> Result<(), SolverError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(OracleError::NonFinite { index }.into()),
        None => Ok(()),
    }
}

fn gm_step<O: Objective + ?Sized>(
    oracle: &O,
    state: &mut SolverState,
    observer: Option<&mut (dyn StepObserver + '_)>,
) -> Result<StepSummary, SolverError> {
    let mut g = vec![0.0; state.x.len()];
    let f_y = oracle.value_and_gradient(&state.x, &mut g);
    check_finite(&g)?;
    let x_next = gradient_step(&state.x, &g, state.step_size);
    let f_next = oracle.value(&x_next);
    if let Some(obs) = observer {
        obs.on_step(&StepView {
            k: state.k,
            x: &state.x,
            v: &state.x,
            gamma: 0.0,
            memory: &[],
            beta_gamma_sum: 0.0,
            alpha: 0.0,
            gamma_next: 0.0,
            y: &state.x,
            grad: &g,
            f_y,
            x_next: &x_next,
            v_next: &x_next,
            f_next,
            mu: state.mu,
            lipschitz: state.lipschitz,
        });
    }
    let summary = StepSummary {
        grad_norm: norm(&g),
        f_y,
        gamma_prev: 0.0,
        beta_gamma_sum: 0.0,
        feasibility_bound: 0.0,
    };
    state.y_last = std::mem::replace(&mut state.x, x_next);
    state.v = state.x.clone();
    state.grad_last = g;
    state.f_last = f_y;
    state.f_x = f_next;
    state.k += 1;
    Ok(summary)
}

/// Nesterov's constant step scheme: no memory terms, so the estimating
/// sequence is `γ_{k+1} = (1 − α)γ_k + αμ`.
fn fgm_step<O: Objective + ?Sized>(
    oracle: &O,
    state: &mut SolverState,
    observer: Option<&mut (dyn StepObserver + '_)>,
) -> Result<StepSummary, SolverError> {
    let (l, mu, gamma) = (state.lipschitz, state.mu, state.gamma);
    let b = mu - gamma;
    let root = (b * b + 4.0 * l * gamma).sqrt();
    let alpha = if b >= 0.0 { (b + root) / (2.0 * l) } else { 2.0 * gamma / (root - b) }.clamp(0.0, 1.0);
    let gamma_next = (1.0 - alpha) * gamma + alpha * mu;
    if !(gamma_next > 0.0) {
        return Err(SolverError::DegenerateGamma(gamma_next));
    }
    let (cx, cv) = (gamma_next, alpha * gamma);
    let den = gamma_next + alpha * gamma;
    let y: Vec<f64> = state.x.iter().zip(&state.v).map(|(x, v)| (cx * x + cv * v) / den).collect();
    let mut g = vec![0.0; y.len()];
    let f_y = oracle.value_and_gradient(&y, &mut g);
    check_finite(&g)?;
    let h = state.step_size;
    let x_next: Vec<f64> = y.iter().zip(&g).map(|(y, g)| y - h * g).collect();
    let keep = (1.0 - alpha) * gamma;
    let v_next: Vec<f64> = state
        .v
        .iter()
        .zip(y.iter().zip(&g))
        .map(|(v, (y, g))| (keep * v + alpha * (mu * y - g)) / gamma_next)
        .collect();
    let f_next = oracle.value(&x_next);
    if let Some(obs) = observer {
        obs.on_step(&StepView {
            k: state.k,
            x: &state.x,
            v: &state.v,
            gamma,
            memory: &[],
            beta_gamma_sum: 0.0,
            alpha,
            gamma_next,
            y: &y,
            grad: &g,
            f_y,
            x_next: &x_next,
            v_next: &v_next,
            f_next,
            mu,
            lipschitz: l,
        });
    }
    let summary = StepSummary {
        grad_norm: norm(&g),
        f_y,
        gamma_prev: gamma,
        beta_gamma_sum: 0.0,
        feasibility_bound: gamma.min(mu),
    };
    state.x = x_next;
    state.v = v_next;
    state.gamma = gamma_next;
    state.alpha_prev = alpha;
    state.lambda *= 1.0 - alpha;
    state.y_last = y;
    state.grad_last = g;
    state.f_last = f_y;
    state.f_x = f_next;
    state.k += 1;
    Ok(summary)
}

fn sfgm_step<O: Objective + ?Sized>(
    oracle: &O,
    config: &SolverConfig,
    state: &mut SolverState,
    observer: Option<&mut (dyn StepObserver + '_)>,
) -> Result<StepSummary, SolverError> {
    let (l, mu, gamma) = (state.lipschitz, state.mu, state.gamma);
    let weights = config.beta.weights(state.k, gamma, mu, &state.history)?;
    if weights.clamped {
        state.clamp_events += 1;
    }
    let memory = resolve_memory(&weights.entries, &state.history);
    let s = weights.sum;
    let alpha = compute_alpha(gamma, s, mu, l)?;
    let gamma_next = advance_gamma(gamma, alpha, s, mu);
    let y = compute_y(&state.x, &state.v, &memory, gamma, gamma_next, alpha)?;
    let mut g = vec![0.0; y.len()];
    let f_y = oracle.value_and_gradient(&y, &mut g);
    check_finite(&g)?;
    let x_next = gradient_step(&y, &g, state.step_size);
    let v_next = advance_v(&state.v, &y, &g, &memory, gamma, gamma_next, alpha, mu)?;
    let f_next = oracle.value(&x_next);
    if let Some(obs) = observer {
        obs.on_step(&StepView {
            k: state.k,
            x: &state.x,
            v: &state.v,
            gamma,
            memory: &memory,
            beta_gamma_sum: s,
            alpha,
            gamma_next,
            y: &y,
            grad: &g,
            f_y,
            x_next: &x_next,
            v_next: &v_next,
            f_next,
            mu,
            lipschitz: l,
        });
    }
    let summary = StepSummary {
        grad_norm: norm(&g),
        f_y,
        gamma_prev: gamma,
        beta_gamma_sum: s,
        feasibility_bound: weights.bound,
    };

    if config.beta.keeps(state.k) {
        let v_k = std::mem::replace(&mut state.v, v_next);
        state.history.push_back(PastScan {
            index: state.k,
            gamma,
            v: v_k,
        });
        while state.history.len() > config.beta.retention() {
            state.history.pop_front();
        }
    } else {
        state.v = v_next;
    }
    state.x = x_next;
    state.gamma = gamma_next;
    state.alpha_prev = alpha;
    state.lambda *= 1.0 - alpha;
    state.memory = memory;
    state.y_last = y;
    state.grad_last = g;
    state.f_last = f_y;
    state.f_x = f_next;
    state.k += 1;
    Ok(summary)
}

/// Runs from `x0` until the stopping rule fires or `max_iters` steps are done.
pub fn run<O: Objective + ?Sized>(
    oracle: &O,
    config: &SolverConfig,
    x0: &[f64],
    truth: Option<&GroundTruth>,
) -> Result<RunOutput, SolverError> {
    run_observed(oracle, config, x0, truth, None)
}

/// [`run`] with a hook that sees every intermediate quantity of every step.
pub fn run_observed<O: Objective + ?Sized>(
    oracle: &O,
    config: &SolverConfig,
    x0: &[f64],
    truth: Option<&GroundTruth>,
    mut observer: Option<&mut (dyn StepObserver + '_)>,
) -> Result<RunOutput, SolverError> {
    let mut state = SolverState::new(oracle, config, x0)?;
    if let Some(t) = truth {
        if t.x_star.len() != x0.len() {
            return Err(OracleError::DimensionMismatch {
                expected: x0.len(),
                got: t.x_star.len(),
            }
            .into());
        }
    }
    let dist_target = match config.stop {
        StoppingRule::DistToOpt(rho) => match truth {
            Some(t) => Some(rho * t.distance(x0)),
            None => return Err(SolverError::InvalidConfig("DistToOpt needs a ground truth".into())),
        },
        _ => None,
    };
    if let Some(obs) = observer.as_deref_mut() {
        obs.on_start(&state);
    }

    let start = Instant::now();
    let mut trace = Vec::new();
    let mut rises = 0;
    let mut converged = false;
    let f_start = state.f_x;
    while state.k < config.max_iters {
        let f_prev = state.f_x;
        let s = step_observed(oracle, config, &mut state, observer.as_deref_mut())?;
        let dist_to_opt = truth.map(|t| dist(&state.x, &t.x_star));
        let record = IterationRecord {
            k: state.k,
            f: state.f_x,
            gap: truth.map(|t| state.f_x - t.f_star),
            grad_norm: s.grad_norm,
            alpha: state.alpha_prev,
            gamma: state.gamma,
            lambda: state.lambda,
            dist_to_opt,
            wall_ns: start.elapsed().as_nanos() as u64,
            f_y: s.f_y,
            gamma_prev: s.gamma_prev,
            beta_gamma_sum: s.beta_gamma_sum,
            feasibility_bound: s.feasibility_bound,
        };
        trace.push(record);

        if !state.f_x.is_finite() {
            return Err(SolverError::Stall { k: state.k, f: state.f_x });
        }
        if state.f_x > f_prev + STALL_TOL * (1.0 + f_prev.abs()) && state.f_x > f_start {
            rises += 1;
            if rises >= STALL_WINDOW {
                return Err(SolverError::Stall { k: state.k, f: state.f_x });
            }
        } else {
            rises = 0;
        }

        let done = match config.stop {
            StoppingRule::GradNorm(eta) => s.grad_norm <= eta,
            StoppingRule::DistToOpt(_) => dist_to_opt.zip(dist_target).is_some_and(|(d, t)| d <= t),
            StoppingRule::MaxIters => false,
        };
        if done {
            converged = true;
            break;
        }
    }
    Ok(RunOutput {
        state,
        trace,
        converged,
    })
}
