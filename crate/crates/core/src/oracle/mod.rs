//! First-order oracles for smooth, strongly convex objectives.
//!
//! An [`Objective`] exposes `f`, `∇f`, the gradient Lipschitz constant `L` and
//! the strong convexity modulus `μ`. Two concrete families are provided:
//! ridge-regularized least squares ([`QuadraticProblem`]) and ridge-regularized
//! logistic regression ([`LogisticProblem`]). [`Problem`] wraps either one so the
//! benchmark code can treat them uniformly.

mod logistic;
mod quadratic;

pub use logistic::LogisticProblem;
pub use quadratic::{QuadraticProblem, Spectrum};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm, norm_inf, PowerIterationError};

/// Multiplier applied to power-iteration estimates of `L` before they are used
/// as step sizes. Power iteration approaches the top eigenvalue from below.
pub const LIPSCHITZ_SAFETY_FACTOR: f64 = 1.01;

/// Iteration cap and relative tolerance used when a problem estimates its own `L`.
pub const DEFAULT_POWER_ITERS: usize = 20_000;
pub const DEFAULT_POWER_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input at coordinate {index}")]
    NonFinite { index: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("Lipschitz estimation failed: {0}")]
    Lipschitz(#[from] PowerIterationError),
    #[error("ground truth requires strong convexity (mu = {mu})")]
    NotStronglyConvex { mu: f64 },
    #[error("ground truth not reached: residual gradient norm {residual:e} > tolerance {tol:e}")]
    GroundTruthNotReached { residual: f64, tol: f64 },
}

/// Black-box first-order oracle of an `L`-smooth, `μ`-strongly convex function.
///
/// `value` and `gradient` assume `x.len() == dim()`; use [`eval_value`] and
/// [`eval_gradient`] for checked calls.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn lipschitz(&self) -> f64;
    fn strong_convexity(&self) -> f64;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(x, grad);
        self.value(x)
    }

    fn condition_number(&self) -> f64 {
        self.lipschitz() / self.strong_convexity()
    }
}

fn check_input(n: usize, x: &[f64]) -> Result<(), OracleError> {
    if x.len() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(OracleError::NonFinite { index });
    }
    Ok(())
}

pub fn eval_value<O: Objective + ?Sized>(oracle: &O, x: &[f64]) -> Result<f64, OracleError> {
    check_input(oracle.dim(), x)?;
    Ok(oracle.value(x))
}

pub fn eval_gradient<O: Objective + ?Sized>(oracle: &O, x: &[f64]) -> Result<Vec<f64>, OracleError> {
    check_input(oracle.dim(), x)?;
    let mut g = vec![0.0; x.len()];
    oracle.gradient(x, &mut g);
    Ok(g)
}

/// Largest scaled error between `∇f(x)` and central finite differences.
///
/// The step is `h·(1 + ‖x‖∞)` and each coordinate contributes
/// `|gᵢ − dᵢ| / max(1, |gᵢ|)`. Non-finite differences report `+∞`.
pub fn check_gradient<O: Objective + ?Sized>(oracle: &O, x: &[f64], h: f64) -> f64 {
    let n = oracle.dim();
    if n == 0 {
        return 0.0;
    }
    let step = h * (1.0 + norm_inf(x));
    let mut g = vec![0.0; n];
    oracle.gradient(x, &mut g);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let xi = probe[i];
        probe[i] = xi + step;
        let fp = oracle.value(&probe);
        probe[i] = xi - step;
        let fm = oracle.value(&probe);
        probe[i] = xi;
        let fd = (fp - fm) / (2.0 * step);
        if !fd.is_finite() || !g[i].is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1.0));
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthMethod {
    ClosedForm,
    HighAccuracySolve,
}

/// Unique minimizer and optimal value used for gap and distance metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub method: GroundTruthMethod,
    pub residual_grad_norm: f64,
}

impl GroundTruth {
    pub(crate) fn certify<O: Objective + ?Sized>(
        oracle: &O,
        x_star: Vec<f64>,
        method: GroundTruthMethod,
        tol: f64,
    ) -> Result<Self, OracleError> {
        let mut g = vec![0.0; x_star.len()];
        let f_star = oracle.value_and_gradient(&x_star, &mut g);
        let residual = norm(&g);
        if !(residual <= tol) {
            return Err(OracleError::GroundTruthNotReached { residual, tol });
        }
        Ok(GroundTruth {
            x_star,
            f_star,
            method,
            residual_grad_norm: residual,
        })
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        crate::linalg::dist(x, &self.x_star)
    }
}

/// `1e-10 · (1 + ‖∇f(0)‖)`, the default ground-truth residual target.
pub fn default_ground_truth_tol<O: Objective + ?Sized>(oracle: &O) -> f64 {
    let n = oracle.dim();
    let mut g = vec![0.0; n];
    oracle.gradient(&vec![0.0; n], &mut g);
    1e-10 * (1.0 + norm(&g))
}

/// Either of the two supported objective families.
#[derive(Debug, Clone)]
pub enum Problem {
    Quadratic(QuadraticProblem),
    Logistic(LogisticProblem),
}

impl Problem {
    pub fn ground_truth(&self, tol: f64) -> Result<GroundTruth, OracleError> {
        match self {
            Problem::Quadratic(p) => p.ground_truth(tol),
            Problem::Logistic(p) => p.ground_truth(tol),
        }
    }

    /// Raw (not inflated) estimate of `L`.
    pub fn estimate_lipschitz(&self, iters: usize, tol: f64) -> Result<f64, OracleError> {
        match self {
            Problem::Quadratic(p) => p.estimate_lipschitz(iters, tol),
            Problem::Logistic(p) => p.estimate_lipschitz(iters, tol),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Quadratic(_) => "quadratic",
            Problem::Logistic(_) => "logistic",
        }
    }
}

impl From<QuadraticProblem> for Problem {
    fn from(p: QuadraticProblem) -> Self {
        Problem::Quadratic(p)
    }
}

impl From<LogisticProblem> for Problem {
    fn from(p: LogisticProblem) -> Self {
        Problem::Logistic(p)
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::Quadratic(p) => p.dim(),
            Problem::Logistic(p) => p.dim(),
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            Problem::Quadratic(p) => p.lipschitz(),
            Problem::Logistic(p) => p.lipschitz(),
        }
    }

    fn strong_convexity(&self) -> f64 {
        match self {
            Problem::Quadratic(p) => p.strong_convexity(),
            Problem::Logistic(p) => p.strong_convexity(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Problem::Quadratic(p) => p.value(x),
            Problem::Logistic(p) => p.value(x),
        }
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        match self {
            Problem::Quadratic(p) => p.gradient(x, grad),
            Problem::Logistic(p) => p.gradient(x, grad),
        }
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Problem::Quadratic(p) => p.value_and_gradient(x, grad),
            Problem::Logistic(p) => p.value_and_gradient(x, grad),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, Design, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = radius * rng.random::<f64>() / norm(&x).max(1e-300);
        x.iter_mut().for_each(|v| *v *= s);
        x
    }

    fn problems() -> Vec<Problem> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (m, n) = (12, 5);
        let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = DenseMatrix::from_row_major(m, n, data);
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<f64> = (0..m).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        vec![
            QuadraticProblem::least_squares(Design::Dense(a.clone()), y, 0.05).unwrap().into(),
            LogisticProblem::new(Design::Dense(a), labels, 0.05).unwrap().into(),
        ]
    }

    #[test]
    fn checked_eval_rejects_bad_input() {
        let p = &problems()[0];
        assert_eq!(
            eval_value(p, &[1.0, 2.0]),
            Err(OracleError::DimensionMismatch { expected: 5, got: 2 })
        );
        assert_eq!(
            eval_gradient(p, &[0.0, f64::NAN, 0.0, 0.0, 0.0]),
            Err(OracleError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn smoothness_and_strong_convexity_inequalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in problems() {
            let (l, mu) = (p.lipschitz(), p.strong_convexity());
            assert!(0.0 <= mu && mu <= l);
            let n = p.dim();
            let mut gy = vec![0.0; n];
            for _ in 0..1000 {
                let x = random_point(&mut rng, n, 10.0);
                let y = random_point(&mut rng, n, 10.0);
                let fx = p.value(&x);
                let fy = p.value_and_gradient(&y, &mut gy);
                let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                let lin = fx - fy - dot(&gy, &d);
                let r2 = dot(&d, &d);
                let slack = -1e-9 * (1.0 + fx.abs());
                assert!(lin - mu / 2.0 * r2 >= slack, "{} lower bound", p.kind());
                assert!(l / 2.0 * r2 - lin >= slack, "{} upper bound", p.kind());
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in problems() {
            for _ in 0..100 {
                let x = random_point(&mut rng, p.dim(), 1.0);
                let err = check_gradient(&p, &x, 1e-6);
                assert!(err <= 1e-5, "{}: {err}", p.kind());
            }
        }
    }

    #[test]
    fn check_gradient_zero_dimension() {
        let p = QuadraticProblem::separable(vec![], vec![], 1.0).unwrap();
        assert_eq!(check_gradient(&p, &[], 1e-6), 0.0);
    }

    #[test]
    fn ground_truth_meets_tolerance() {
        for p in problems() {
            let tol = default_ground_truth_tol(&p);
            let truth = p.ground_truth(tol).unwrap();
            assert!(truth.residual_grad_norm <= tol);
            let g = eval_gradient(&p, &truth.x_star).unwrap();
            assert!(norm(&g) <= tol);
        }
    }
}
