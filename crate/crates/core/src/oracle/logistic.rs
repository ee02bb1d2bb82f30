use super::{
    GroundTruth, GroundTruthMethod, Objective, OracleError, DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL,
    LIPSCHITZ_SAFETY_FACTOR,
};
use crate::linalg::{dot, power_iteration, Design};
use crate::solvers::{self, SolverConfig, SolverError, StoppingRule};

/// Iteration cap for the internal high-accuracy solve.
pub const GROUND_TRUTH_MAX_ITERS: usize = 2_000_000;

/// `log(1 + e^t)` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-t})` without overflow.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `(1/m) Σ log(1 + exp(−bᵢ aᵢᵀx)) + (τ/2)‖x‖²` with labels `bᵢ ∈ {−1, +1}`.
///
/// `L` is `1.01 · ((1/4m) λ_max(AᵀA) + τ)` with the eigenvalue from power
/// iteration, and `μ = τ`.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    design: Design,
    labels: Vec<f64>,
    ridge: f64,
    lipschitz: f64,
}

impl LogisticProblem {
    pub fn new(design: Design, labels: Vec<f64>, ridge: f64) -> Result<Self, OracleError> {
        if design.rows() != labels.len() {
            return Err(OracleError::DimensionMismatch {
                expected: design.rows(),
                got: labels.len(),
            });
        }
        if design.rows() == 0 {
            return Err(OracleError::InvalidProblem("logistic loss needs at least one sample".into()));
        }
        if let Some(i) = labels.iter().position(|&b| b != 1.0 && b != -1.0) {
            return Err(OracleError::InvalidProblem(format!(
                "label {} at sample {i} is not in {{-1, +1}}",
                labels[i]
            )));
        }
        if !(ridge.is_finite() && ridge >= 0.0) {
            return Err(OracleError::InvalidProblem(format!("ridge must be finite and nonnegative, got {ridge}")));
        }
        let mut p = LogisticProblem {
            design,
            labels,
            ridge,
            lipschitz: f64::NAN,
        };
        p.lipschitz = LIPSCHITZ_SAFETY_FACTOR * p.estimate_lipschitz(DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL)?;
        if p.dim() > 0 && !(p.lipschitz > 0.0) {
            return Err(OracleError::InvalidProblem("zero design with zero ridge has no curvature".into()));
        }
        Ok(p)
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Raw global curvature bound `(1/4m) λ_max(AᵀA) + τ`, eigenvalue by power iteration.
    pub fn estimate_lipschitz(&self, iters: usize, tol: f64) -> Result<f64, OracleError> {
        let m = self.design.rows();
        let top = power_iteration(
            self.dim(),
            |v, out| {
                let mut r = vec![0.0; m];
                self.design.matvec(v, &mut r);
                self.design.matvec_t(&r, out);
            },
            iters,
            tol,
        )?;
        Ok(top / (4.0 * m as f64) + self.ridge)
    }

    /// Runs FGM with `γ₀ = μ` until `‖∇f‖ ≤ tol`.
    pub fn ground_truth(&self, tol: f64) -> Result<GroundTruth, OracleError> {
        let mu = self.ridge;
        if !(mu > 0.0) {
            return Err(OracleError::NotStronglyConvex { mu });
        }
        let config = SolverConfig::fgm_css3()
            .with_stop(StoppingRule::GradNorm(tol))
            .with_max_iters(GROUND_TRUTH_MAX_ITERS);
        let x0 = vec![0.0; self.dim()];
        let out = solvers::run(self, &config, &x0, None).map_err(|e| match e {
            SolverError::Stall { f, .. } => OracleError::GroundTruthNotReached { residual: f, tol },
            other => OracleError::InvalidProblem(other.to_string()),
        })?;
        // The stopping test saw ‖∇f(y_k)‖; certify the returned iterate itself.
        let state = out.state;
        let candidates = [state.x, state.y_last];
        let mut last_err = None;
        for x in candidates {
            match GroundTruth::certify(self, x, GroundTruthMethod::HighAccuracySolve, tol) {
                Ok(t) => return Ok(t),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("two candidates were checked"))
    }
}

impl Objective for LogisticProblem {
    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.ridge
    }

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.labels.len();
        let mut z = vec![0.0; m];
        self.design.matvec(x, &mut z);
        let loss: f64 = z.iter().zip(&self.labels).map(|(zi, b)| softplus(-b * zi)).sum();
        loss / m as f64 + 0.5 * self.ridge * dot(x, x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(x, grad);
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.labels.len();
        let mut z = vec![0.0; m];
        self.design.matvec(x, &mut z);
        let mut loss = 0.0;
        for (zi, b) in z.iter_mut().zip(&self.labels) {
            let t = -b * *zi;
            loss += softplus(t);
            *zi = -b * sigmoid(t);
        }
        self.design.matvec_t(&z, grad);
        let inv_m = 1.0 / m as f64;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g = *g * inv_m + self.ridge * xi;
        }
        loss * inv_m + 0.5 * self.ridge * dot(x, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::oracle::{check_gradient, eval_gradient, eval_value};

    #[test]
    fn zero_feature_sample_gives_log_two() {
        let p = LogisticProblem::new(Design::Dense(DenseMatrix::zeros(1, 1)), vec![1.0], 0.1).unwrap();
        let f = eval_value(&p, &[5.0]).unwrap() - 0.5 * 0.1 * 25.0;
        assert!((f - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_origin() {
        let p = LogisticProblem::new(Design::Dense(DenseMatrix::identity(1)), vec![1.0], 0.0).unwrap();
        let g = eval_gradient(&p, &[0.0]).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-15);
        // central differences agree
        let h = 1e-6;
        let fd = (p.value(&[h]) - p.value(&[-h])) / (2.0 * h);
        assert!((fd + 0.5).abs() < 1e-9);
        assert!(check_gradient(&p, &[0.0], 1e-6) < 1e-9);
    }

    #[test]
    fn extreme_margins_stay_finite() {
        let p = LogisticProblem::new(Design::Dense(DenseMatrix::identity(1)), vec![-1.0], 0.0).unwrap();
        let f = p.value(&[1e4]);
        assert!((f - 1e4).abs() < 1e-9);
        let g = eval_gradient(&p, &[1e4]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert_eq!(p.value(&[-1e4]), 0.0);
    }

    #[test]
    fn rejects_non_binary_labels() {
        let r = LogisticProblem::new(Design::Dense(DenseMatrix::identity(1)), vec![0.0], 0.1);
        assert!(matches!(r, Err(OracleError::InvalidProblem(_))));
    }

    #[test]
    fn curvature_bound() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 1.0, 0.0, 2.0]);
        let p = LogisticProblem::new(Design::Dense(a), vec![1.0, -1.0], 0.01).unwrap();
        // AᵀA = [[1,1],[1,5]], λ_max = 3 + √5
        let expected = (3.0 + 5f64.sqrt()) / 8.0 + 0.01;
        assert!((p.estimate_lipschitz(1000, 1e-13).unwrap() - expected).abs() < 1e-10);
        assert!((p.lipschitz() - 1.01 * expected).abs() < 1e-9);
    }
}
