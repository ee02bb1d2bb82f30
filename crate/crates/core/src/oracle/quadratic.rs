use nalgebra::{DMatrix, DVector};

use super::{
    GroundTruth, GroundTruthMethod, Objective, OracleError, DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL,
    LIPSCHITZ_SAFETY_FACTOR,
};
use crate::linalg::{axpy, dot, power_iteration, Design};

/// Exact extreme eigenvalues of a constant Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub max: f64,
    pub min: f64,
}

#[derive(Debug, Clone)]
enum Form {
    /// `(1/2m)‖Ax − y‖²`
    LeastSquares { design: Design, targets: Vec<f64> },
    /// `(1/2)Σ dᵢ(xᵢ − cᵢ)²`
    Separable { curvature: Vec<f64>, center: Vec<f64> },
}

/// Ridge-regularized quadratic objective.
///
/// The least-squares form is `(1/2m)‖Ax − y‖² + (τ/2)‖x‖²` with Hessian
/// `(1/m)AᵀA + τI`. The separable form `(1/2)Σ dᵢ(xᵢ − cᵢ)² + (τ/2)‖x‖²` keeps the
/// Hessian diagonal `d` exact, which the synthetic condition-number family needs.
///
/// `μ` is the exact smallest Hessian eigenvalue when the Hessian is diagonal and
/// `τ` otherwise. `L` is exact for diagonal Hessians and a power-iteration
/// estimate inflated by [`LIPSCHITZ_SAFETY_FACTOR`] otherwise.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    form: Form,
    ridge: f64,
    lipschitz: f64,
    strong_convexity: f64,
    spectrum: Option<Spectrum>,
}

impl QuadraticProblem {
    pub fn least_squares(design: Design, targets: Vec<f64>, ridge: f64) -> Result<Self, OracleError> {
        if design.rows() != targets.len() {
            return Err(OracleError::DimensionMismatch {
                expected: design.rows(),
                got: targets.len(),
            });
        }
        if design.rows() == 0 {
            return Err(OracleError::InvalidProblem("least squares needs at least one row".into()));
        }
        check_ridge(ridge)?;
        let m = design.rows() as f64;
        let spectrum = match &design {
            Design::Diagonal(a) => Some(diagonal_spectrum(a.iter().map(|v| v * v / m), ridge)),
            _ => None,
        };
        let mut p = QuadraticProblem {
            form: Form::LeastSquares { design, targets },
            ridge,
            lipschitz: f64::NAN,
            strong_convexity: ridge,
            spectrum,
        };
        p.settle_constants()?;
        Ok(p)
    }

    pub fn separable(curvature: Vec<f64>, center: Vec<f64>, ridge: f64) -> Result<Self, OracleError> {
        if curvature.len() != center.len() {
            return Err(OracleError::DimensionMismatch {
                expected: curvature.len(),
                got: center.len(),
            });
        }
        if curvature.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(OracleError::InvalidProblem("curvature entries must be finite and nonnegative".into()));
        }
        check_ridge(ridge)?;
        let spectrum = Some(diagonal_spectrum(curvature.iter().copied(), ridge));
        let mut p = QuadraticProblem {
            form: Form::Separable { curvature, center },
            ridge,
            lipschitz: f64::NAN,
            strong_convexity: ridge,
            spectrum,
        };
        p.settle_constants()?;
        Ok(p)
    }

    fn settle_constants(&mut self) -> Result<(), OracleError> {
        match self.spectrum {
            Some(s) => {
                self.lipschitz = s.max;
                self.strong_convexity = s.min;
            }
            None => {
                let raw = self.estimate_lipschitz(DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL)?;
                self.lipschitz = LIPSCHITZ_SAFETY_FACTOR * raw;
                self.strong_convexity = self.ridge;
            }
        }
        if self.dim() > 0 && !(self.lipschitz > 0.0) {
            return Err(OracleError::InvalidProblem("Hessian is identically zero".into()));
        }
        Ok(())
    }

    /// Replaces `L` (for instance with a value known from the data source).
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn spectrum(&self) -> Option<Spectrum> {
        self.spectrum
    }

    pub fn samples(&self) -> usize {
        match &self.form {
            Form::LeastSquares { design, .. } => design.rows(),
            Form::Separable { curvature, .. } => curvature.len(),
        }
    }

    pub fn design(&self) -> Option<&Design> {
        match &self.form {
            Form::LeastSquares { design, .. } => Some(design),
            Form::Separable { .. } => None,
        }
    }

    /// `out = ∇²f · v`
    pub fn hessian_apply(&self, v: &[f64], out: &mut [f64]) {
        match &self.form {
            Form::LeastSquares { design, .. } => {
                let m = design.rows();
                let mut r = vec![0.0; m];
                design.matvec(v, &mut r);
                design.matvec_t(&r, out);
                let inv_m = 1.0 / m as f64;
                for (o, vi) in out.iter_mut().zip(v) {
                    *o = *o * inv_m + self.ridge * vi;
                }
            }
            Form::Separable { curvature, .. } => {
                for ((o, d), vi) in out.iter_mut().zip(curvature).zip(v) {
                    *o = (d + self.ridge) * vi;
                }
            }
        }
    }

    /// Raw power-iteration estimate of `λ_max(∇²f)`.
    pub fn estimate_lipschitz(&self, iters: usize, tol: f64) -> Result<f64, OracleError> {
        Ok(power_iteration(self.dim(), |v, out| self.hessian_apply(v, out), iters, tol)?)
    }

    /// Minimizer by closed form (diagonal Hessians) or a Cholesky solve of the
    /// normal equations followed by iterative refinement.
    pub fn ground_truth(&self, tol: f64) -> Result<GroundTruth, OracleError> {
        let mu = self.strong_convexity;
        match &self.form {
            Form::Separable { curvature, center } => {
                let x: Vec<f64> = curvature
                    .iter()
                    .zip(center)
                    .map(|(d, c)| {
                        if self.ridge == 0.0 {
                            *c
                        } else {
                            d * c / (d + self.ridge)
                        }
                    })
                    .collect();
                if curvature.iter().any(|d| d + self.ridge <= 0.0) {
                    return Err(OracleError::NotStronglyConvex { mu });
                }
                GroundTruth::certify(self, x, GroundTruthMethod::ClosedForm, tol)
            }
            Form::LeastSquares {
                design: Design::Diagonal(a),
                targets,
            } => {
                let m = a.len() as f64;
                if a.iter().any(|ai| ai * ai + m * self.ridge <= 0.0) {
                    return Err(OracleError::NotStronglyConvex { mu });
                }
                let x = a
                    .iter()
                    .zip(targets)
                    .map(|(ai, yi)| ai * yi / (ai * ai + m * self.ridge))
                    .collect();
                GroundTruth::certify(self, x, GroundTruthMethod::ClosedForm, tol)
            }
            Form::LeastSquares { design, targets } => {
                let n = design.cols();
                let m = design.rows() as f64;
                let gram = design.gram();
                let h = DMatrix::from_fn(n, n, |i, j| {
                    gram.get(i, j) / m + if i == j { self.ridge } else { 0.0 }
                });
                let chol = h
                    .cholesky()
                    .ok_or(OracleError::NotStronglyConvex { mu })?;
                let mut rhs = vec![0.0; n];
                design.matvec_t(targets, &mut rhs);
                let rhs = DVector::from_iterator(n, rhs.into_iter().map(|v| v / m));
                let mut x: Vec<f64> = chol.solve(&rhs).iter().copied().collect();
                let mut g = vec![0.0; n];
                for _ in 0..5 {
                    self.gradient(&x, &mut g);
                    if dot(&g, &g).sqrt() <= tol {
                        break;
                    }
                    let corr = chol.solve(&DVector::from_column_slice(&g));
                    axpy(-1.0, corr.as_slice(), &mut x);
                }
                GroundTruth::certify(self, x, GroundTruthMethod::HighAccuracySolve, tol)
            }
        }
    }
}

fn check_ridge(ridge: f64) -> Result<(), OracleError> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(OracleError::InvalidProblem(format!("ridge must be finite and nonnegative, got {ridge}")));
    }
    Ok(())
}

fn diagonal_spectrum(d: impl Iterator<Item = f64>, ridge: f64) -> Spectrum {
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for v in d {
        max = max.max(v);
        min = min.min(v);
    }
    if max < min {
        return Spectrum { max: ridge, min: ridge };
    }
    Spectrum {
        max: max + ridge,
        min: min + ridge,
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        match &self.form {
            Form::LeastSquares { design, .. } => design.cols(),
            Form::Separable { curvature, .. } => curvature.len(),
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    fn value(&self, x: &[f64]) -> f64 {
        let reg = 0.5 * self.ridge * dot(x, x);
        match &self.form {
            Form::LeastSquares { design, targets } => {
                let mut r = vec![0.0; targets.len()];
                design.matvec(x, &mut r);
                let ss: f64 = r.iter().zip(targets).map(|(a, y)| (a - y) * (a - y)).sum();
                ss / (2.0 * targets.len() as f64) + reg
            }
            Form::Separable { curvature, center } => {
                let q: f64 = curvature
                    .iter()
                    .zip(center)
                    .zip(x)
                    .map(|((d, c), xi)| d * (xi - c) * (xi - c))
                    .sum();
                0.5 * q + reg
            }
        }
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(x, grad);
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let reg = 0.5 * self.ridge * dot(x, x);
        match &self.form {
            Form::LeastSquares { design, targets } => {
                let m = targets.len();
                let mut r = vec![0.0; m];
                design.matvec(x, &mut r);
                for (ri, yi) in r.iter_mut().zip(targets) {
                    *ri -= yi;
                }
                design.matvec_t(&r, grad);
                let inv_m = 1.0 / m as f64;
                for (g, xi) in grad.iter_mut().zip(x) {
                    *g = *g * inv_m + self.ridge * xi;
                }
                dot(&r, &r) * 0.5 * inv_m + reg
            }
            Form::Separable { curvature, center } => {
                let mut q = 0.0;
                for (((g, d), c), xi) in grad.iter_mut().zip(curvature).zip(center).zip(x) {
                    let e = xi - c;
                    q += d * e * e;
                    *g = d * e + self.ridge * xi;
                }
                0.5 * q + reg
            }
        }
    }
}
