use serde::{Deserialize, Serialize};

use super::{certification_slack, DiagnosticsError};
use crate::linalg::{dist, dist_sq, dot, norm};
use crate::oracle::GroundTruth;
use crate::solvers::{MemoryEntry, SolverState, StepObserver, StepView};

/// Inputs of one `φ*_{k+1}` update, all taken from iteration `k`.
#[derive(Debug, Clone, Copy)]
pub struct PhiStarInputs<'a> {
    pub phi_star: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_next: f64,
    pub mu: f64,
    pub f_y: f64,
    pub y: &'a [f64],
    pub grad: &'a [f64],
    pub v: &'a [f64],
    /// Minimizer of the scanning function `Φ_k`.
    pub x_phi: &'a [f64],
    pub memory: &'a [MemoryEntry],
}

/// The ten summands of the `φ*_{k+1}` recursion, in order:
///
/// 1. `α f(y)`
/// 2. `(1 − α) φ*_k`
/// 3. `α γ_k (1 − α)(μ + Σ_{i≥1} β γ_i) / (2γ_{k+1}) ‖y − v_k‖²`
/// 4. `(α³/γ_{k+1}) Σ β γ_i ‖v_i − y‖ ‖∇f(y)‖`
/// 5. `(1 − α)(γ_k/2) ‖x*_Φ − v_k‖²`
/// 6. `−α² ‖∇f(y)‖² / (2γ_{k+1})`
/// 7. `(α(1 − α)γ_k/γ_{k+1}) ((v_k − y)ᵀ∇f(y) + Σ β γ_i ‖y − v_i‖ ‖y − v_k‖)`
/// 8. `α Σ (β γ_i/2) ‖y − v_i‖²`
/// 9. `((1 − α)α²/γ_{k+1}) Σ β γ_i (v_i − y)ᵀ∇f(y)`
/// 10. `Σ (β γ_i/2) ‖x*_Φ − v_i‖²`
///
/// The `μ` coefficient of the third summand sums memory indices from 1, not 0.
pub fn phi_star_terms(p: &PhiStarInputs<'_>) -> [f64; 10] {
    let PhiStarInputs {
        phi_star,
        alpha: a,
        gamma: g,
        gamma_next: gn,
        mu,
        f_y,
        y,
        grad,
        v,
        x_phi,
        memory,
    } = *p;
    let grad_norm = norm(grad);
    let y_to_v = dist(y, v);
    let mut mu_plus = mu;
    let (mut cs_grad, mut cs_center, mut sq_y, mut inner, mut sq_phi) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in memory {
        let w = e.weight();
        if e.index >= 1 {
            mu_plus += w;
        }
        let d = dist(&e.v, y);
        cs_grad += w * d * grad_norm;
        cs_center += w * d * y_to_v;
        sq_y += 0.5 * w * d * d;
        let vi_minus_y: Vec<f64> = e.v.iter().zip(y).map(|(vi, yi)| vi - yi).collect();
        inner += w * dot(&vi_minus_y, grad);
        sq_phi += 0.5 * w * dist_sq(x_phi, &e.v);
    }
    let v_minus_y: Vec<f64> = v.iter().zip(y).map(|(vi, yi)| vi - yi).collect();
    [
        a * f_y,
        (1.0 - a) * phi_star,
        a * g * (1.0 - a) * mu_plus / (2.0 * gn) * y_to_v * y_to_v,
        a * a * a / gn * cs_grad,
        (1.0 - a) * 0.5 * g * dist_sq(x_phi, v),
        -a * a * grad_norm * grad_norm / (2.0 * gn),
        a * (1.0 - a) * g / gn * (dot(&v_minus_y, grad) + cs_center),
        a * sq_y,
        (1.0 - a) * a * a / gn * inner,
        sq_phi,
    ]
}

/// `φ*_{k+1}`, the sum of [`phi_star_terms`].
pub fn phi_star_next(p: &PhiStarInputs<'_>) -> f64 {
    phi_star_terms(p).iter().sum()
}

/// Diagnostics for one index `k` of a certified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerRow {
    pub k: usize,
    /// `λ_k` recomputed as `(1 − α_{k−1}) λ_{k−1}`.
    pub lambda: f64,
    pub gamma: f64,
    /// `Σ β_{i,k} γ_i`.
    pub beta_gamma_sum: f64,
    pub f_x: f64,
    pub phi_star: Option<f64>,
    /// `Φ*_k = min Φ_k`, when `Φ_k` is bounded below.
    pub scan_min: Option<f64>,
    /// `f(x_k) ≤ Φ*_k` up to the certification slack.
    pub premise_holds: Option<bool>,
    /// `ψ_k(x*)`, when a ground truth is attached.
    pub psi_at_truth: Option<f64>,
}

/// Follows `λ_k`, `φ*_k` and the scanning function `Φ_k` alongside a run.
///
/// Plug it into [`crate::solvers::run_observed`]; each step appends one
/// [`TrackerRow`] for the iteration it started from. [`EstimatingTracker::finish`]
/// appends the row of the final iterate.
#[derive(Debug, Clone, Default)]
pub struct EstimatingTracker {
    lambda: f64,
    phi_star: Option<f64>,
    gamma: f64,
    v: Vec<f64>,
    memory: Vec<MemoryEntry>,
    f_x: f64,
    gamma0: f64,
    f0: f64,
    x0: Vec<f64>,
    truth: Option<GroundTruth>,
    gamma_hist: Vec<f64>,
    beta_hist: Vec<Vec<(usize, f64)>>,
    rows: Vec<TrackerRow>,
}

impl EstimatingTracker {
    /// Tracker at `k = 0`: `λ₀ = 1`, `φ*₀ = f(x₀)`, `v₀ = x₀`, no memory.
    pub fn new(x0: &[f64], f0: f64, gamma0: f64, truth: Option<GroundTruth>) -> Self {
        EstimatingTracker {
            lambda: 1.0,
            phi_star: Some(f0),
            gamma: gamma0,
            v: x0.to_vec(),
            memory: Vec::new(),
            f_x: f0,
            gamma0,
            f0,
            x0: x0.to_vec(),
            truth,
            gamma_hist: vec![gamma0],
            beta_hist: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Tracker with the state set directly, for evaluating the primitives.
    pub fn at(gamma: f64, v: Vec<f64>, memory: Vec<MemoryEntry>, phi_star: f64) -> Self {
        let mut t = Self::new(&v, phi_star, gamma, None);
        t.memory = memory;
        t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi_star(&self) -> Option<f64> {
        self.phi_star
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    pub fn rows(&self) -> &[TrackerRow] {
        &self.rows
    }

    pub fn gamma_history(&self) -> &[f64] {
        &self.gamma_hist
    }

    /// `β_{i,k}` rows, one per completed step.
    pub fn beta_history(&self) -> &[Vec<(usize, f64)>] {
        &self.beta_hist
    }

    /// `λ ← (1 − α) λ`; returns the new value.
    pub fn update_lambda(&mut self, alpha: f64) -> f64 {
        self.lambda *= 1.0 - alpha;
        self.lambda
    }

    /// `ψ_k(x) = Σ β_{i,k} (γ_i/2) ‖x − v_i‖²` for the current memory row.
    pub fn eval_psi(&self, x: &[f64]) -> f64 {
        self.memory.iter().map(|e| 0.5 * e.weight() * dist_sq(x, &e.v)).sum()
    }

    fn beta_gamma_sum(&self) -> f64 {
        self.memory.iter().map(MemoryEntry::weight).sum()
    }

    /// `argmin Φ_k = (γ_k v_k − Σ β γ_i v_i) / (γ_k − Σ β γ_i)`.
    ///
    /// With `γ_k = 0` and no weighted memory `Φ_k` is constant and `v_k` is returned.
    pub fn phi_argmin(&self) -> Result<Vec<f64>, DiagnosticsError> {
        let s = self.beta_gamma_sum();
        if self.gamma == 0.0 && s == 0.0 {
            return Ok(self.v.clone());
        }
        let curvature = self.gamma - s;
        if !(curvature > 0.0) {
            return Err(DiagnosticsError::FlatScanningFunction { curvature });
        }
        let mut num: Vec<f64> = self.v.iter().map(|v| self.gamma * v).collect();
        for e in &self.memory {
            let w = e.weight();
            for (n, vi) in num.iter_mut().zip(&e.v) {
                *n -= w * vi;
            }
        }
        Ok(num.into_iter().map(|n| n / curvature).collect())
    }

    /// `Φ*_k = φ*_k + (γ_k/2)‖x*_Φ − v_k‖² − Σ β γ_i/2 ‖x*_Φ − v_i‖²`.
    pub fn scan_min(&self) -> Option<f64> {
        let phi_star = self.phi_star?;
        let x = self.phi_argmin().ok()?;
        Some(phi_star + 0.5 * self.gamma * dist_sq(&x, &self.v) - self.eval_psi(&x))
    }

    /// Whether `f(x_k) ≤ Φ*_k` holds up to the certification slack.
    pub fn certify_lemma1_premise(&self, f_xk: f64) -> bool {
        match self.scan_min() {
            Some(m) => f_xk <= m + certification_slack(m),
            None => false,
        }
    }

    /// Replaces `φ*_k` by `φ*_{k+1}` computed from `inputs`; returns it.
    pub fn update_phi_star(&mut self, inputs: &PhiStarInputs<'_>) -> f64 {
        let next = phi_star_next(inputs);
        self.phi_star = Some(next);
        next
    }

    fn push_row(&mut self, k: usize) {
        let scan_min = self.scan_min();
        let premise_holds = scan_min.map(|m| self.f_x <= m + certification_slack(m));
        let psi_at_truth = self.truth.as_ref().map(|t| self.eval_psi(&t.x_star));
        self.rows.push(TrackerRow {
            k,
            lambda: self.lambda,
            gamma: self.gamma,
            beta_gamma_sum: self.beta_gamma_sum(),
            f_x: self.f_x,
            phi_star: self.phi_star,
            scan_min,
            premise_holds,
            psi_at_truth,
        });
    }

    /// Appends the row for the final iterate, given the memory row the
    /// schedule would use next (see [`crate::solvers::peek_memory`]).
    pub fn finish(&mut self, k: usize, next_memory: Vec<MemoryEntry>) {
        self.memory = next_memory;
        self.push_row(k);
    }
}

impl StepObserver for EstimatingTracker {
    fn on_start(&mut self, state: &SolverState) {
        *self = EstimatingTracker::new(&state.x, state.f_x, state.gamma, self.truth.take());
    }

    fn on_step(&mut self, view: &StepView<'_>) {
        self.gamma = view.gamma;
        self.v.clear();
        self.v.extend_from_slice(view.v);
        self.memory = view.memory.to_vec();
        self.push_row(view.k);

        self.phi_star = match self.phi_star {
            Some(phi_star) if view.gamma_next > 0.0 => {
                let x_phi = self.phi_argmin().unwrap_or_else(|_| view.v.to_vec());
                Some(phi_star_next(&PhiStarInputs {
                    phi_star,
                    alpha: view.alpha,
                    gamma: view.gamma,
                    gamma_next: view.gamma_next,
                    mu: view.mu,
                    f_y: view.f_y,
                    y: view.y,
                    grad: view.grad,
                    v: view.v,
                    x_phi: &x_phi,
                    memory: view.memory,
                }))
            }
            _ => None,
        };
        self.update_lambda(view.alpha);
        self.gamma = view.gamma_next;
        self.v.clear();
        self.v.extend_from_slice(view.v_next);
        self.f_x = view.f_next;
        self.gamma_hist.push(view.gamma_next);
        self.beta_hist.push(view.memory.iter().map(|e| (e.index, e.beta)).collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};
    use proptest::prelude::*;

    fn entry(index: usize, beta: f64, gamma: f64, v: Vec<f64>) -> MemoryEntry {
        MemoryEntry { index, gamma, v, beta }
    }

    #[test]
    fn lambda_products() {
        let mut t = EstimatingTracker::new(&[0.0], 0.0, 0.0, None);
        assert_eq!(t.update_lambda(0.0), 1.0);
        assert_eq!(t.update_lambda(0.5), 0.5);
        let mut t = EstimatingTracker::new(&[0.0], 0.0, 0.0, None);
        for a in [0.1, 0.2, 0.3] {
            t.update_lambda(a);
        }
        assert!((t.lambda() - 0.504).abs() < 1e-15);
    }

    #[test]
    fn psi_values() {
        let t = EstimatingTracker::new(&[0.0], 0.0, 1.0, None);
        assert_eq!(t.eval_psi(&[5.0]), 0.0);
        let t = EstimatingTracker::at(3.0, vec![0.0], vec![entry(0, 1.0, 2.0, vec![0.0])], 0.0);
        assert_eq!(t.eval_psi(&[1.0]), 1.0);
        let t = EstimatingTracker::at(
            3.0,
            vec![0.0],
            vec![entry(0, 0.5, 1.0, vec![1.0]), entry(1, 0.25, 2.0, vec![2.0])],
            0.0,
        );
        assert!((t.eval_psi(&[3.0]) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn argmin_values() {
        let t = EstimatingTracker::at(1.0, vec![2.0, -1.0], vec![], 0.0);
        assert_eq!(t.phi_argmin().unwrap(), vec![2.0, -1.0]);
        let t = EstimatingTracker::at(1.0, vec![2.0], vec![entry(0, 0.5, 1.0, vec![0.0])], 0.0);
        assert!((t.phi_argmin().unwrap()[0] - 4.0).abs() < 1e-15);
        let t = EstimatingTracker::at(1.0, vec![2.0], vec![entry(0, 0.5, 1.0, vec![2.0])], 0.0);
        assert!((t.phi_argmin().unwrap()[0] - 2.0).abs() < 1e-15);
        let t = EstimatingTracker::at(1.0, vec![2.0], vec![entry(0, 1.0, 1.0, vec![0.0])], 0.0);
        assert!(matches!(t.phi_argmin(), Err(DiagnosticsError::FlatScanningFunction { .. })));
    }

    proptest! {
        #[test]
        fn argmin_is_stationary(
            gamma in 0.1f64..10.0,
            frac in 0.0f64..0.95,
            v in proptest::collection::vec(-10.0f64..10.0, 3),
            vi in proptest::collection::vec(-10.0f64..10.0, 3),
        ) {
            let wgamma = frac * gamma;
            let t = EstimatingTracker::at(gamma, v.clone(), vec![entry(0, 1.0, wgamma, vi.clone())], 0.0);
            let x = t.phi_argmin().unwrap();
            // ∇Φ(x) = γ(x − v) − Σ βγ_i (x − v_i)
            let residual: Vec<f64> = (0..3).map(|j| gamma * (x[j] - v[j]) - wgamma * (x[j] - vi[j])).collect();
            prop_assert!(norm(&residual) <= 1e-10 * (1.0 + norm(&v)) * gamma.max(1.0) / (1.0 - frac));
        }

        #[test]
        fn psi_is_nonnegative(
            weights in proptest::collection::vec((0.0f64..1.0, 0.0f64..5.0), 0..4),
            x in proptest::collection::vec(-5.0f64..5.0, 2),
        ) {
            let memory = weights.iter().enumerate().map(|(i, &(b, g))| entry(i, b, g, vec![i as f64, -(i as f64)])).collect();
            let t = EstimatingTracker::at(1.0, vec![0.0, 0.0], memory, 0.0);
            prop_assert!(t.eval_psi(&x) >= 0.0);
        }

        #[test]
        fn zero_weights_reduce_to_fgm_recursion(
            phi in -5.0f64..5.0,
            alpha in 0.01f64..0.99,
            gamma in 0.01f64..2.0,
            mu in 0.001f64..1.0,
            f_y in -5.0f64..5.0,
            y in -3.0f64..3.0,
            g in -3.0f64..3.0,
            v in -3.0f64..3.0,
            xphi in -3.0f64..3.0,
        ) {
            let gn = (1.0 - alpha) * gamma + alpha * mu;
            let memory = [entry(0, 0.0, 1.0, vec![1.0]), entry(1, 0.0, 0.5, vec![-2.0])];
            let got = phi_star_next(&PhiStarInputs {
                phi_star: phi, alpha, gamma, gamma_next: gn, mu, f_y,
                y: &[y], grad: &[g], v: &[v], x_phi: &[xphi], memory: &memory,
            });
            let reduced = [
                alpha * f_y,
                (1.0 - alpha) * phi,
                alpha * gamma * (1.0 - alpha) * mu / (2.0 * gn) * (y - v) * (y - v),
                -alpha * alpha * g * g / (2.0 * gn),
                alpha * (1.0 - alpha) * gamma / gn * (v - y) * g,
                (1.0 - alpha) * gamma / 2.0 * (xphi - v) * (xphi - v),
            ];
            let want: f64 = reduced.iter().sum();
            let scale: f64 = reduced.iter().map(|t| t.abs()).sum::<f64>().max(1e-300);
            prop_assert!((got - want).abs() <= 1e-12 * scale, "{} vs {}", got, want);
        }
    }

    #[test]
    fn trivial_recursion_case() {
        let got = phi_star_next(&PhiStarInputs {
            phi_star: 3.0,
            alpha: 0.25,
            gamma: 1.0,
            gamma_next: 0.8,
            mu: 0.1,
            f_y: 2.0,
            y: &[1.5],
            grad: &[0.0],
            v: &[1.5],
            x_phi: &[1.5],
            memory: &[],
        });
        assert_eq!(got, 0.25 * 2.0 + 0.75 * 3.0);
    }

    fn q(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    /// Straight transcription of the recursion in exact rational arithmetic
    /// for a scalar problem with one memory entry (norms are absolute values).
    #[allow(clippy::too_many_arguments)]
    fn exact_phi_next(
        phi: f64, a: f64, g: f64, gn: f64, mu: f64, fy: f64, y: f64, grad: f64, v: f64, xphi: f64,
        idx: usize, beta: f64, gi: f64, vi: f64,
    ) -> BigRational {
        let (phi, a, g, gn, mu, fy, y, grad, v, xphi) =
            (q(phi), q(a), q(g), q(gn), q(mu), q(fy), q(y), q(grad), q(v), q(xphi));
        let w = q(beta) * q(gi);
        let vi = q(vi);
        let one = BigRational::from_integer(BigInt::from(1));
        let two = BigRational::from_integer(BigInt::from(2));
        let om = &one - &a;
        let mu_plus = if idx >= 1 { &mu + &w } else { mu.clone() };
        let sq = |t: &BigRational| t * t;
        let abs = |t: BigRational| t.abs();
        let mut total = BigRational::zero();
        total += &a * &fy;
        total += &om * &phi;
        total += &a * &g * &om * &mu_plus / (&two * &gn) * sq(&(&y - &v));
        total += &a * &a * &a / &gn * &w * abs(&vi - &y) * abs(grad.clone());
        total += &om * &g / &two * sq(&(&xphi - &v));
        total -= &a * &a * sq(&grad) / (&two * &gn);
        total += &a * &om * &g / &gn * ((&v - &y) * &grad + &w * abs(&y - &vi) * abs(&y - &v));
        total += &a * &w / &two * sq(&(&y - &vi));
        total += &om * &a * &a / &gn * &w * (&vi - &y) * &grad;
        total += &w / &two * sq(&(&xphi - &vi));
        total
    }

    #[test]
    fn full_recursion_matches_exact_transcription() {
        let cases = [
            (0.7, 0.3, 0.2, 0.11, 0.05, 1.3, 0.4, -0.9, 1.1, 0.8, 1, 0.5, 0.1, -0.3),
            (2.5, 0.05, 0.01, 0.0025, 0.002, 2.0, -1.0, 0.3, 2.0, 1.7, 0, 1.0, 0.0, 0.5),
            (-1.0, 0.9, 1.0, 0.82, 0.8, -0.5, 0.1, 0.05, -0.2, 0.0, 3, 0.25, 0.6, 0.9),
        ];
        for (phi, a, g, gn, mu, fy, y, grad, v, xphi, idx, beta, gi, vi) in cases {
            let memory = [entry(idx, beta, gi, vec![vi])];
            let inputs = PhiStarInputs {
                phi_star: phi,
                alpha: a,
                gamma: g,
                gamma_next: gn,
                mu,
                f_y: fy,
                y: &[y],
                grad: &[grad],
                v: &[v],
                x_phi: &[xphi],
                memory: &memory,
            };
            let got = phi_star_next(&inputs);
            let want = exact_phi_next(phi, a, g, gn, mu, fy, y, grad, v, xphi, idx, beta, gi, vi);
            let want_f = num_traits::ToPrimitive::to_f64(&want).unwrap();
            let scale: f64 = phi_star_terms(&inputs).iter().map(|t| t.abs()).sum();
            assert!((got - want_f).abs() <= 1e-14 * scale, "{got} vs {want_f}");
        }
    }

    #[test]
    fn premise_at_start() {
        let t = EstimatingTracker::new(&[1.0, 2.0], 4.5, 0.0, None);
        assert_eq!(t.scan_min(), Some(4.5));
        assert!(t.certify_lemma1_premise(4.5));
        assert!(!t.certify_lemma1_premise(4.6));
    }
}
