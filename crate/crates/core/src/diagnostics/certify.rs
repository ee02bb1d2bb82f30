use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::bounds::{lemma4_bounds, theorem1_bound};
use super::tracker::EstimatingTracker;
use super::{certification_slack, DiagnosticsError};
use crate::oracle::{GroundTruth, Objective};
use crate::solvers::{peek_memory, run_observed, IterationRecord, RunOutput, SolverConfig};

pub const CERTIFICATION_CSV_HEADER: &str = "k,lambda,lemma4_exp,lemma4_poly,thm1_bound,gap,violated";

/// Bound checks at one index `k` of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub lambda: f64,
    pub lemma4_exp_bound: f64,
    pub lemma4_poly_bound: f64,
    /// Relaxed bound `λ_k (f₀ − f* + γ₀R₀²/2)`; needs a ground truth.
    pub theorem1_bound: Option<f64>,
    /// The bound including `−(1 − λ_k) ψ_k(x*)`.
    pub theorem1_full: Option<f64>,
    pub observed_gap: Option<f64>,
    /// `λ_k` above the exponential bound.
    pub lemma4_violated: bool,
    /// Gap above the relaxed bound.
    pub theorem1_violated: bool,
    pub violated: bool,
    /// Slack granted to the gap comparison (or to the `λ` comparison without a truth).
    pub slack: f64,
}

/// Counts of broken algebraic identities in a trace. Any nonzero count is a hard failure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityViolations {
    /// `λ_k ≠ ∏ (1 − α_i)` beyond relative `1e-12`.
    pub lambda_recursion: usize,
    /// `γ_k ≠ L α_{k−1}²` beyond relative `1e-10`.
    pub gamma_identity: usize,
    /// `Σ β γ_i > min(γ, μ) + 1e-12`.
    pub feasibility: usize,
    /// `f(x_{k+1}) > f(y_k) − ‖∇f(y_k)‖²/(2L) + 1e-9 (1 + |f(y_k)|)`.
    pub descent: usize,
    /// Description of the first violation.
    pub first: Option<String>,
}

impl IdentityViolations {
    pub fn total(&self) -> usize {
        self.lambda_recursion + self.gamma_identity + self.feasibility + self.descent
    }

    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first.is_none() {
            self.first = Some(msg());
        }
    }

    pub fn merge(&mut self, other: &IdentityViolations) {
        self.lambda_recursion += other.lambda_recursion;
        self.gamma_identity += other.gamma_identity;
        self.feasibility += other.feasibility;
        self.descent += other.descent;
        if self.first.is_none() {
            self.first.clone_from(&other.first);
        }
    }
}

/// Checks the hard identities on every record of `trace`. Fields that are NaN
/// (for example `f_y` in a trace read back from CSV) skip the check that needs them.
pub fn check_identities(trace: &[IterationRecord], lipschitz: f64) -> IdentityViolations {
    let mut out = IdentityViolations::default();
    let mut product = 1.0_f64;
    for r in trace {
        product *= 1.0 - r.alpha;
        if !((r.lambda - product).abs() <= 1e-12 * product.abs()) {
            out.lambda_recursion += 1;
            out.note(|| format!("k={}: lambda {:e} != product {:e}", r.k, r.lambda, product));
        }
        let target = lipschitz * r.alpha * r.alpha;
        if !((r.gamma - target).abs() <= 1e-10 * r.gamma.abs().max(target.abs())) {
            out.gamma_identity += 1;
            out.note(|| format!("k={}: gamma {:e} != L*alpha^2 {:e}", r.k, r.gamma, target));
        }
        if !r.beta_gamma_sum.is_nan() && r.beta_gamma_sum > r.feasibility_bound + 1e-12 {
            out.feasibility += 1;
            out.note(|| {
                format!(
                    "k={}: sum beta*gamma {:e} > min(gamma, mu) {:e}",
                    r.k, r.beta_gamma_sum, r.feasibility_bound
                )
            });
        }
        if !r.f_y.is_nan() {
            let bound = r.f_y - r.grad_norm * r.grad_norm / (2.0 * lipschitz) + 1e-9 * (1.0 + r.f_y.abs());
            if r.f > bound {
                out.descent += 1;
                out.note(|| format!("k={}: f {:e} above descent bound {:e}", r.k, r.f, bound));
            }
        }
    }
    out
}

/// One report per index `k = 0, …, K` of a finished, tracked run.
pub fn certify_run(
    trace: &[IterationRecord],
    tracker: &EstimatingTracker,
    mu: f64,
    lipschitz: f64,
) -> Result<Vec<BoundReport>, DiagnosticsError> {
    let rows = tracker.rows();
    if rows.len() != trace.len() + 1 {
        return Err(DiagnosticsError::InvalidInput(format!(
            "tracker has {} rows for a trace of {} records; call finish() first",
            rows.len(),
            trace.len()
        )));
    }
    let truth = tracker.truth();
    let r0 = truth.map(|t| t.distance(tracker.x0()));
    let mut reports = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let lambda = if k == 0 { 1.0 } else { trace[k - 1].lambda };
        let f_x = if k == 0 { tracker.f0() } else { trace[k - 1].f };
        let (exp, poly) = lemma4_bounds(k, mu, lipschitz, row.beta_gamma_sum);
        let lemma4_violated = mu > 0.0 && lambda > exp + certification_slack(exp);
        let (thm1, gap) = match (truth, r0) {
            (Some(t), Some(r0)) => {
                let b = theorem1_bound(
                    lambda,
                    tracker.f0(),
                    t.f_star,
                    tracker.gamma0(),
                    r0,
                    row.psi_at_truth.unwrap_or(0.0),
                );
                (Some(b), Some(f_x - t.f_star))
            }
            _ => (None, None),
        };
        let slack = match thm1 {
            Some(b) => certification_slack(b.relaxed),
            None => certification_slack(exp),
        };
        let theorem1_violated = matches!((thm1, gap), (Some(b), Some(g)) if g > b.relaxed + slack);
        reports.push(BoundReport {
            k,
            lambda,
            lemma4_exp_bound: exp,
            lemma4_poly_bound: poly,
            theorem1_bound: thm1.map(|b| b.relaxed),
            theorem1_full: thm1.map(|b| b.full),
            observed_gap: gap,
            lemma4_violated,
            theorem1_violated,
            violated: lemma4_violated || theorem1_violated,
            slack,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationSummary {
    pub reports: usize,
    pub hard: IdentityViolations,
    pub lemma4_violations: usize,
    pub theorem1_violations: usize,
    /// Gap above the bound that keeps the `ψ_k(x*)` term.
    pub theorem1_full_violations: usize,
    pub lemma1_checked: usize,
    pub lemma1_failures: usize,
    pub clamp_events: usize,
}

impl CertificationSummary {
    pub fn from_parts(reports: &[BoundReport], tracker: &EstimatingTracker, hard: IdentityViolations) -> Self {
        let premises: Vec<bool> = tracker.rows().iter().filter_map(|r| r.premise_holds).collect();
        CertificationSummary {
            reports: reports.len(),
            hard,
            lemma4_violations: reports.iter().filter(|r| r.lemma4_violated).count(),
            theorem1_violations: reports.iter().filter(|r| r.theorem1_violated).count(),
            theorem1_full_violations: reports
                .iter()
                .filter(|r| matches!((r.theorem1_full, r.observed_gap), (Some(b), Some(g)) if g > b + r.slack))
                .count(),
            lemma1_checked: premises.len(),
            lemma1_failures: premises.iter().filter(|ok| !**ok).count(),
            clamp_events: 0,
        }
    }

    /// True when no hard identity is broken; bound violations do not count.
    pub fn passed(&self) -> bool {
        self.hard.total() == 0
    }

    pub fn merge(&mut self, other: &CertificationSummary) {
        self.reports += other.reports;
        self.hard.merge(&other.hard);
        self.lemma4_violations += other.lemma4_violations;
        self.theorem1_violations += other.theorem1_violations;
        self.theorem1_full_violations += other.theorem1_full_violations;
        self.lemma1_checked += other.lemma1_checked;
        self.lemma1_failures += other.lemma1_failures;
        self.clamp_events += other.clamp_events;
    }
}

impl fmt::Display for CertificationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "reports                 {}", self.reports)?;
        writeln!(f, "hard: lambda recursion  {}", self.hard.lambda_recursion)?;
        writeln!(f, "hard: gamma = L a^2     {}", self.hard.gamma_identity)?;
        writeln!(f, "hard: feasibility       {}", self.hard.feasibility)?;
        writeln!(f, "hard: descent           {}", self.hard.descent)?;
        writeln!(f, "lambda above exp bound  {}", self.lemma4_violations)?;
        writeln!(f, "gap above relaxed bound {}", self.theorem1_violations)?;
        writeln!(f, "gap above full bound    {}", self.theorem1_full_violations)?;
        writeln!(f, "premise f <= Phi*       {}/{} hold", self.lemma1_checked - self.lemma1_failures, self.lemma1_checked)?;
        write!(f, "memory clamp events     {}", self.clamp_events)?;
        if let Some(first) = &self.hard.first {
            write!(f, "\nfirst hard violation    {first}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CertifiedRun {
    pub output: RunOutput,
    pub tracker: EstimatingTracker,
    pub reports: Vec<BoundReport>,
    pub summary: CertificationSummary,
}

/// Runs `config` with an [`EstimatingTracker`] attached and certifies the result.
pub fn run_certified<O: Objective + ?Sized>(
    oracle: &O,
    config: &SolverConfig,
    x0: &[f64],
    truth: Option<&GroundTruth>,
) -> Result<CertifiedRun, DiagnosticsError> {
    let mut tracker = EstimatingTracker::new(x0, f64::NAN, 0.0, truth.cloned());
    let output = run_observed(oracle, config, x0, truth, Some(&mut tracker))?;
    let (next_memory, _) = peek_memory(config, &output.state)?;
    tracker.finish(output.state.k, next_memory);
    let (mu, lipschitz) = (output.state.mu, output.state.lipschitz);
    let reports = certify_run(&output.trace, &tracker, mu, lipschitz)?;
    let hard = check_identities(&output.trace, lipschitz);
    let mut summary = CertificationSummary::from_parts(&reports, &tracker, hard);
    summary.clamp_events = output.state.clamp_events;
    Ok(CertifiedRun {
        output,
        tracker,
        reports,
        summary,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_certification_csv<W: Write>(reports: &[BoundReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CERTIFICATION_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{},{},{}",
            r.k,
            r.lambda,
            r.lemma4_exp_bound,
            r.lemma4_poly_bound,
            opt(r.theorem1_bound),
            opt(r.observed_gap),
            r.violated
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::QuadraticProblem;
    use crate::solvers::StoppingRule;

    fn problem(d: Vec<f64>) -> (QuadraticProblem, GroundTruth) {
        let n = d.len();
        let center: Vec<f64> = (0..n).map(|i| 0.1 * i as f64).collect();
        let p = QuadraticProblem::separable(d, center, 0.0).unwrap();
        let t = p.ground_truth(1e-12).unwrap();
        (p, t)
    }

    #[test]
    fn unit_condition_single_step_is_clean() {
        let (p, t) = problem(vec![1.0, 1.0]);
        for label in SolverConfig::LABELS {
            let config = SolverConfig::from_label(label).unwrap().with_max_iters(1);
            let run = run_certified(&p, &config, &[1.0, -1.0], Some(&t)).unwrap();
            assert_eq!(run.reports.len(), 2);
            assert!(run.summary.passed(), "{label}: {}", run.summary);
            assert_eq!(run.summary.theorem1_violations, 0, "{label}");
            assert!(run.reports.iter().all(|r| !r.theorem1_violated), "{label}");
        }
    }

    #[test]
    fn fgm_identities_and_theorem1_hold() {
        let (p, t) = problem(vec![1.0, 0.1, 1e-3]);
        let config = SolverConfig::fgm_css3().with_max_iters(2000);
        let run = run_certified(&p, &config, &[1.0, 1.0, 1.0], Some(&t)).unwrap();
        assert!(run.summary.passed(), "{}", run.summary);
        assert_eq!(run.summary.theorem1_violations, 0);
        // λ_k is recomputed independently by the tracker
        for (row, rec) in run.tracker.rows()[1..].iter().zip(&run.output.trace) {
            assert!((row.lambda - rec.lambda).abs() <= 1e-12 * rec.lambda);
        }
        assert_eq!(run.summary.lemma1_failures, 0, "{}", run.summary);
    }

    #[test]
    fn corrupted_lambda_is_flagged() {
        let (p, t) = problem(vec![1.0, 0.01]);
        let config = SolverConfig::sfgm_last().with_max_iters(50);
        let mut run = run_certified(&p, &config, &[1.0, 1.0], Some(&t)).unwrap();
        run.output.trace[20].lambda *= 10.0;
        let hard = check_identities(&run.output.trace, p.lipschitz());
        assert_eq!(hard.lambda_recursion, 1);
        let reports = certify_run(&run.output.trace, &run.tracker, p.strong_convexity(), p.lipschitz()).unwrap();
        assert!(reports[21].lemma4_violated);
    }

    #[test]
    fn corrupted_gamma_and_descent_are_flagged() {
        let (p, t) = problem(vec![1.0, 0.01]);
        let config = SolverConfig::sfgm_last().with_max_iters(10);
        let run = run_certified(&p, &config, &[1.0, 1.0], Some(&t)).unwrap();
        let mut trace = run.output.trace.clone();
        trace[3].gamma *= 1.0 + 1e-6;
        trace[4].f += 1.0;
        trace[5].beta_gamma_sum = trace[5].feasibility_bound + 1e-9;
        let hard = check_identities(&trace, p.lipschitz());
        assert_eq!((hard.gamma_identity, hard.descent, hard.feasibility), (1, 1, 1));
        assert!(hard.first.unwrap().starts_with("k=4"));
    }

    #[test]
    fn tracker_lengths_are_checked() {
        let (p, t) = problem(vec![1.0]);
        let config = SolverConfig::gm().with_max_iters(3);
        let run = run_certified(&p, &config, &[1.0], Some(&t)).unwrap();
        assert!(certify_run(&run.output.trace[..2], &run.tracker, 1.0, 1.0).is_err());
    }

    #[test]
    fn csv_shape() {
        let (p, t) = problem(vec![1.0, 0.5]);
        let config = SolverConfig::fgm_css1().with_stop(StoppingRule::GradNorm(1e-3));
        let run = run_certified(&p, &config, &[1.0, 1.0], Some(&t)).unwrap();
        let mut buf = Vec::new();
        write_certification_csv(&run.reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CERTIFICATION_CSV_HEADER);
        assert_eq!(lines.len(), run.reports.len() + 1);
        assert!(lines[1].starts_with("0,1.0,"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 7);
        }
    }
}
