use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::MethodRun;
use crate::solvers::StoppingRule;

/// Label of the method every ratio is taken against.
pub const REFERENCE_METHOD: &str = "fgm-css3";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub label: String,
    pub iterations: usize,
    /// First `k` at which the stopping quantity crossed its threshold.
    pub reached_at: Option<usize>,
    pub final_f: Option<f64>,
    pub final_gap: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub wall_ns: u64,
    /// `reached_at / reached_at(fgm-css3)`, when both crossed.
    pub ratio_vs_reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub stop: StoppingRule,
    pub r0: Option<f64>,
    pub methods: Vec<MethodSummary>,
}

impl ComparisonSummary {
    pub fn new(runs: &[MethodRun], stop: StoppingRule, r0: Option<f64>) -> Self {
        let mut methods: Vec<MethodSummary> = runs
            .iter()
            .map(|run| {
                let trace = &run.output.trace;
                let reached_at = match stop {
                    StoppingRule::GradNorm(eta) => trace.iter().find(|r| r.grad_norm <= eta).map(|r| r.k),
                    StoppingRule::DistToOpt(rho) => r0.and_then(|r0| {
                        trace
                            .iter()
                            .find(|r| r.dist_to_opt.is_some_and(|d| d <= rho * r0))
                            .map(|r| r.k)
                    }),
                    StoppingRule::MaxIters => None,
                };
                let last = trace.last();
                MethodSummary {
                    label: run.label.clone(),
                    iterations: trace.len(),
                    reached_at,
                    final_f: last.map(|r| r.f),
                    final_gap: last.and_then(|r| r.gap),
                    final_grad_norm: last.map(|r| r.grad_norm),
                    wall_ns: last.map_or(0, |r| r.wall_ns),
                    ratio_vs_reference: None,
                }
            })
            .collect();
        let reference = methods
            .iter()
            .find(|m| m.label == REFERENCE_METHOD)
            .and_then(|m| m.reached_at);
        for m in &mut methods {
            m.ratio_vs_reference = match (m.reached_at, reference) {
                (Some(a), Some(b)) if b > 0 => Some(a as f64 / b as f64),
                _ => None,
            };
        }
        ComparisonSummary { stop, r0, methods }
    }

    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.label == label)
    }

    pub fn to_text(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>10} {:>10} {:>14} {:>14} {:>10} {:>12}",
            "method", "iters", "reached", "final_gap", "final_grad", "ratio", "wall_ms"
        );
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{:<16} {:>10} {:>10} {:>14} {:>14} {:>10} {:>12.3}",
                m.label,
                m.iterations,
                m.reached_at.map_or_else(|| "-".into(), |k| k.to_string()),
                cell(m.final_gap),
                cell(m.final_grad_norm),
                m.ratio_vs_reference.map_or_else(|| "-".into(), |r| format!("{r:.4}")),
                m.wall_ns as f64 / 1e6
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut s = String::from("method,iterations,reached_at,final_f,final_gap,final_grad_norm,ratio_vs_fgm_css3,wall_ns\n");
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                m.label,
                m.iterations,
                m.reached_at.map(|k| k.to_string()).unwrap_or_default(),
                opt(m.final_f),
                opt(m.final_gap),
                opt(m.final_grad_norm),
                opt(m.ratio_vs_reference),
                m.wall_ns
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::QuadraticProblem;
    use crate::solvers::{run, SolverConfig};

    fn runs(labels: &[&str], stop: StoppingRule) -> (Vec<MethodRun>, f64) {
        let p = QuadraticProblem::separable(vec![1.0, 0.01, 0.001], vec![0.5, 0.2, 0.9], 0.0).unwrap();
        let t = p.ground_truth(1e-12).unwrap();
        let x0 = [1.0, 1.0, 1.0];
        let out = labels
            .iter()
            .map(|l| MethodRun {
                label: l.to_string(),
                output: run(&p, &SolverConfig::from_label(l).unwrap().with_stop(stop), &x0, Some(&t)).unwrap(),
            })
            .collect();
        (out, t.distance(&x0))
    }

    #[test]
    fn counts_are_first_crossings() {
        let stop = StoppingRule::DistToOpt(1e-6);
        let (r, r0) = runs(&["fgm-css3", "sfgm-last"], stop);
        let s = ComparisonSummary::new(&r, stop, Some(r0));
        for (m, run) in s.methods.iter().zip(&r) {
            let k = m.reached_at.unwrap();
            assert_eq!(k, run.output.trace.len());
            assert!(run.output.trace[k - 1].dist_to_opt.unwrap() <= 1e-6 * r0);
        }
        let ratio = s.method("sfgm-last").unwrap().ratio_vs_reference.unwrap();
        let want = s.methods[1].reached_at.unwrap() as f64 / s.methods[0].reached_at.unwrap() as f64;
        assert_eq!(ratio, want);
        assert_eq!(s.method("fgm-css3").unwrap().ratio_vs_reference, Some(1.0));
    }

    #[test]
    fn single_method_is_valid() {
        let stop = StoppingRule::GradNorm(1e-8);
        let (r, r0) = runs(&["sfgm-last"], stop);
        let s = ComparisonSummary::new(&r, stop, Some(r0));
        assert_eq!(s.methods.len(), 1);
        assert!(s.methods[0].ratio_vs_reference.is_none());
        assert_eq!(s.to_csv().lines().count(), 2);
        assert_eq!(s.to_text().lines().count(), 2);
    }

    #[test]
    fn ratio_needs_both_methods_to_cross() {
        let stop = StoppingRule::GradNorm(1e-300);
        let p = QuadraticProblem::separable(vec![1.0, 1e-4], vec![0.5, 0.2], 0.0).unwrap();
        let out = |l: &str| MethodRun {
            label: l.into(),
            output: run(&p, &SolverConfig::from_label(l).unwrap().with_max_iters(20), &[1.0, 1.0], None).unwrap(),
        };
        let s = ComparisonSummary::new(&[out("fgm-css3"), out("gm")], stop, None);
        assert!(s.methods.iter().all(|m| m.reached_at.is_none() && m.ratio_vs_reference.is_none()));
    }
}
