//! Experiment harness: problem construction from a spec, method comparison,
//! CSV traces, summary tables and SVG convergence plots.

pub mod cli;
mod summary;
mod svg;
mod trace;

pub use summary::{ComparisonSummary, MethodSummary};
pub use svg::{emit_svg, AxesSpec, Series};
pub use trace::{read_trace_csv, write_trace_csv, TRACE_CSV_HEADER};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{self, DataError};
use crate::diagnostics::DiagnosticsError;
use crate::oracle::{default_ground_truth_tol, GroundTruth, Objective, OracleError, Problem};
use crate::solvers::{RunOutput, SolverConfig, SolverError, StoppingRule};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("certification failed: {0} hard violation(s)")]
    HardViolations(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    BadArtifact { path: PathBuf, msg: String },
    #[error("nothing to plot: every series is empty")]
    EmptyPlot,
}

impl BenchError {
    /// Process exit status: 2 usage, 3 parse, 4 stall, 5 hard certification
    /// violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Diagnostics(DiagnosticsError::ValidityDomain { .. } | DiagnosticsError::InvalidInput(_)) => 2,
            BenchError::Data(DataError::InvalidSpec(_)) => 2,
            BenchError::Solver(SolverError::InvalidConfig(_)) => 2,
            BenchError::Diagnostics(DiagnosticsError::Solver(SolverError::InvalidConfig(_))) => 2,
            BenchError::Data(DataError::Parse { .. }) | BenchError::BadArtifact { .. } => 3,
            BenchError::Solver(SolverError::Stall { .. }) => 4,
            BenchError::Diagnostics(DiagnosticsError::Solver(SolverError::Stall { .. })) => 4,
            BenchError::HardViolations(_) => 5,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
        let path = path.into();
        move |source| BenchError::Io { path, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Quadratic,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProblemSource {
    /// Diagonal quadratic with `κ = 10^ξ`.
    Diagonal { xi: u32, m: usize },
    /// Standard normal design; for the logistic loss labels come from a planted
    /// model and `nnz_per_row` selects a sparse binary design.
    Gaussian {
        m: usize,
        n: usize,
        nnz_per_row: Option<usize>,
    },
    Libsvm { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub source: ProblemSource,
    pub loss: Loss,
    /// Ridge `τ`; also `μ` for non-diagonal problems.
    pub tau: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub methods: Vec<SolverConfig>,
    pub stop: StoppingRule,
    pub max_iters: usize,
    pub output_dir: PathBuf,
}

/// A problem ready to run: oracle, optional ground truth and the shared `x₀`.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: Problem,
    pub truth: Option<GroundTruth>,
    pub x0: Vec<f64>,
}

impl BuiltProblem {
    /// `‖x₀ − x*‖` when the ground truth is known.
    pub fn r0(&self) -> Option<f64> {
        self.truth.as_ref().map(|t| t.distance(&self.x0))
    }
}

pub fn build_problem(spec: &ProblemSpec, with_truth: bool) -> Result<BuiltProblem, BenchError> {
    if !(spec.tau.is_finite() && spec.tau >= 0.0) {
        return Err(BenchError::Usage(format!("--tau must be finite and nonnegative, got {}", spec.tau)));
    }
    let (problem, truth): (Problem, Option<GroundTruth>) = match (&spec.source, spec.loss) {
        (ProblemSource::Diagonal { xi, m }, Loss::Quadratic) => {
            if spec.tau != 0.0 {
                log::warn!("--tau is ignored for the diagonal family (mu = 10^-xi)");
            }
            let (p, t) = data::gen_diagonal_quadratic(*xi, *m, spec.seed).map_err(|e| match e {
                DataError::InvalidSpec(msg) => BenchError::Usage(msg),
                other => other.into(),
            })?;
            (p.into(), Some(t))
        }
        (ProblemSource::Diagonal { .. }, Loss::Logistic) => {
            return Err(BenchError::Usage("the diagonal family is quadratic only".into()))
        }
        (ProblemSource::Gaussian { m, n, nnz_per_row }, Loss::Quadratic) => {
            if nnz_per_row.is_some() {
                return Err(BenchError::Usage("--nnz-per-row applies to the logistic loss only".into()));
            }
            (data::gen_gaussian_ls(*m, *n, spec.tau, spec.seed)?.into(), None)
        }
        (ProblemSource::Gaussian { m, n, nnz_per_row }, Loss::Logistic) => {
            let ds = data::gen_classification(*m, *n, *nnz_per_row, spec.seed)?;
            (ds.logistic(spec.tau)?.into(), None)
        }
        (ProblemSource::Libsvm { path }, loss) => {
            let file = std::fs::File::open(path).map_err(BenchError::io(path))?;
            let ds = data::parse_libsvm(std::io::BufReader::new(file), &path.display().to_string(), None)?;
            match loss {
                Loss::Quadratic => (ds.quadratic(spec.tau)?.into(), None),
                Loss::Logistic => (ds.logistic(spec.tau)?.into(), None),
            }
        }
    };
    let truth = match truth {
        Some(t) => Some(t),
        None if with_truth => {
            let tol = default_ground_truth_tol(&problem);
            Some(problem.ground_truth(tol)?)
        }
        None => None,
    };
    let x0 = data::start_point(problem.dim(), spec.seed);
    Ok(BuiltProblem { problem, truth, x0 })
}

/// Result of one method within an experiment.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub label: String,
    pub output: RunOutput,
}

/// Runs every method from the same `x₀`, concurrently, in input order.
pub fn run_methods(
    built: &BuiltProblem,
    methods: &[SolverConfig],
    stop: StoppingRule,
    max_iters: usize,
) -> Result<Vec<MethodRun>, BenchError> {
    let results: Vec<Result<MethodRun, SolverError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|m| {
                let config = m.clone().with_stop(stop).with_max_iters(max_iters);
                scope.spawn(move || {
                    crate::solvers::run(&built.problem, &config, &built.x0, built.truth.as_ref()).map(|output| {
                        MethodRun {
                            label: config.label(),
                            output,
                        }
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    results.into_iter().map(|r| r.map_err(BenchError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_spec(xi: u32, m: usize) -> ProblemSpec {
        ProblemSpec {
            source: ProblemSource::Diagonal { xi, m },
            loss: Loss::Quadratic,
            tau: 0.0,
            seed: 3,
        }
    }

    #[test]
    fn methods_share_the_start_point() {
        let built = build_problem(&diag_spec(2, 30), true).unwrap();
        let methods: Vec<SolverConfig> = SolverConfig::LABELS.iter().map(|l| SolverConfig::from_label(l).unwrap()).collect();
        let runs = run_methods(&built, &methods, StoppingRule::MaxIters, 5).unwrap();
        assert_eq!(runs.len(), 5);
        let f0 = built.problem.value(&built.x0);
        for r in &runs {
            assert_eq!(r.output.trace.len(), 5);
            // every method starts from x₀ and never increases f in its first
            // step on this well-conditioned problem
            assert!(r.output.trace[0].f <= f0, "{}", r.label);
        }
        assert_eq!(runs.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(), SolverConfig::LABELS);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(BenchError::Usage("x".into()).exit_code(), 2);
        assert_eq!(BenchError::Data(DataError::Parse { line: 1, msg: "m".into() }).exit_code(), 3);
        assert_eq!(BenchError::Solver(SolverError::Stall { k: 1, f: 0.0 }).exit_code(), 4);
        assert_eq!(BenchError::HardViolations(1).exit_code(), 5);
        let v = DiagnosticsError::ValidityDomain { eps: 1.0, limit: 0.5 };
        assert_eq!(BenchError::Diagnostics(v).exit_code(), 2);
    }

    #[test]
    fn logistic_problems_build() {
        let spec = ProblemSpec {
            source: ProblemSource::Gaussian {
                m: 40,
                n: 10,
                nnz_per_row: Some(3),
            },
            loss: Loss::Logistic,
            tau: 1e-2,
            seed: 1,
        };
        let built = build_problem(&spec, true).unwrap();
        assert_eq!(built.problem.kind(), "logistic");
        assert!(built.truth.unwrap().residual_grad_norm <= 1e-9);
        assert!(build_problem(&ProblemSpec { loss: Loss::Logistic, ..diag_spec(2, 4) }, false).is_err());
    }
}
