//! Command-line front end: `solve`, `compare`, `certify` and `bounds`.

use std::collections::HashSet;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{
    build_problem, emit_svg, read_trace_csv, run_methods, write_trace_csv, AxesSpec, BenchError, BuiltProblem,
    ComparisonSummary, ExperimentSpec, Loss, MethodRun, ProblemSource, ProblemSpec, Series,
};
use crate::diagnostics::{
    check_identities, iteration_lower_bounds, run_certified, write_certification_csv, CertificationSummary,
};
use crate::oracle::Objective;
use crate::solvers::{BetaKind, InitialCurvature, SolverConfig, StoppingRule, DEFAULT_MAX_ITERS};

pub const MANIFEST_FILE: &str = "run.json";

#[derive(Debug, Parser)]
#[command(name = "sfgm-bench", version, about = "Benchmark and certify accelerated gradient methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method and write its trace.
    Solve(SolveArgs),
    /// Run several methods from the same start and summarize.
    Compare(CompareArgs),
    /// Re-run methods with the estimating-sequence tracker and check the bounds.
    Certify(CertifyArgs),
    /// Print the iteration-count bounds for given constants.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Diag,
    Gaussian,
    Libsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Quadratic,
    Logistic,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ProblemKind::Diag)]
    pub problem: ProblemKind,
    #[arg(long, value_enum, default_value_t = LossArg::Quadratic)]
    pub loss: LossArg,
    /// LIBSVM file, for `--problem libsvm`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Diagonal family: condition number `10^xi`.
    #[arg(long, default_value_t = 3)]
    pub xi: u32,
    /// Dimension (diag) or number of samples (gaussian).
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Number of features (gaussian).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Ridge weight.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Gaussian logistic problems: binary design with this many ones per row.
    #[arg(long)]
    pub nnz_per_row: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ProblemArgs {
    pub fn spec(&self) -> Result<ProblemSpec, BenchError> {
        let source = match self.problem {
            ProblemKind::Diag => ProblemSource::Diagonal { xi: self.xi, m: self.m },
            ProblemKind::Gaussian => ProblemSource::Gaussian {
                m: self.m,
                n: self.n,
                nnz_per_row: self.nnz_per_row,
            },
            ProblemKind::Libsvm => ProblemSource::Libsvm {
                path: self
                    .data
                    .clone()
                    .ok_or_else(|| BenchError::Usage("--problem libsvm needs --data <file>".into()))?,
            },
        };
        let loss = match self.loss {
            LossArg::Quadratic => Loss::Quadratic,
            LossArg::Logistic => Loss::Logistic,
        };
        Ok(ProblemSpec {
            source,
            loss,
            tau: self.tau,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Stop once the gradient norm at the extrapolated point is at most this.
    #[arg(long, conflicts_with = "tol_dist")]
    pub tol_grad: Option<f64>,
    /// Stop once `‖x_k − x*‖ ≤ tol·‖x₀ − x*‖`.
    #[arg(long)]
    pub tol_dist: Option<f64>,
    /// Output directory.
    #[arg(long, env = "SFGM_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn stop(&self) -> Result<StoppingRule, BenchError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(BenchError::Usage(format!("--{name} must be positive, got {v}")))
            }
        };
        Ok(match (self.tol_grad, self.tol_dist) {
            (Some(g), _) => StoppingRule::GradNorm(positive("tol-grad", g)?),
            (None, Some(d)) => StoppingRule::DistToOpt(positive("tol-dist", d)?),
            (None, None) => StoppingRule::MaxIters,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// A benchmark label (gm, fgm-css1, fgm-css3, sfgm-memless, sfgm-last) or
    /// `sfgm` for a custom schedule set by --beta and --gamma0.
    #[arg(long, default_value = "sfgm-last")]
    pub method: String,
    /// Memory schedule for `--method sfgm`: zero, first, last or window:W.
    #[arg(long)]
    pub beta: Option<String>,
    /// Starting curvature for `--method sfgm`: mu, L or a number.
    #[arg(long)]
    pub gamma0: Option<String>,
    /// Also certify the run and write `<label>.cert.csv`.
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated benchmark labels.
    #[arg(long, value_delimiter = ',', default_values_t = SolverConfig::LABELS.map(String::from))]
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// Directory written by `solve` or `compare`; its manifest replaces the
    /// problem and method flags.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values_t = SolverConfig::LABELS.map(String::from))]
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long = "L")]
    pub lipschitz: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub r0: f64,
    #[arg(long)]
    pub eps: f64,
    /// Memory mass `Σβγ`; defaults to `mu`, the asymptotic value.
    #[arg(long)]
    pub s: Option<f64>,
}

/// What `run.json` records about an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentSpec,
    pub lipschitz: f64,
    pub mu: f64,
    pub r0: Option<f64>,
}

pub fn parse_beta(s: &str) -> Result<BetaKind, BenchError> {
    Ok(match s {
        "zero" => BetaKind::Zero,
        "first" => BetaKind::FirstTerm,
        "last" => BetaKind::LastTerm,
        _ => match s.strip_prefix("window:").and_then(|w| w.parse::<usize>().ok()) {
            Some(w) if w > 0 => BetaKind::Window(w),
            _ => return Err(BenchError::Usage(format!("bad --beta {s:?}; expected zero, first, last or window:W"))),
        },
    })
}

pub fn parse_gamma0(s: &str) -> Result<InitialCurvature, BenchError> {
    Ok(match s {
        "mu" => InitialCurvature::StrongConvexity,
        "L" => InitialCurvature::Lipschitz,
        _ => match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => InitialCurvature::Value(v),
            _ => return Err(BenchError::Usage(format!("bad --gamma0 {s:?}; expected mu, L or a number >= 0"))),
        },
    })
}

fn method_config(label: &str) -> Result<SolverConfig, BenchError> {
    SolverConfig::from_label(label).ok_or_else(|| {
        BenchError::Usage(format!("unknown method {label:?}; expected one of {}", SolverConfig::LABELS.join(", ")))
    })
}

fn solve_config(args: &SolveArgs) -> Result<SolverConfig, BenchError> {
    if args.method == "sfgm" {
        let beta = parse_beta(args.beta.as_deref().unwrap_or("last"))?;
        let gamma0 = parse_gamma0(args.gamma0.as_deref().unwrap_or("0"))?;
        return Ok(SolverConfig::sfgm(beta, gamma0));
    }
    if args.beta.is_some() || args.gamma0.is_some() {
        return Err(BenchError::Usage("--beta and --gamma0 apply to --method sfgm only".into()));
    }
    method_config(&args.method)
}

fn method_list(labels: &[String]) -> Result<Vec<SolverConfig>, BenchError> {
    if labels.is_empty() {
        return Err(BenchError::Usage("--methods is empty".into()));
    }
    labels.iter().map(|l| method_config(l)).collect()
}

fn check_unique(methods: &[SolverConfig]) -> Result<(), BenchError> {
    let mut seen = HashSet::new();
    for m in methods {
        if !seen.insert(m.label()) {
            return Err(BenchError::Usage(format!("method {} listed twice", m.label())));
        }
    }
    Ok(())
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>, BenchError> {
    Ok(BufWriter::new(fs::File::create(path).map_err(BenchError::io(path))?))
}

fn write_text(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(BenchError::io(path))
}

fn prepare(spec: &ExperimentSpec, need_truth: bool) -> Result<BuiltProblem, BenchError> {
    check_unique(&spec.methods)?;
    let built = build_problem(&spec.problem, need_truth || matches!(spec.stop, StoppingRule::DistToOpt(_)))?;
    for m in &spec.methods {
        m.validate(&built.problem)?;
    }
    fs::create_dir_all(&spec.output_dir).map_err(BenchError::io(&spec.output_dir))?;
    let manifest = RunManifest {
        experiment: spec.clone(),
        lipschitz: built.problem.lipschitz(),
        mu: built.problem.strong_convexity(),
        r0: built.r0(),
    };
    let path = spec.output_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&path, &(json + "\n"))?;
    log::info!(
        "{}: n = {}, L = {:e}, mu = {:e}",
        built.problem.kind(),
        built.problem.dim(),
        manifest.lipschitz,
        manifest.mu
    );
    Ok(built)
}

fn write_trace(dir: &Path, run: &MethodRun) -> Result<(), BenchError> {
    let path = dir.join(format!("{}.trace.csv", run.label));
    let mut w = create_file(&path)?;
    write_trace_csv(&run.output.trace, &mut w)
        .and_then(|_| w.flush())
        .map_err(BenchError::io(&path))
}

fn certify_methods(
    spec: &ExperimentSpec,
    built: &BuiltProblem,
    stored_dir: Option<&Path>,
) -> Result<CertificationSummary, BenchError> {
    let lipschitz = built.problem.lipschitz();
    let mut total = CertificationSummary::default();
    println!(
        "{:<16} {:>8} {:>6} {:>12} {:>12} {:>12} {:>8}",
        "method", "reports", "hard", "lambda>exp", "gap>bound", "premise", "clamps"
    );
    for config in &spec.methods {
        let config = config.clone().with_stop(spec.stop).with_max_iters(spec.max_iters);
        let label = config.label();
        let certified = run_certified(&built.problem, &config, &built.x0, built.truth.as_ref())?;
        let mut summary = certified.summary.clone();
        if let Some(dir) = stored_dir {
            let path = dir.join(format!("{label}.trace.csv"));
            let file = fs::File::open(&path).map_err(BenchError::io(&path))?;
            let stored = read_trace_csv(BufReader::new(file)).map_err(|msg| BenchError::BadArtifact {
                path: path.clone(),
                msg,
            })?;
            summary.hard.merge(&check_identities(&stored, lipschitz));
            let same = stored.len() == certified.output.trace.len()
                && stored.iter().zip(&certified.output.trace).all(|(a, b)| a.f.to_bits() == b.f.to_bits());
            if !same {
                log::warn!("{label}: stored trace differs from the re-run");
            }
        }
        let path = spec.output_dir.join(format!("{label}.cert.csv"));
        let mut w = create_file(&path)?;
        write_certification_csv(&certified.reports, &mut w)
            .and_then(|_| w.flush())
            .map_err(BenchError::io(&path))?;
        println!(
            "{:<16} {:>8} {:>6} {:>12} {:>12} {:>12} {:>8}",
            label,
            summary.reports,
            summary.hard.total(),
            summary.lemma4_violations,
            summary.theorem1_violations,
            format!("{}/{}", summary.lemma1_checked - summary.lemma1_failures, summary.lemma1_checked),
            summary.clamp_events
        );
        if let Some(first) = &summary.hard.first {
            log::error!("{label}: {first}");
        }
        total.merge(&summary);
    }
    Ok(total)
}

fn finish_certification(summary: &CertificationSummary) -> Result<(), BenchError> {
    if summary.passed() {
        Ok(())
    } else {
        Err(BenchError::HardViolations(summary.hard.total()))
    }
}

pub fn solve(args: &SolveArgs) -> Result<(), BenchError> {
    let config = solve_config(args)?;
    let spec = ExperimentSpec {
        problem: args.problem.spec()?,
        methods: vec![config],
        stop: args.run.stop()?,
        max_iters: args.run.max_iters,
        output_dir: args.run.out.clone(),
    };
    let built = prepare(&spec, args.certify)?;
    let runs = run_methods(&built, &spec.methods, spec.stop, spec.max_iters)?;
    write_trace(&spec.output_dir, &runs[0])?;
    print!("{}", ComparisonSummary::new(&runs, spec.stop, built.r0()).to_text());
    if args.certify {
        finish_certification(&certify_methods(&spec, &built, None)?)?;
    }
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<(), BenchError> {
    let spec = ExperimentSpec {
        problem: args.problem.spec()?,
        methods: method_list(&args.methods)?,
        stop: args.run.stop()?,
        max_iters: args.run.max_iters,
        output_dir: args.run.out.clone(),
    };
    let built = prepare(&spec, false)?;
    let runs = run_methods(&built, &spec.methods, spec.stop, spec.max_iters)?;
    for run in &runs {
        write_trace(&spec.output_dir, run)?;
    }
    let summary = ComparisonSummary::new(&runs, spec.stop, built.r0());
    let text = summary.to_text();
    write_text(&spec.output_dir.join("summary.txt"), &text)?;
    write_text(&spec.output_dir.join("summary.csv"), &summary.to_csv())?;
    print!("{text}");

    let has_gap = built.truth.is_some();
    let series: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            label: r.label.clone(),
            points: r
                .output
                .trace
                .iter()
                .map(|rec| (rec.k as f64, if has_gap { rec.gap.unwrap_or(f64::NAN) } else { rec.grad_norm }))
                .collect(),
        })
        .collect();
    let axes = AxesSpec {
        title: format!("{} problem, n = {}", built.problem.kind(), built.problem.dim()),
        y_label: if has_gap { "f(x_k) - f*".into() } else { "gradient norm".into() },
        ..AxesSpec::default()
    };
    match emit_svg(&series, &axes) {
        Ok(svg) => write_text(&spec.output_dir.join("convergence.svg"), &svg)?,
        Err(BenchError::EmptyPlot) => log::warn!("no positive values to plot; convergence.svg not written"),
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn certify(args: &CertifyArgs) -> Result<(), BenchError> {
    let (spec, stored) = match &args.trace_dir {
        Some(dir) => {
            let path = dir.join(MANIFEST_FILE);
            let text = fs::read_to_string(&path).map_err(BenchError::io(&path))?;
            let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| BenchError::BadArtifact {
                path: path.clone(),
                msg: e.to_string(),
            })?;
            let mut spec = manifest.experiment;
            spec.output_dir = args.run.out.clone();
            (spec, Some(dir.as_path()))
        }
        None => (
            ExperimentSpec {
                problem: args.problem.spec()?,
                methods: method_list(&args.methods)?,
                stop: args.run.stop()?,
                max_iters: args.run.max_iters,
                output_dir: args.run.out.clone(),
            },
            None,
        ),
    };
    let built = prepare(&spec, true)?;
    let summary = certify_methods(&spec, &built, stored)?;
    finish_certification(&summary)
}

pub fn bounds(args: &BoundsArgs) -> Result<(), BenchError> {
    let s = args.s.unwrap_or(args.mu);
    let b = iteration_lower_bounds(args.lipschitz, args.mu, s, args.r0, args.eps)?;
    let rows = [
        ("k_sfgm", b.sfgm),
        ("k_sfgm_asymptotic", b.sfgm_asymptotic),
        ("k_fgm", b.fgm),
        ("k_lower", b.lower),
        ("fgm_over_sfgm_asymptotic", b.fgm_over_sfgm_asymptotic()),
    ];
    println!("{:<26} {:>26}", "bound", "iterations");
    for (name, v) in rows {
        println!("{name:<26} {:>26}", format!("{v:?}"));
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), BenchError> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare(a),
        Command::Certify(a) => certify(a),
        Command::Bounds(a) => bounds(a),
    }
}
