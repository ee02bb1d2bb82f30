//! Compares all benchmark methods and writes an SVG convergence plot.
//!
//!     cargo run --release --example compare_plot [out.svg]

use sfgm::bench::{build_problem, emit_svg, run_methods, AxesSpec, ComparisonSummary, Loss, ProblemSource, ProblemSpec, Series};
use sfgm::solvers::{SolverConfig, StoppingRule};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "convergence.svg".into());
    let spec = ProblemSpec {
        source: ProblemSource::Diagonal { xi: 3, m: 1000 },
        loss: Loss::Quadratic,
        tau: 0.0,
        seed: 0,
    };
    let built = build_problem(&spec, true).unwrap();
    let methods: Vec<SolverConfig> = SolverConfig::LABELS.iter().map(|l| SolverConfig::from_label(l).unwrap()).collect();
    let stop = StoppingRule::DistToOpt(1e-6);
    let runs = run_methods(&built, &methods, stop, 3000).unwrap();
    print!("{}", ComparisonSummary::new(&runs, stop, built.r0()).to_text());

    let series: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            label: r.label.clone(),
            points: r.output.trace.iter().map(|t| (t.k as f64, t.gap.unwrap())).collect(),
        })
        .collect();
    let axes = AxesSpec {
        title: "diagonal quadratic, kappa = 1e3".into(),
        y_label: "f(x_k) - f*".into(),
        ..AxesSpec::default()
    };
    std::fs::write(&out, emit_svg(&series, &axes).unwrap()).unwrap();
    println!("wrote {out}");
}
