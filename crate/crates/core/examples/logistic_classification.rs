//! Ridge logistic regression to a gradient tolerance.
//!
//!     cargo run --release --example logistic_classification [file.libsvm] [tau]
//!
//! Without a file, a synthetic binary problem shaped like a1a is used.

use sfgm::bench::{run_methods, BuiltProblem, ComparisonSummary};
use sfgm::data::{dataset_stats, gen_classification, parse_libsvm, start_point};
use sfgm::oracle::{Objective, Problem};
use sfgm::solvers::{SolverConfig, StoppingRule};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next();
    let tau: f64 = args.next().map_or(1e-6, |t| t.parse().expect("tau"));

    let ds = match &path {
        Some(p) => {
            let file = std::fs::File::open(p).expect("open dataset");
            parse_libsvm(std::io::BufReader::new(file), p, None).unwrap()
        }
        None => gen_classification(1605, 123, Some(14), 0).unwrap(),
    };
    let stats = dataset_stats(&ds);
    println!("{}: m = {}, n = {}, nnz = {}", ds.source, stats.m, stats.n, stats.nnz);

    let problem = Problem::from(ds.logistic(tau).unwrap());
    println!("L = {:.6e}, mu = {:.1e}", problem.lipschitz(), problem.strong_convexity());
    let built = BuiltProblem {
        x0: start_point(problem.dim(), 0),
        problem,
        truth: None,
    };
    let stop = StoppingRule::GradNorm(1e-6);
    let methods = [SolverConfig::fgm_css3(), SolverConfig::sfgm_memoryless(), SolverConfig::sfgm_last()];
    let runs = run_methods(&built, &methods, stop, 2_000_000).unwrap();
    print!("{}", ComparisonSummary::new(&runs, stop, None).to_text());
}
