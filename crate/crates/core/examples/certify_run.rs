//! Runs a method with the estimating-sequence tracker and checks its bounds.

use sfgm::data::{gen_diagonal_quadratic, start_point};
use sfgm::diagnostics::{run_certified, write_certification_csv};
use sfgm::solvers::{BetaKind, InitialCurvature, SolverConfig, StoppingRule};

fn main() {
    let (problem, truth) = gen_diagonal_quadratic(3, 200, 2).unwrap();
    let x0 = start_point(200, 2);
    for config in [
        SolverConfig::fgm_css3(),
        SolverConfig::sfgm_last(),
        SolverConfig::sfgm(BetaKind::Window(4), InitialCurvature::Value(0.0)),
    ] {
        let config = config.with_stop(StoppingRule::DistToOpt(1e-8));
        let certified = run_certified(&problem, &config, &x0, Some(&truth)).unwrap();
        println!("== {} ({} iterations)", config.label(), certified.output.trace.len());
        println!("{}", certified.summary);
    }

    let config = SolverConfig::sfgm_last().with_max_iters(5);
    let certified = run_certified(&problem, &config, &x0, Some(&truth)).unwrap();
    write_certification_csv(&certified.reports, std::io::stdout().lock()).unwrap();
}
