//! Ill-conditioned diagonal quadratic: FGM against the last-term memory schedule.

use sfgm::data::{gen_diagonal_quadratic, start_point};
use sfgm::solvers::{run, SolverConfig, StoppingRule};

fn main() {
    let (problem, truth) = gen_diagonal_quadratic(4, 1000, 0).unwrap();
    let x0 = start_point(1000, 0);
    let stop = StoppingRule::DistToOpt(1e-6);

    let mut counts = Vec::new();
    for config in [SolverConfig::fgm_css3(), SolverConfig::sfgm_last()] {
        let config = config.with_stop(stop);
        let out = run(&problem, &config, &x0, Some(&truth)).unwrap();
        let last = out.trace.last().unwrap();
        println!(
            "{:<12} {:>6} iterations, gap {:.3e}, gamma/mu {:.4}",
            config.label(),
            last.k,
            last.gap.unwrap(),
            last.gamma / out.state.mu
        );
        counts.push(last.k as f64);
    }
    println!("ratio {:.3}", counts[1] / counts[0]);
}
