//! With the last-term schedule the curvature settles at twice the strong convexity.

use sfgm::data::{gen_diagonal_quadratic, start_point};
use sfgm::solvers::{run, SolverConfig};

fn main() {
    let (problem, _) = gen_diagonal_quadratic(3, 100, 0).unwrap();
    let out = run(&problem, &SolverConfig::sfgm_last().with_max_iters(400), &start_point(100, 0), None).unwrap();
    let mu = out.state.mu;
    for r in out.trace.iter().filter(|r| r.k == 1 || r.k % 50 == 0) {
        println!(
            "k = {:>4}  gamma/mu = {:.8}  min(gamma_prev, mu)/mu = {:.8}  alpha = {:.6}",
            r.k,
            r.gamma / mu,
            r.gamma_prev.min(mu) / mu,
            r.alpha
        );
    }
    println!("sqrt(2 mu / L) = {:.6}", (2.0 * mu / out.state.lipschitz).sqrt());
}
