//! With no memory and gamma0 = mu the general update is exactly FGM.

use sfgm::data::{gen_diagonal_quadratic, start_point};
use sfgm::solvers::{step, BetaKind, InitialCurvature, SolverConfig, SolverState};

fn main() {
    let (problem, _) = gen_diagonal_quadratic(3, 500, 1).unwrap();
    let x0 = start_point(500, 1);
    let fgm = SolverConfig::fgm_css3();
    let general = SolverConfig::sfgm(BetaKind::Zero, InitialCurvature::StrongConvexity);
    let mut a = SolverState::new(&problem, &fgm, &x0).unwrap();
    let mut b = SolverState::new(&problem, &general, &x0).unwrap();

    let mut identical = 0;
    for _ in 0..1000 {
        step(&problem, &fgm, &mut a).unwrap();
        step(&problem, &general, &mut b).unwrap();
        if a.x.iter().zip(&b.x).all(|(p, q)| p.to_bits() == q.to_bits()) {
            identical += 1;
        }
    }
    println!("{identical}/1000 iterates bitwise identical, f = {:.6e}", a.f_x);
}
