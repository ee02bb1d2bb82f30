//! Iteration counts guaranteed by the bounds, for a range of condition numbers.

use sfgm::diagnostics::iteration_lower_bounds;

fn main() {
    println!("{:>10} {:>14} {:>14} {:>14} {:>8}", "kappa", "memory, S=mu", "no memory", "lower", "ratio");
    for e in 2..=8 {
        let mu = 10f64.powi(-e);
        let b = iteration_lower_bounds(1.0, mu, mu, 1.0, 1e-12 * mu).unwrap();
        println!(
            "{:>10.0e} {:>14.1} {:>14.1} {:>14.1} {:>8.4}",
            1.0 / mu,
            b.sfgm_asymptotic,
            b.fgm,
            b.lower,
            b.fgm_over_sfgm_asymptotic()
        );
    }
    match iteration_lower_bounds(1.0, 1e-3, 0.0, 1.0, 1.0) {
        Err(e) => println!("eps outside the validity domain: {e}"),
        Ok(_) => unreachable!(),
    }
}
