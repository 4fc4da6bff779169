//! The logarithmic spiral `sigma(omega)` and its real-axis crossings, which
//! coincide with the predicted eigenvalues.

use msm_spectra::analytic_spectrum::{solve_omega_k, spiral, spiral_crossings, SpiralBranch};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let alpha = 0.5;
    let locus = spiral(alpha, n, 1.5, 7, SpiralBranch::Plus)?;
    for s in &locus.samples {
        println!("omega={:.3} sigma=({:.3}, {:.3})", s.omega, s.re, s.im);
    }
    for c in spiral_crossings(alpha, n, 1.5, 4000)? {
        let root = solve_omega_k(c.k, n, alpha)?;
        println!(
            "crossing k={} omega={:.8} value={:.4} | solver omega={:.8} lambda={:.4}",
            c.k, c.omega, c.value, root.omega_k, root.lambda_k
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(10_000)
}
