//! Plateau of `arg Gamma(-alpha/2 + i omega)`: closed-form `omega_alpha`
//! against the numerical stationary point.

use msm_spectra::analytic_spectrum::stationary_point;
use msm_spectra::Result;

pub fn run(_n: usize) -> Result<()> {
    for alpha in [0.2, 0.5, 0.8] {
        let s = stationary_point(alpha)?;
        println!(
            "alpha={alpha}: omega_alpha={:.6} phi_alpha={:.6} f'(omega_alpha)={:.5} numeric={:.6} ({})",
            s.omega_alpha,
            s.phi_alpha,
            s.derivative_at_omega_alpha,
            s.omega_star_numeric,
            if s.star_is_root { "zero of f'" } else { "minimum of f'" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(0)
}
