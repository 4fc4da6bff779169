//! Complex log-Gamma on the line `-alpha/2 + i omega`, its argument
//! derivative, and the Pareto Laplace transform near the origin.

use msm_spectra::special_functions::{
    digamma_line_derivative, gamma_complex, gamma_line, one_minus_pareto_laplace,
};
use msm_spectra::Result;
use num_complex::Complex64;

pub fn run(_n: usize) -> Result<()> {
    println!("Gamma(1/2) = {:.15}", gamma_complex(Complex64::new(0.5, 0.0))?.re);
    for omega in [0.0, 0.5, 1.0, 2.0] {
        let g = gamma_line(0.5, omega)?;
        println!(
            "omega={omega}: ln|Gamma|={:.6} arg={:.6} f'={:.6}",
            g.log_abs,
            g.arg_continuous,
            digamma_line_derivative(0.5, omega)?
        );
    }
    for beta in [0.1, 0.25, 0.4] {
        let t = 1e-6;
        let ratio = one_minus_pareto_laplace(beta, t)?
            / (t.powf(beta) * gamma_complex(Complex64::new(1.0 - beta, 0.0))?.re);
        println!("beta={beta}: (1 - phi(t)) / (t^beta Gamma(1-beta)) = {ratio:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(0)
}
