//! Eigenvalue ladder of `P` from the admissibility equation, next to the
//! plateau approximation of `omega_k`.

use msm_spectra::analytic_spectrum::{k_star_estimate, omega_k_approx, prediction_ladder};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let alpha = 0.5;
    let ladder = prediction_ladder(8, n, alpha)?;
    println!("k  omega_k     approx      lambda_k");
    for p in &ladder.predictions {
        let approx = if p.k >= 2 {
            format!("{:.6}", omega_k_approx(p.k, n, alpha)?)
        } else {
            "-".to_string()
        };
        println!("{:<2} {:<11.6} {:<11} {:.4}", p.k, p.omega_k, approx, p.lambda_k);
    }
    if let Some(k) = ladder.truncated_at {
        println!("no admissible root from k = {k}");
    }
    let ks = k_star_estimate(n, alpha)?;
    println!("k* = {} (k*/ln n = {:.3})", ks.k_star, ks.ratio());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(10_000)
}
