//! Measured spectral norm of the noise `H = A - P` against the variance
//! bounds.

use msm_spectra::bulk_analysis::{
    measure_bulk_edge, norm_upper_bound, sample_lower_bound, variance_profile,
};
use msm_spectra::model::{expected_matrix, gen_fitness, ModelParams};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    for alpha in [0.2, 0.5, 0.8] {
        let params = ModelParams::deterministic(n, alpha)?;
        let x = gen_fitness(&params)?;
        let p = expected_matrix(&x, params.epsilon_n)?;
        let vp = variance_profile(&p)?;
        let bounds = norm_upper_bound(&vp, n);
        let edge = measure_bulk_edge(&params, 3)?;
        let lower = sample_lower_bound(&p, params.seed, 2, 0.5)?;
        println!(
            "alpha={alpha} ||H||={:.3}+-{:.3} sigma={:.3} sigma*={:.3} expectation={:.3} crude={:.3} lower-bound fraction={}",
            edge.mean, edge.stderr, vp.sigma, vp.sigma_star, bounds.expectation_bound, bounds.crude_bound, lower.fraction
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(1024)
}
