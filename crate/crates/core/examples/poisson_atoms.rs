//! Fixed point on Poisson point process atoms, at unit scale and matched
//! to a finite graph of the same size.

use msm_spectra::bulk_analysis::{
    cavity_solve, ppp_fixed_point, ppp_sample, CavityOptions, PppScale,
};
use msm_spectra::model::{gen_fitness, ModelParams};
use msm_spectra::Result;
use num_complex::Complex64;

pub fn run(n: usize) -> Result<()> {
    let alpha = 0.5;
    let atoms = ppp_sample(alpha, n, 11)?;
    let opts = CavityOptions::default();
    let params = ModelParams::deterministic(n, alpha)?;
    let x = gen_fitness(&params)?;
    for z in [Complex64::new(0.0, 0.5), Complex64::new(0.2, 0.2), Complex64::new(-0.3, 0.1)] {
        let unit = ppp_fixed_point(&atoms, z, PppScale::Unit, &opts)?;
        let matched = ppp_fixed_point(&atoms, z, PppScale::Matched, &opts)?;
        let cavity = cavity_solve(&x, params.epsilon_n, &[z], &opts)?;
        println!(
            "z={z:.2}: unit S={:.4} matched S={:.4} cavity S={:.4}",
            unit.s, matched.s, cavity.s[0]
        );
    }
    println!("tail sum estimate beyond {} atoms: {:.3e}", atoms.len(), atoms.tail_sum_estimate());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(1024)
}
