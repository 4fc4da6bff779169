//! Aggregating nodes into supernodes keeps the kernel form with summed
//! weights.

use msm_spectra::model::{coarse_grain, gen_fitness, ModelParams, Partition, WeightMode};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    for alpha in [0.2, 0.5, 0.8] {
        let params = ModelParams::new(n, alpha, 3, WeightMode::IidPareto)?;
        let x = gen_fitness(&params)?;
        for b in [2, 5, 10] {
            for partition in [Partition::Contiguous, Partition::Random { seed: 9 }] {
                let cg = coarse_grain(&x, params.epsilon_n, b, partition)?;
                println!(
                    "alpha={alpha} b={b} {partition:?}: {} supernodes, max violation {:.2e}",
                    cg.blocks.len(),
                    cg.max_invariance_violation()
                );
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(100)
}
