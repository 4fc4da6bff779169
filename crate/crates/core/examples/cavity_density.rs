//! Bulk density from the cavity fixed point, next to the broadened
//! eigenvalue density of one noise realization.

use msm_spectra::bulk_analysis::{
    broadened_density, cavity_solve, l1_distance, lambda_grid, CavityOptions,
};
use msm_spectra::model::{expected_matrix, gen_fitness, noise_matrix, sample_adjacency, ModelParams};
use msm_spectra::numerical_spectrum::eigenvalues_sym;
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let params = ModelParams::deterministic(n, 0.5)?;
    let x = gen_fitness(&params)?;
    let grid = lambda_grid(-0.75, 0.75, 31, 0.05)?;
    let sol = cavity_solve(&x, params.epsilon_n, &grid, &CavityOptions::default())?;

    let p = expected_matrix(&x, params.epsilon_n)?;
    let h = noise_matrix(&sample_adjacency(&p, 1)?, &p)?;
    let scale = (n as f64).sqrt();
    let eig: Vec<f64> = eigenvalues_sym(&h)?.eigenvalues.iter().map(|l| l / scale).collect();
    let empirical = broadened_density(&eig, &grid);
    let xs: Vec<f64> = grid.iter().map(|z| z.re).collect();
    for i in (0..grid.len()).step_by(5) {
        println!("lambda={:+.3} cavity={:.4} empirical={:.4}", xs[i], sol.density[i], empirical[i]);
    }
    println!(
        "converged {:.0}%, mass {:.4}, L1 distance {:.4}",
        100.0 * sol.converged_fraction(),
        sol.mass(),
        l1_distance(&xs, &sol.density, &empirical)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(1024)
}
