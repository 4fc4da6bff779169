//! Fitness, expected matrix and one adjacency sample, with degree
//! statistics and a round trip through the dump formats.

use msm_spectra::io::{read_matrix_binary, write_fitness_csv, write_matrix_binary, MatrixHeader};
use msm_spectra::model::{
    expected_degrees, expected_matrix, gen_fitness, link_density, sample_adjacency, MatrixKind,
    ModelParams, WeightMode,
};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let params = ModelParams::new(n, 0.5, 42, WeightMode::IidPareto)?;
    let x = gen_fitness(&params)?;
    let p = expected_matrix(&x, params.epsilon_n)?;
    let a = sample_adjacency(&p, 42)?;
    let degrees = expected_degrees(&p);
    let realized: f64 = (0..n).map(|i| a.row(i).iter().sum::<f64>()).sum::<f64>() / n as f64;
    println!(
        "hub x = {:.3e}, hub expected degree {:.1}, mean expected degree {:.2}, realized {:.2}, link density {:.4}",
        x.values()[0],
        degrees[0],
        degrees.iter().sum::<f64>() / n as f64,
        realized,
        link_density(&p)
    );

    let dir = std::env::temp_dir().join(format!("msm-sample-graph-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let header = MatrixHeader {
        n,
        alpha: params.alpha,
        epsilon_n: params.epsilon_n,
        seed: params.seed,
        kind: MatrixKind::AdjacencyA,
    };
    let path = dir.join("A.bin");
    write_matrix_binary(&path, &header, &a)?;
    write_fitness_csv(&dir.join("fitness.csv"), &x)?;
    let (_, back) = read_matrix_binary(&path)?;
    println!("binary dump round trip exact: {}", back == a);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(1000)
}
