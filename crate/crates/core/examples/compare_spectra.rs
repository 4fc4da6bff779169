//! Leading eigenpairs of `P` and one sample of `A` against the predictions.

use msm_spectra::model::ModelParams;
use msm_spectra::numerical_spectrum::{compare, effective_rank, outliers};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let params = ModelParams::deterministic(n, 0.5)?;
    let run = compare(&params, 5)?;
    println!("k  pred        P           A           cos(pred,P) cos(P,A)");
    for r in &run.report.rows {
        println!(
            "{:<2} {:<11.4} {:<11.4} {:<11.4} {:<11.4} {:.4}",
            r.k,
            r.lambda_pred.unwrap_or(f64::NAN),
            r.lambda_p,
            r.lambda_a,
            r.cosine_sim_pred_vs_p.unwrap_or(f64::NAN),
            r.cosine_sim_p_vs_a
        );
    }
    let edge = 0.5 * (n as f64).sqrt();
    println!(
        "||H|| = {:.3}, outliers of A above sqrt(n)/2: {}, effective rank of P: {}, k_break: {:?}",
        run.report.bulk_edge_measured,
        outliers(&run.a, edge).len(),
        effective_rank(&run.p, 0.5),
        run.report.k_break
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(2048)
}
