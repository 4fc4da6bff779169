//! Closed-form eigenvector entries: log-periodic oscillation under a
//! `j^(-1/2)` envelope, and the cosine identity at an exact root.

use msm_spectra::analytic_eigenvectors::{
    eigenvector_entries, envelope_slope, identity_report, l1_normalize, log_zero_crossings,
    mean_log_spacing,
};
use msm_spectra::Result;

pub fn run(n: usize) -> Result<()> {
    let alpha = 0.5;
    for k in 1..=4 {
        let v = eigenvector_entries(k, n, alpha)?;
        let id = identity_report(&v)?;
        let zeros = log_zero_crossings(&v.entries);
        let spacing = mean_log_spacing(&zeros);
        let l1 = l1_normalize(&v.entries)?;
        println!(
            "k={k} v(1)={:.4} v(n)={:.4} identity={:.1e} zeros={} spacing={} expected={:.4} slope={} l1[0]={:.3e}",
            v.entries[0],
            v.entries[n - 1],
            id.max_discrepancy,
            zeros.len(),
            spacing.map_or("-".into(), |s| format!("{s:.4}")),
            if k > 1 { std::f64::consts::PI * alpha / v.omega_k } else { f64::NAN },
            envelope_slope(&v.entries).map_or("-".into(), |s| format!("{s:.3}")),
            l1[0]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run(10_000)
}
