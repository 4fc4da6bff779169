//! Closed-form eigenfunctions `nu_k(x)` and eigenvector entries `v_k^(j)`.
//!
//! ```text
//! nu_k(x) = (x^(alpha/2) / alpha) Re[(alpha/2 - i w) Gamma(1 - alpha/2 - i w) x^(i w)]
//! v_k^(j) = nu_k(x_j),  x_j = (n/j)^(1/alpha)
//! ```
//!
//! The Perron mode uses the normalisation `nu_1(x) = x^(alpha/2) / 2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic_spectrum::{solve_omega_k, SpectralPrediction};
use crate::error::{check_alpha, check_n, Error, Result};
use crate::model::SymmetricMatrix;
use crate::special_functions::{gamma_line, log_gamma_complex};

/// `(alpha/2 - i w) Gamma(1 - alpha/2 - i w)`.
fn mode_coefficient(alpha: f64, omega: f64) -> Result<Complex64> {
    let z = Complex64::new(1.0 - 0.5 * alpha, -omega);
    Ok(Complex64::new(0.5 * alpha, -omega) * log_gamma_complex(z)?.exp())
}

/// `nu_k(x)` for a given `omega_k`; `k = 1` takes the Perron normalisation.
pub fn nu_k(x: f64, k: usize, omega_k: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 1.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu_k needs x >= 1, got {x}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let envelope = x.powf(0.5 * alpha);
    if k == 1 {
        return Ok(0.5 * envelope);
    }
    let c = mode_coefficient(alpha, omega_k)?;
    let phase = omega_k * x.ln();
    let (s, co) = phase.sin_cos();
    Ok(envelope / alpha * (c.re * co - c.im * s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorPrediction {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub omega_k: f64,
    pub lambda_k: f64,
    /// `v_k^(1..=n)`, index 0 is the hub.
    pub entries: Vec<f64>,
}

impl EigenvectorPrediction {
    /// Bound on `|v_k^(j)| sqrt(j)`: `(alpha/4 + w^2/alpha) |Gamma(-alpha/2 - i w)| sqrt(n)`,
    /// or `sqrt(n)/2` for the Perron mode.
    pub fn envelope_amplitude(&self) -> Result<f64> {
        let sqrt_n = (self.n as f64).sqrt();
        if self.k == 1 {
            return Ok(0.5 * sqrt_n);
        }
        let g = gamma_line(self.alpha, self.omega_k)?;
        let w = self.omega_k;
        Ok((0.25 * self.alpha + w * w / self.alpha) * g.log_abs.exp() * sqrt_n)
    }
}

/// Entries from an already solved rung.
pub fn entries_from_prediction(
    p: &SpectralPrediction,
    n: usize,
    alpha: f64,
) -> Result<EigenvectorPrediction> {
    check_alpha(alpha)?;
    check_n(n)?;
    let nf = n as f64;
    let entries: Vec<f64> = if p.k == 1 {
        (1..=n).into_par_iter().map(|j| 0.5 * (nf / j as f64).sqrt()).collect()
    } else {
        let c = mode_coefficient(alpha, p.omega_k)?;
        let rate = p.omega_k / alpha;
        (1..=n)
            .into_par_iter()
            .map(|j| {
                let ratio = nf / j as f64;
                let (s, co) = (rate * ratio.ln()).sin_cos();
                ratio.sqrt() / alpha * (c.re * co - c.im * s)
            })
            .collect()
    };
    Ok(EigenvectorPrediction {
        k: p.k,
        n,
        alpha,
        omega_k: p.omega_k,
        lambda_k: p.lambda_k,
        entries,
    })
}

/// Solves for `omega_k` and evaluates `v_k^(j)` for `j = 1..=n`.
pub fn eigenvector_entries(k: usize, n: usize, alpha: f64) -> Result<EigenvectorPrediction> {
    let p = solve_omega_k(k, n, alpha)?;
    entries_from_prediction(&p, n, alpha)
}

/// Agreement between the Re-part formula and its cosine form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub k: usize,
    pub max_entry: f64,
    /// `max_j |v^(j) - v^(1) cos((w/alpha) ln j) / sqrt(j)|`.
    pub max_discrepancy: f64,
    /// `v^(1)` against `lambda_k (alpha/4 + w^2/alpha) / alpha`; `None` for `k = 1`.
    pub amplitude_discrepancy: Option<f64>,
    /// `v^(1) / lambda_k`, which the amplitude relation fixes at `(alpha/4 + w^2/alpha) / alpha`.
    pub amplitude_ratio: f64,
}

pub fn entry_identity_check(k: usize, n: usize, alpha: f64) -> Result<IdentityReport> {
    let pred = eigenvector_entries(k, n, alpha)?;
    identity_report(&pred)
}

pub fn identity_report(pred: &EigenvectorPrediction) -> Result<IdentityReport> {
    let v1 = pred.entries[0];
    let rate = pred.omega_k / pred.alpha;
    let max_discrepancy = pred
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let j = (i + 1) as f64;
            (v - v1 * (rate * j.ln()).cos() / j.sqrt()).abs()
        })
        .reduce(|| 0.0, f64::max);
    let max_entry = pred.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let amplitude_discrepancy = if pred.k == 1 {
        None
    } else {
        let w = pred.omega_k;
        let a = pred.alpha;
        Some((v1 - pred.lambda_k * (0.25 * a + w * w / a) / a).abs())
    };
    Ok(IdentityReport {
        k: pred.k,
        max_entry,
        max_discrepancy,
        amplitude_discrepancy,
        amplitude_ratio: v1 / pred.lambda_k,
    })
}

/// Scales so that `sum |v| = 1`.
pub fn l1_normalize(entries: &[f64]) -> Result<Vec<f64>> {
    let norm: f64 = entries.iter().map(|v| v.abs()).sum();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(
            "cannot normalise a zero or non-finite vector".into(),
        ));
    }
    Ok(entries.iter().map(|v| v / norm).collect())
}

/// Flips `v` so that its first entry has the sign of `reference[0]`.
pub fn align_sign(reference: &[f64], v: &[f64]) -> Vec<f64> {
    let flip = match (reference.first(), v.first()) {
        (Some(r), Some(x)) => r.signum() != x.signum() && *x != 0.0,
        _ => false,
    };
    if flip {
        v.iter().map(|x| -x).collect()
    } else {
        v.to_vec()
    }
}

/// Cosine similarity after sign alignment on the hub entry.
pub fn cosine_similarity(reference: &[f64], v: &[f64]) -> Result<f64> {
    if reference.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: v.len(),
        });
    }
    let v = align_sign(reference, v);
    let dot: f64 = reference.iter().zip(&v).map(|(a, b)| a * b).sum();
    let na: f64 = reference.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidParameter("zero vector".into()));
    }
    Ok(dot / (na * nb))
}

/// Positions in `ln j` (1-based `j`) where the entries change sign,
/// linearly interpolated between neighbouring indices.
pub fn log_zero_crossings(entries: &[f64]) -> Vec<f64> {
    entries
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != 0.0 && w[0].signum() != w[1].signum())
        .map(|(i, w)| {
            let (l0, l1) = (((i + 1) as f64).ln(), ((i + 2) as f64).ln());
            let t = w[0] / (w[0] - w[1]);
            l0 + t * (l1 - l0)
        })
        .collect()
}

/// Mean spacing of consecutive log zero crossings.
pub fn mean_log_spacing(crossings: &[f64]) -> Option<f64> {
    (crossings.len() >= 2)
        .then(|| (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Slope of the least-squares fit of `ln(|v_j| sqrt(j))` against `ln j` over
/// the local maxima of `|v_j| sqrt(j)`, which track the envelope.
pub fn envelope_slope(entries: &[f64]) -> Option<f64> {
    let scaled: Vec<f64> = entries
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs() * ((i + 1) as f64).sqrt())
        .collect();
    let peaks: Vec<(f64, f64)> = (1..scaled.len().saturating_sub(1))
        .filter(|&i| scaled[i] >= scaled[i - 1] && scaled[i] > scaled[i + 1] && scaled[i] > 0.0)
        .map(|i| (((i + 1) as f64).ln(), scaled[i].ln()))
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    let m = peaks.len() as f64;
    let mx = peaks.iter().map(|p| p.0).sum::<f64>() / m;
    let my = peaks.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `||P v - lambda v|| / ||lambda v||`.
pub fn operator_residual(p: &SymmetricMatrix, pred: &EigenvectorPrediction) -> Result<f64> {
    if p.n() != pred.entries.len() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: pred.entries.len(),
        });
    }
    let pv = p.mul_vec(&pred.entries);
    let num: f64 = pv
        .iter()
        .zip(&pred.entries)
        .map(|(a, v)| (a - pred.lambda_k * v).powi(2))
        .sum();
    let den: f64 = pred.entries.iter().map(|v| (pred.lambda_k * v).powi(2)).sum();
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perron_mode_values() {
        assert_eq!(nu_k(1.0, 1, 0.0, 0.5).unwrap(), 0.5);
        assert!((nu_k(4.0, 1, 0.0, 0.5).unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        let v = eigenvector_entries(1, 10_000, 0.5).unwrap();
        assert_eq!(v.entries[0], 50.0);
        assert_eq!(v.entries[9_999], 0.5);
        assert!(v.entries.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn entries_match_nu_on_deterministic_weights() {
        let n = 500;
        let alpha = 0.5;
        let v = eigenvector_entries(3, n, alpha).unwrap();
        for j in [1usize, 7, 123, 500] {
            let x = (n as f64 / j as f64).powf(1.0 / alpha);
            let direct = nu_k(x, 3, v.omega_k, alpha).unwrap();
            assert!((direct - v.entries[j - 1]).abs() < 1e-10 * v.entries[0].abs());
        }
    }

    #[test]
    fn normalisation_and_alignment() {
        let u = l1_normalize(&[3.0, -1.0]).unwrap();
        assert_eq!(u, vec![0.75, -0.25]);
        assert_eq!(l1_normalize(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(l1_normalize(&[0.0, 0.0]).is_err());
        let a = [1.0, 2.0];
        assert_eq!(align_sign(&a, &[-1.0, -2.0]), vec![1.0, 2.0]);
        assert!((cosine_similarity(&a, &[-2.0, -4.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossings_are_interpolated() {
        let c = log_zero_crossings(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(c.len(), 2);
        assert!((c[0] - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(mean_log_spacing(&c).unwrap() > 0.0);
        assert!(mean_log_spacing(&c[..1]).is_none());
    }
}
