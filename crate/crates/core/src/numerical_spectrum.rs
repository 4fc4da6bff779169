//! Dense symmetric eigendecomposition and the comparison between numerical
//! spectra of `P`, `A` and the closed-form predictions.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::analytic_eigenvectors::{cosine_similarity, entries_from_prediction, EigenvectorPrediction};
use crate::analytic_spectrum::prediction_ladder;
use crate::error::{Error, Result};
use crate::model::{
    expected_matrix, gen_fitness, noise_matrix, sample_adjacency, MatrixKind, ModelParams,
    SymmetricMatrix,
};
use crate::rng::derive_seed;

/// Eigenvalues sorted by descending `|lambda|`, ties by descending signed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub source_kind: MatrixKind,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// Column-major `n x n`, column `i` belongs to `eigenvalues[i]`; absent
    /// when only eigenvalues were requested.
    pub eigenvectors: Option<Vec<f64>>,
    pub params: Option<ModelParams>,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        self.eigenvectors
            .as_ref()
            .filter(|_| i < self.n)
            .map(|v| &v[i * self.n..(i + 1) * self.n])
    }

    /// `max_i ||M v_i - lambda_i v_i|| / (||M||_F / sqrt(n) + |lambda_i|)`.
    pub fn reconstruction_residual(&self, m: &SymmetricMatrix) -> Result<f64> {
        if m.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: m.n(),
            });
        }
        let scale = m.frobenius_norm() / (self.n as f64).sqrt();
        let mut worst = 0.0f64;
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let Some(v) = self.vector(i) else {
                return Err(Error::InvalidParameter("decomposition has no eigenvectors".into()));
            };
            let mv = m.mul_vec(v);
            let r: f64 = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r / (scale + lambda.abs()));
        }
        Ok(worst)
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> Option<f64> {
        let v = self.eigenvectors.as_ref()?;
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            let vi = &v[i * n..(i + 1) * n];
            for j in i..n {
                let vj = &v[j * n..(j + 1) * n];
                let d: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        Some(worst)
    }
}

fn to_faer(m: &SymmetricMatrix) -> Result<Mat<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(Mat::from_fn(m.n(), m.n(), |i, j| m.get(i, j)))
}

fn spectral_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    idx
}

/// Full eigendecomposition with eigenvectors.
pub fn eig_sym(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = m.n();
    let evd = to_faer(m)?
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let raw: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let order = spectral_order(&raw);
    let mut vectors = Vec::with_capacity(n * n);
    for &c in &order {
        vectors.extend((0..n).map(|r| u[(r, c)]));
    }
    Ok(EigenDecomposition {
        source_kind: m.kind(),
        n,
        eigenvalues: order.iter().map(|&i| raw[i]).collect(),
        eigenvectors: Some(vectors),
        params: None,
    })
}

/// Eigenvalues only.
pub fn eigenvalues_sym(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let raw = to_faer(m)?
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let order = spectral_order(&raw);
    Ok(EigenDecomposition {
        source_kind: m.kind(),
        n: m.n(),
        eigenvalues: order.iter().map(|&i| raw[i]).collect(),
        eigenvectors: None,
        params: None,
    })
}

/// `max |lambda|`.
pub fn spectral_norm(m: &SymmetricMatrix) -> Result<f64> {
    Ok(eigenvalues_sym(m)?
        .eigenvalues
        .first()
        .map_or(0.0, |l| l.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub k: usize,
    pub lambda: f64,
}

/// Eigenvalues with `|lambda| > edge`, ranked from `k = 1`.
pub fn outliers(decomp: &EigenDecomposition, edge: f64) -> Vec<Outlier> {
    decomp
        .eigenvalues
        .iter()
        .take_while(|l| l.abs() > edge)
        .enumerate()
        .map(|(i, &lambda)| Outlier { k: i + 1, lambda })
        .collect()
}

/// Number of `|lambda_k| > c sqrt(n)`.
pub fn effective_rank(decomp: &EigenDecomposition, c: f64) -> usize {
    let edge = c * (decomp.n as f64).sqrt();
    decomp.eigenvalues.iter().filter(|l| l.abs() > edge).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width histogram on `[lo, hi)`; values outside are dropped.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidParameter(
            "histogram needs bins >= 1 and hi > lo".into(),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v >= lo && v < hi {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            left: lo + b as f64 * width,
            right: lo + (b + 1) as f64 * width,
            count,
        })
        .collect())
}

fn rel_err(a: f64, reference: f64) -> f64 {
    (a - reference).abs() / reference.abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: usize,
    pub lambda_pred: Option<f64>,
    pub lambda_p: f64,
    pub lambda_a: f64,
    pub rel_err_pred_vs_p: Option<f64>,
    pub rel_err_p_vs_a: f64,
    pub cosine_sim_pred_vs_p: Option<f64>,
    pub cosine_sim_p_vs_a: f64,
    /// Prediction and matched eigenvalue of `P` share a sign.
    pub sign_consistent: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: ModelParams,
    pub rows: Vec<ComparisonRow>,
    /// `||H||` for the sampled realization.
    pub bulk_edge_measured: f64,
    /// Smallest `k` with `cosine_sim_p_vs_a < 0.9`, scanned up to `max(k_max, 30)`.
    pub k_break: Option<usize>,
    /// First index without an admissible root, if the predictions were cut short.
    pub prediction_truncated_at: Option<usize>,
}

/// Report together with the decompositions it was computed from.
#[derive(Clone, Debug)]
pub struct ComparisonRun {
    pub report: ComparisonReport,
    pub p: EigenDecomposition,
    pub a: EigenDecomposition,
    pub predictions: Vec<EigenvectorPrediction>,
}

pub const K_BREAK_COSINE: f64 = 0.9;
const K_BREAK_SCAN: usize = 30;

/// Builds `P` and one sample of `A`, decomposes both and matches them by
/// `|lambda|` rank against the predictions for `k = 1..=k_max`.
pub fn compare(params: &ModelParams, k_max: usize) -> Result<ComparisonRun> {
    params.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let n = params.n;
    let k_max = k_max.min(n);
    let x = gen_fitness(params)?;
    let p = expected_matrix(&x, params.epsilon_n)?;
    let a = sample_adjacency(&p, derive_seed(params.seed, 0))?;
    let h = noise_matrix(&a, &p)?;

    let (dp, da) = rayon::join(|| eig_sym(&p), || eig_sym(&a));
    let (mut dp, mut da) = (dp?, da?);
    dp.params = Some(params.clone());
    da.params = Some(params.clone());
    drop(a);
    let bulk_edge_measured = spectral_norm(&h)?;
    drop(h);

    let ladder = prediction_ladder(k_max, n, params.alpha)?;
    let predictions = ladder
        .predictions
        .iter()
        .map(|pr| entries_from_prediction(pr, n, params.alpha))
        .collect::<Result<Vec<_>>>()?;

    let vec_of = |d: &EigenDecomposition, i: usize| -> Result<Vec<f64>> {
        d.vector(i)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::InvalidParameter("missing eigenvectors".into()))
    };

    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let i = k - 1;
        let (lp, la) = (dp.eigenvalues[i], da.eigenvalues[i]);
        let vp = vec_of(&dp, i)?;
        let va = vec_of(&da, i)?;
        let pred = predictions.get(i);
        let cos_pred = match pred {
            Some(pr) => Some(cosine_similarity(&pr.entries, &vp)?),
            None => None,
        };
        rows.push(ComparisonRow {
            k,
            lambda_pred: pred.map(|pr| pr.lambda_k),
            lambda_p: lp,
            lambda_a: la,
            rel_err_pred_vs_p: pred.map(|pr| rel_err(lp, pr.lambda_k)),
            rel_err_p_vs_a: rel_err(la, lp),
            cosine_sim_pred_vs_p: cos_pred,
            cosine_sim_p_vs_a: cosine_similarity(&vp, &va)?,
            sign_consistent: pred.map(|pr| pr.lambda_k.signum() == lp.signum()),
        });
    }

    let mut k_break = None;
    for k in 1..=k_max.max(K_BREAK_SCAN).min(n) {
        let c = cosine_similarity(&vec_of(&dp, k - 1)?, &vec_of(&da, k - 1)?)?;
        if c < K_BREAK_COSINE {
            k_break = Some(k);
            break;
        }
    }

    Ok(ComparisonRun {
        report: ComparisonReport {
            params: params.clone(),
            rows,
            bulk_edge_measured,
            k_break,
            prediction_truncated_at: ladder.truncated_at,
        },
        p: dp,
        a: da,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MatrixKind;

    fn constant(n: usize, p: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_upper(n, MatrixKind::ExpectedP, |_, _| p, |_| 0.0)
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let d = eig_sym(&SymmetricMatrix::zeros(5, MatrixKind::General)).unwrap();
        assert!(d.eigenvalues.iter().all(|&l| l == 0.0));
        assert!(d.orthonormality_error().unwrap() < 1e-12);
    }

    #[test]
    fn complete_graph_spectrum() {
        let (n, p) = (40, 0.3);
        let m = constant(n, p);
        let d = eig_sym(&m).unwrap();
        assert!((d.eigenvalues[0] - (n - 1) as f64 * p).abs() < 1e-12);
        assert!(d.eigenvalues[1..].iter().all(|l| (l + p).abs() < 1e-12));
        assert!(d.reconstruction_residual(&m).unwrap() < 1e-12);
        let e = eigenvalues_sym(&m).unwrap();
        for (a, b) in e.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ordering_breaks_ties_by_sign() {
        assert_eq!(spectral_order(&[-2.0, 1.0, 2.0, -0.5]), vec![2, 0, 1, 3]);
    }

    #[test]
    fn outlier_and_rank_limits() {
        let d = eigenvalues_sym(&constant(10, 0.5)).unwrap();
        assert!(outliers(&d, f64::INFINITY).is_empty());
        assert_eq!(outliers(&d, 0.0).len(), 10);
        assert_eq!(effective_rank(&d, 1e9), 0);
        assert_eq!(spectral_norm(&constant(10, 0.5)).unwrap(), d.eigenvalues[0]);
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[0.0, 0.5, 0.99, 1.0, -3.0], 0.0, 1.0, 2).unwrap();
        assert_eq!(h[0].count, 1);
        assert_eq!(h[1].count, 2);
        assert!(histogram(&[], 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn small_comparison_is_consistent() {
        let params = ModelParams::deterministic(200, 0.5).unwrap();
        let run = compare(&params, 3).unwrap();
        assert_eq!(run.report.rows.len(), 3);
        let r1 = &run.report.rows[0];
        assert!(r1.lambda_p > 0.0);
        assert!(r1.cosine_sim_pred_vs_p.unwrap() > 0.9);
        for row in &run.report.rows {
            // Weyl: eigenvalue shifts are bounded by the perturbation norm
            assert!((row.lambda_a - row.lambda_p).abs() <= run.report.bulk_edge_measured + 1e-8);
        }
        assert!(compare(&params, 0).is_err());
    }
}
