//! Generation of model instances: fitness vectors, the expected matrix `P`,
//! sampled adjacency `A`, noise `H = A - P` and coarse-grained graphs.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_n, Error, Result};
use crate::rng::{self, Purpose};

/// How node weights are assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// i.i.d. Pareto(alpha) draws, sorted descending.
    IidPareto,
    /// `x_j = (n / j)^(1/alpha)`.
    Deterministic,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::IidPareto => "iid_pareto",
            WeightMode::Deterministic => "deterministic",
        })
    }
}

/// Complete identity of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub alpha: f64,
    pub epsilon_n: f64,
    pub seed: u64,
    pub weight_mode: WeightMode,
}

/// `n^(-1/alpha)`, the sparse scaling of the kernel.
pub fn default_epsilon(n: usize, alpha: f64) -> f64 {
    (n as f64).powf(-1.0 / alpha)
}

impl ModelParams {
    /// Parameters with the default `epsilon_n = n^(-1/alpha)`.
    pub fn new(n: usize, alpha: f64, seed: u64, weight_mode: WeightMode) -> Result<Self> {
        check_alpha(alpha)?;
        check_n(n)?;
        let params = ModelParams {
            n,
            alpha,
            epsilon_n: default_epsilon(n, alpha),
            seed,
            weight_mode,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn deterministic(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, alpha, 0, WeightMode::Deterministic)
    }

    pub fn with_epsilon(mut self, epsilon_n: f64) -> Result<Self> {
        self.epsilon_n = epsilon_n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_n(self.n)?;
        if !(self.epsilon_n.is_finite() && self.epsilon_n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon_n must be > 0, got {}",
                self.epsilon_n
            )));
        }
        Ok(())
    }
}

/// Node weights sorted descending, so index 0 is the hub (`j = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    x: Vec<f64>,
    pub mode: WeightMode,
    pub seed: Option<u64>,
}

impl FitnessVector {
    /// Wraps raw weights; they must all be `>= 1` and are sorted descending.
    pub fn from_weights(mut x: Vec<f64>, mode: WeightMode, seed: Option<u64>) -> Result<Self> {
        if x.iter().any(|v| !(v.is_finite() && *v >= 1.0)) {
            return Err(Error::InvalidParameter(
                "fitness values must be finite and >= 1".into(),
            ));
        }
        x.sort_by(|a, b| b.total_cmp(a));
        Ok(FitnessVector { x, mode, seed })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    #[serde(rename = "expected_P")]
    ExpectedP,
    #[serde(rename = "adjacency_A")]
    AdjacencyA,
    #[serde(rename = "noise_H")]
    NoiseH,
    /// Anything else, e.g. test fixtures or cavity kernels.
    #[serde(rename = "general")]
    General,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::ExpectedP => "expected_P",
            MatrixKind::AdjacencyA => "adjacency_A",
            MatrixKind::NoiseH => "noise_H",
            MatrixKind::General => "general",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "expected_P" => Ok(MatrixKind::ExpectedP),
            "adjacency_A" => Ok(MatrixKind::AdjacencyA),
            "noise_H" => Ok(MatrixKind::NoiseH),
            "general" => Ok(MatrixKind::General),
            other => Err(Error::Parse(format!("unknown matrix kind {other:?}"))),
        }
    }
}

/// Dense symmetric matrix with zero diagonal semantics for the model kinds.
///
/// Storage is full row-major, but entries are only ever written in mirrored
/// pairs, so `get(i, j)` and `get(j, i)` are the same bits.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
    kind: MatrixKind,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize, kind: MatrixKind) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
            kind,
        }
    }

    /// Builds from `entry(i, j)` evaluated on `i < j` only, rows in parallel.
    /// The diagonal is filled from `diagonal(i)`.
    pub fn from_upper<F, D>(n: usize, kind: MatrixKind, entry: F, diagonal: D) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
        D: Fn(usize) -> f64 + Sync,
    {
        let mut data = vec![0.0; n * n];
        if n == 0 {
            return SymmetricMatrix { n, data, kind };
        }
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            row[i] = diagonal(i);
            for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
                *slot = entry(i, j);
            }
        });
        for i in 1..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        SymmetricMatrix { n, data, kind }
    }

    /// Builds from a full row-major buffer, rejecting asymmetric input.
    pub fn from_row_major(n: usize, data: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j].to_bits() != data[j * n + i].to_bits() {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix { n, data, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `y = M v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix dimension");
        self.data
            .par_chunks(self.n.max(1))
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Checks bitwise symmetry, the zero diagonal and the entry range of the kind.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                if self.get(i, j).to_bits() != self.get(j, i).to_bits() {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric entry at ({i}, {j})"
                    )));
                }
            }
        }
        if self.kind == MatrixKind::General {
            return Ok(());
        }
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let v = self.get(i, j);
                let ok = match self.kind {
                    MatrixKind::ExpectedP => (0.0..=1.0).contains(&v),
                    MatrixKind::AdjacencyA => v == 0.0 || v == 1.0,
                    MatrixKind::NoiseH => v > -1.0 && v < 1.0,
                    MatrixKind::General => true,
                };
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "entry {v} at ({i}, {j}) out of range for {}",
                        self.kind.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    fn require_kind(&self, kind: MatrixKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: kind.as_str(),
                got: self.kind.as_str(),
            })
        }
    }
}

/// Draws the fitness vector for `params`.
pub fn gen_fitness(params: &ModelParams) -> Result<FitnessVector> {
    params.validate()?;
    let n = params.n;
    let inv_alpha = 1.0 / params.alpha;
    let x: Vec<f64> = match params.weight_mode {
        WeightMode::Deterministic => (1..=n)
            .map(|j| (n as f64 / j as f64).powf(inv_alpha))
            .collect(),
        WeightMode::IidPareto => {
            let mut rng = rng::stream(params.seed, Purpose::Fitness, 0);
            (0..n)
                .map(|_| {
                    // u in (0, 1] keeps x finite and >= 1
                    let u = 1.0 - rng.random::<f64>();
                    u.powf(-inv_alpha)
                })
                .collect()
        }
    };
    let seed = match params.weight_mode {
        WeightMode::IidPareto => Some(params.seed),
        WeightMode::Deterministic => None,
    };
    FitnessVector::from_weights(x, params.weight_mode, seed)
}

fn check_epsilon(epsilon_n: f64) -> Result<()> {
    if epsilon_n.is_finite() && epsilon_n > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon_n must be > 0, got {epsilon_n}"
        )))
    }
}

/// `P_ij = 1 - exp(-epsilon_n x_i x_j)` off the diagonal, zero on it.
pub fn expected_matrix(x: &FitnessVector, epsilon_n: f64) -> Result<SymmetricMatrix> {
    check_epsilon(epsilon_n)?;
    let w = x.values();
    Ok(SymmetricMatrix::from_upper(
        w.len(),
        MatrixKind::ExpectedP,
        |i, j| -(-epsilon_n * w[i] * w[j]).exp_m1(),
        |_| 0.0,
    ))
}

/// One Bernoulli realization of `P`. Row `i` draws its upper-triangle
/// entries from stream `(seed, Adjacency, i)`.
pub fn sample_adjacency(p: &SymmetricMatrix, seed: u64) -> Result<SymmetricMatrix> {
    p.require_kind(MatrixKind::ExpectedP)?;
    let n = p.n();
    let mut data = vec![0.0; n * n];
    if n > 0 {
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let mut rng = rng::stream(seed, Purpose::Adjacency, i as u64);
            let probs = p.row(i);
            for j in (i + 1)..n {
                let u: f64 = rng.random();
                row[j] = if u < probs[j] { 1.0 } else { 0.0 };
            }
        });
    }
    for i in 1..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    Ok(SymmetricMatrix {
        n,
        data,
        kind: MatrixKind::AdjacencyA,
    })
}

/// `H = A - P`.
pub fn noise_matrix(a: &SymmetricMatrix, p: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    a.require_kind(MatrixKind::AdjacencyA)?;
    p.require_kind(MatrixKind::ExpectedP)?;
    if a.n() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: a.n(),
        });
    }
    let data = a
        .as_slice()
        .par_iter()
        .zip(p.as_slice())
        .map(|(x, y)| x - y)
        .collect();
    Ok(SymmetricMatrix {
        n: a.n(),
        data,
        kind: MatrixKind::NoiseH,
    })
}

/// Row sums of `P`.
pub fn expected_degrees(p: &SymmetricMatrix) -> Vec<f64> {
    (0..p.n()).map(|i| p.row(i).iter().sum()).collect()
}

/// Expected link density `sum_{i<j} p_ij / (n (n - 1) / 2)`.
pub fn link_density(p: &SymmetricMatrix) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = expected_degrees(p).iter().sum();
    total / (n as f64 * (n as f64 - 1.0))
}

/// How nodes are grouped into supernodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Consecutive blocks of the descending order.
    Contiguous,
    /// A seeded uniformly random partition into equal blocks.
    Random { seed: u64 },
}

/// Result of aggregating nodes into equal-size supernodes.
#[derive(Clone, Debug)]
pub struct CoarseGrained {
    /// Supernode weights `X_I = sum_{i in I} x_i`, sorted descending.
    pub fitness: FitnessVector,
    /// Edge-OR probabilities `1 - prod_{i in I, j in J} (1 - p_ij)`.
    pub expected: SymmetricMatrix,
    /// Original node indices of each supernode, aligned with `fitness`.
    pub blocks: Vec<Vec<usize>>,
    pub epsilon_n: f64,
}

impl CoarseGrained {
    /// `max_{I != J} |P'_IJ - (1 - exp(-epsilon_n X_I X_J))|`.
    pub fn max_invariance_violation(&self) -> f64 {
        let xs = self.fitness.values();
        let m = xs.len();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in (i + 1)..m {
                let kernel = -(-self.epsilon_n * xs[i] * xs[j]).exp_m1();
                worst = worst.max((self.expected.get(i, j) - kernel).abs());
            }
        }
        worst
    }
}

/// Aggregates nodes into blocks of `block_size` and builds the exact induced
/// expected matrix by multiplying non-edge probabilities over all cross pairs.
pub fn coarse_grain(
    x: &FitnessVector,
    epsilon_n: f64,
    block_size: usize,
    partition: Partition,
) -> Result<CoarseGrained> {
    check_epsilon(epsilon_n)?;
    let n = x.len();
    if block_size == 0 || n == 0 || !n.is_multiple_of(block_size) {
        return Err(Error::InvalidParameter(format!(
            "block size {block_size} does not divide n = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let Partition::Random { seed } = partition {
        let mut rng = rng::stream(seed, Purpose::Partition, 0);
        order.shuffle(&mut rng);
    }
    let w = x.values();
    let mut blocks: Vec<Vec<usize>> = order.chunks(block_size).map(|c| c.to_vec()).collect();
    let sum = |b: &[usize]| b.iter().map(|&i| w[i]).sum::<f64>();
    blocks.sort_by(|a, b| sum(b).total_cmp(&sum(a)));
    let coarse: Vec<f64> = blocks.iter().map(|b| sum(b)).collect();

    let p = expected_matrix(x, epsilon_n)?;
    let expected = SymmetricMatrix::from_upper(
        blocks.len(),
        MatrixKind::ExpectedP,
        |bi, bj| {
            let mut no_edge = 1.0;
            for &i in &blocks[bi] {
                for &j in &blocks[bj] {
                    no_edge *= 1.0 - p.get(i, j);
                }
            }
            1.0 - no_edge
        },
        |_| 0.0,
    );
    Ok(CoarseGrained {
        fitness: FitnessVector {
            x: coarse,
            mode: x.mode,
            seed: x.seed,
        },
        expected,
        blocks,
        epsilon_n,
    })
}
