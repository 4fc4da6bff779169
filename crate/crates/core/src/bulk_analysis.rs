//! Bulk of the noise spectrum: norm bounds, measured edges, the cavity fixed
//! point for the Stieltjes transform and its Poisson point process limit.
//!
//! The resolvent is taken for `A / sqrt(n)`, so `z` and the density are in
//! scaled units and the cavity sum carries a `1/n`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    expected_matrix, gen_fitness, noise_matrix, sample_adjacency, FitnessVector, MatrixKind,
    ModelParams, SymmetricMatrix,
};
use crate::numerical_spectrum::spectral_norm;
use crate::rng::{derive_seed, stream, Purpose};

/// Bernoulli variances `v_ij = p_ij (1 - p_ij)` and their summaries.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProfile {
    pub v: SymmetricMatrix,
    /// `max_i sqrt(sum_j v_ij)`.
    pub sigma: f64,
    /// `max_{i != j} sqrt(v_ij)`.
    pub sigma_star: f64,
    /// `max_i sum_j p_ij`.
    pub d_max: f64,
    /// Row attaining `sigma`.
    pub argmax_row: usize,
}

pub fn variance_profile(p: &SymmetricMatrix) -> Result<VarianceProfile> {
    if p.kind() != MatrixKind::ExpectedP {
        return Err(Error::WrongKind {
            expected: MatrixKind::ExpectedP.as_str(),
            got: p.kind().as_str(),
        });
    }
    let n = p.n();
    let v = SymmetricMatrix::from_upper(
        n,
        MatrixKind::General,
        |i, j| {
            let q = p.get(i, j);
            q * (1.0 - q)
        },
        |_| 0.0,
    );
    let mut sigma_sq = 0.0f64;
    let mut argmax_row = 0;
    let mut var_max = 0.0f64;
    let mut d_max = 0.0f64;
    for i in 0..n {
        let row = v.row(i);
        let s: f64 = row.iter().sum();
        if s > sigma_sq {
            sigma_sq = s;
            argmax_row = i;
        }
        var_max = row.iter().fold(var_max, |m, &x| m.max(x));
        d_max = d_max.max(p.row(i).iter().sum());
    }
    Ok(VarianceProfile {
        v,
        sigma: sigma_sq.sqrt(),
        sigma_star: var_max.sqrt(),
        d_max,
        argmax_row,
    })
}

/// Upper bounds on `||H||`; the expectation bound is stated with unit constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    /// `sigma + sigma_star sqrt(ln n)`, up to an absolute constant.
    pub expectation_bound: f64,
    /// `sqrt(n)/2 + sqrt(ln n)/4`.
    pub crude_bound: f64,
}

pub fn crude_bound(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf.sqrt() + 0.25 * nf.ln().sqrt()
}

pub fn norm_upper_bound(vp: &VarianceProfile, n: usize) -> NormBounds {
    NormBounds {
        expectation_bound: vp.sigma + vp.sigma_star * (n as f64).ln().sqrt(),
        crude_bound: crude_bound(n),
    }
}

/// Mean and standard error of `||H||` over realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkEdge {
    pub mean: f64,
    pub stderr: f64,
    pub samples: Vec<f64>,
}

/// Seed of realization `r` in an edge measurement.
pub fn realization_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, r as u64)
}

/// Samples `H = A - P` for `r = 0..realizations` and records `||H||`.
pub fn bulk_edge_of(p: &SymmetricMatrix, seed: u64, realizations: usize) -> Result<BulkEdge> {
    if realizations == 0 {
        return Err(Error::InvalidParameter("realizations must be >= 1".into()));
    }
    let samples = (0..realizations)
        .map(|r| {
            let a = sample_adjacency(p, realization_seed(seed, r))?;
            spectral_norm(&noise_matrix(&a, p)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let stderr = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        0.0
    };
    Ok(BulkEdge {
        mean,
        stderr,
        samples,
    })
}

pub fn measure_bulk_edge(params: &ModelParams, realizations: usize) -> Result<BulkEdge> {
    params.validate()?;
    let x = gen_fitness(params)?;
    let p = expected_matrix(&x, params.epsilon_n)?;
    bulk_edge_of(&p, params.seed, realizations)
}

/// `||H e_i||^2` for the row attaining `sigma`, against its mean `sigma^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnWitness {
    pub observed: f64,
    pub expected: f64,
    /// Hoeffding width `sqrt(sum_j r_j^2 / 2)` with `r_j = max(p_ij, 1 - p_ij)^2`.
    pub width: f64,
    pub within_three_widths: bool,
}

pub fn column_witness(vp: &VarianceProfile, p: &SymmetricMatrix, h: &SymmetricMatrix) -> ColumnWitness {
    let i = vp.argmax_row;
    let observed: f64 = h.row(i).iter().map(|x| x * x).sum();
    let range_sq: f64 = p
        .row(i)
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &q)| q.max(1.0 - q).powi(4))
        .sum();
    let expected = vp.sigma * vp.sigma;
    let width = (0.5 * range_sq).sqrt();
    ColumnWitness {
        observed,
        expected,
        width,
        within_three_widths: (observed - expected).abs() <= 3.0 * width,
    }
}

/// Frequency of `||H|| >= sqrt(1 - delta) sigma` against `1 - exp(-c delta^2 sigma^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub delta: f64,
    pub threshold: f64,
    pub fraction: f64,
    pub required: f64,
    pub passed: bool,
    pub witnesses: Vec<ColumnWitness>,
}

pub const LOWER_BOUND_C: f64 = 0.01;

pub fn norm_lower_bound_check(
    vp: &VarianceProfile,
    h_norms: &[f64],
    delta: f64,
    witnesses: Vec<ColumnWitness>,
) -> Result<LowerBoundReport> {
    if h_norms.is_empty() || !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(
            "need at least one norm and delta in [0, 1]".into(),
        ));
    }
    let threshold = (1.0 - delta).sqrt() * vp.sigma;
    let hits = h_norms.iter().filter(|&&h| h >= threshold).count();
    let fraction = hits as f64 / h_norms.len() as f64;
    let required = 1.0 - (-LOWER_BOUND_C * delta * delta * vp.sigma * vp.sigma).exp();
    Ok(LowerBoundReport {
        delta,
        threshold,
        fraction,
        required,
        passed: fraction >= required,
        witnesses,
    })
}

/// Samples `realizations` noise matrices and runs the lower-bound check.
pub fn sample_lower_bound(
    p: &SymmetricMatrix,
    seed: u64,
    realizations: usize,
    delta: f64,
) -> Result<LowerBoundReport> {
    let vp = variance_profile(p)?;
    let mut norms = Vec::with_capacity(realizations);
    let mut witnesses = Vec::with_capacity(realizations);
    for r in 0..realizations {
        let a = sample_adjacency(p, realization_seed(seed, r))?;
        let h = noise_matrix(&a, p)?;
        witnesses.push(column_witness(&vp, p, &h));
        norms.push(spectral_norm(&h)?);
    }
    norm_lower_bound_check(&vp, &norms, delta, witnesses)
}

/// Damped fixed-point controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CavityOptions {
    fn default() -> Self {
        CavityOptions {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

impl CavityOptions {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter("damping must be in (0, 1]".into()));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("tol must be > 0 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// `eta` in scaled units for a given `n`: `2.5 / sqrt(n)`.
pub fn default_eta(n: usize) -> f64 {
    2.5 / (n as f64).sqrt()
}

/// `points` values of `lambda + i eta` evenly spaced on `[lo, hi]`.
pub fn lambda_grid(lo: f64, hi: f64, points: usize, eta: f64) -> Result<Vec<Complex64>> {
    if points < 2 || !(hi > lo) || !(eta > 0.0) {
        return Err(Error::InvalidParameter(
            "grid needs points >= 2, hi > lo and eta > 0".into(),
        ));
    }
    Ok((0..points)
        .map(|i| Complex64::new(lo + (hi - lo) * i as f64 / (points - 1) as f64, eta))
        .collect())
}

/// Fixed point at one `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStatus {
    pub iterations: usize,
    pub converged: bool,
    pub final_delta: f64,
    /// Deltas grew somewhere after burn-in.
    pub contraction_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StieltjesSolution {
    pub z_grid: Vec<Complex64>,
    /// `g_per_node[m][i]` is `g_i(z_m)`.
    pub g_per_node: Vec<Vec<Complex64>>,
    /// `S_n(z) = (1/n) sum_i g_i(z)`.
    pub s: Vec<Complex64>,
    /// `Im S_n / pi`.
    pub density: Vec<f64>,
    pub status: Vec<PointStatus>,
}

impl StieltjesSolution {
    pub fn converged_fraction(&self) -> f64 {
        self.status.iter().filter(|s| s.converged).count() as f64 / self.status.len() as f64
    }

    /// Error if any grid point failed to converge.
    pub fn require_converged(&self) -> Result<()> {
        match self.status.iter().find(|s| !s.converged) {
            None => Ok(()),
            Some(s) => Err(Error::NonConvergence {
                iterations: s.iterations,
                delta: s.final_delta,
            }),
        }
    }

    /// Trapezoid integral of the density over `Re z`.
    pub fn mass(&self) -> f64 {
        let x: Vec<f64> = self.z_grid.iter().map(|z| z.re).collect();
        trapezoid(&x, &self.density)
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

const BURN_IN: usize = 10;

fn solve_point(kernel: &Mat<f64>, scale: f64, z: Complex64, opts: &CavityOptions) -> (Vec<Complex64>, PointStatus) {
    let n = kernel.nrows();
    let free = -1.0 / z;
    let mut g = vec![free; n];
    let mut gm = Mat::<f64>::zeros(n, 2);
    let mut prev_delta = f64::INFINITY;
    let mut warning = false;
    let mut delta = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        for (i, gi) in g.iter().enumerate() {
            gm[(i, 0)] = gi.re;
            gm[(i, 1)] = gi.im;
        }
        let kg = kernel * &gm;
        delta = 0.0;
        for (i, gi) in g.iter_mut().enumerate() {
            let field = Complex64::new(kg[(i, 0)], kg[(i, 1)]) * scale;
            let target = 1.0 / (-z - field);
            let next = (1.0 - opts.damping) * *gi + opts.damping * target;
            delta = f64::max(delta, (next - *gi).norm());
            *gi = next;
        }
        if iter > BURN_IN && delta > prev_delta * (1.0 + 1e-9) {
            warning = true;
        }
        prev_delta = delta;
        if delta < opts.tol {
            return (
                g,
                PointStatus {
                    iterations: iter,
                    converged: true,
                    final_delta: delta,
                    contraction_warning: warning,
                },
            );
        }
    }
    (
        g,
        PointStatus {
            iterations: opts.max_iter,
            converged: false,
            final_delta: delta,
            contraction_warning: warning,
        },
    )
}

/// Cavity fixed point `g_i = (-z - (1/n) sum_{j != i} k_ij g_j)^(-1)` on a
/// given kernel; the diagonal of `kernel` is ignored.
pub fn cavity_solve_with_kernel(
    kernel: &SymmetricMatrix,
    z_grid: &[Complex64],
    opts: &CavityOptions,
) -> Result<StieltjesSolution> {
    opts.validate()?;
    if z_grid.iter().any(|z| !(z.im > 0.0)) {
        return Err(Error::InvalidParameter("every grid point needs Im z > 0".into()));
    }
    if !kernel.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = kernel.n();
    let k = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { kernel.get(i, j) });
    let scale = 1.0 / n as f64;
    let results: Vec<(Vec<Complex64>, PointStatus)> = z_grid
        .par_iter()
        .map(|&z| solve_point(&k, scale, z, opts))
        .collect();
    let mut g_per_node = Vec::with_capacity(results.len());
    let mut status = Vec::with_capacity(results.len());
    let mut s = Vec::with_capacity(results.len());
    for (g, st) in results {
        s.push(g.iter().sum::<Complex64>() * scale);
        g_per_node.push(g);
        status.push(st);
    }
    let density = s.iter().map(|v| v.im / PI).collect();
    Ok(StieltjesSolution {
        z_grid: z_grid.to_vec(),
        g_per_node,
        s,
        density,
        status,
    })
}

/// Cavity fixed point for the kernel `1 - exp(-epsilon_n x_i x_j)`.
pub fn cavity_solve(
    x: &FitnessVector,
    epsilon_n: f64,
    z_grid: &[Complex64],
    opts: &CavityOptions,
) -> Result<StieltjesSolution> {
    let p = expected_matrix(x, epsilon_n)?;
    cavity_solve_with_kernel(&p, z_grid, opts)
}

/// `(1/n) sum_k (eta/pi) / ((x - lambda_k)^2 + eta^2)` on the real parts of the grid.
pub fn broadened_density(eigenvalues: &[f64], z_grid: &[Complex64]) -> Vec<f64> {
    let m = eigenvalues.len() as f64;
    z_grid
        .iter()
        .map(|z| {
            eigenvalues
                .iter()
                .map(|&l| z.im / PI / ((z.re - l).powi(2) + z.im * z.im))
                .sum::<f64>()
                / m
        })
        .collect()
}

/// Trapezoid `L1` distance between two densities sampled on the same grid.
pub fn l1_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(u, v)| (u - v).abs()).collect();
    trapezoid(x, &diff)
}

/// Atoms `y_k = Gamma_k^(-1/alpha)` of a Poisson process with intensity
/// `alpha y^(-1 - alpha)`, where `Gamma_k` are unit-rate arrival times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PppAtoms {
    pub alpha: f64,
    pub gamma_cumsum: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl PppAtoms {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Estimate of the discarded `sum_{k > K} y_k`:
    /// `alpha / (1 - alpha) Gamma_K^(1 - 1/alpha)`.
    pub fn tail_sum_estimate(&self) -> f64 {
        match self.gamma_cumsum.last() {
            Some(&g) => self.alpha / (1.0 - self.alpha) * g.powf(1.0 - 1.0 / self.alpha),
            None => f64::INFINITY,
        }
    }
}

pub fn ppp_sample(alpha: f64, count: usize, seed: u64) -> Result<PppAtoms> {
    crate::error::check_alpha(alpha)?;
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one atom".into()));
    }
    let mut rng = stream(seed, Purpose::PoissonAtoms, 0);
    let mut acc = 0.0;
    let gamma_cumsum: Vec<f64> = (0..count)
        .map(|_| {
            let e: f64 = rng.sample(Exp1);
            acc += e;
            acc
        })
        .collect();
    let y = gamma_cumsum.iter().map(|g| g.powf(-1.0 / alpha)).collect();
    Ok(PppAtoms {
        alpha,
        gamma_cumsum,
        y,
        seed,
    })
}

/// Normalisation of the atom kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PppScale {
    /// `Phi_x = sum_l g_l (1 - exp(-x y_l))`.
    Unit,
    /// `Phi_x = (1/K) sum_l g_l (1 - exp(-K^(1/alpha) x y_l))`, the finite-`n`
    /// kernel with `n = K` and `x_j = K^(1/alpha) y_j`.
    Matched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PppSolution {
    pub z: Complex64,
    pub g: Vec<Complex64>,
    /// Atom average of `g`, or `-1/z` without atoms.
    pub s: Complex64,
    pub status: PointStatus,
}

impl PppSolution {
    pub fn require_converged(&self) -> Result<()> {
        if self.status.converged {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                iterations: self.status.iterations,
                delta: self.status.final_delta,
            })
        }
    }
}

/// `g(y_k) = -1 / (z + Phi_{y_k})` on the atom set.
pub fn ppp_fixed_point(
    atoms: &PppAtoms,
    z: Complex64,
    scale: PppScale,
    opts: &CavityOptions,
) -> Result<PppSolution> {
    opts.validate()?;
    if !(z.im > 0.0) {
        return Err(Error::InvalidParameter("Im z must be > 0".into()));
    }
    let count = atoms.len();
    if count == 0 {
        return Ok(PppSolution {
            z,
            g: Vec::new(),
            s: -1.0 / z,
            status: PointStatus {
                iterations: 0,
                converged: true,
                final_delta: 0.0,
                contraction_warning: false,
            },
        });
    }
    let (weight, stretch) = match scale {
        PppScale::Unit => (1.0, 1.0),
        PppScale::Matched => {
            let k = count as f64;
            (1.0 / k, k.powf(1.0 / atoms.alpha))
        }
    };
    let y = &atoms.y;
    let kernel = Mat::from_fn(count, count, |i, j| -(-stretch * y[i] * y[j]).exp_m1());
    let (g, status) = solve_point(&kernel, weight, z, opts);
    let s = g.iter().sum::<Complex64>() / count as f64;
    Ok(PppSolution { z, g, s, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightMode;

    fn constant(n: usize, p: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_upper(n, MatrixKind::ExpectedP, |_, _| p, |_| 0.0)
    }

    #[test]
    fn profile_of_half_matrix() {
        let n = 9;
        let vp = variance_profile(&constant(n, 0.5)).unwrap();
        assert_eq!(vp.sigma_star, 0.5);
        assert!((vp.sigma - ((n - 1) as f64).sqrt() / 2.0).abs() < 1e-15);
        let zero = variance_profile(&constant(n, 0.0)).unwrap();
        assert_eq!((zero.sigma, zero.sigma_star), (0.0, 0.0));
        let b = norm_upper_bound(&zero, n);
        assert_eq!(b.expectation_bound, 0.0);
        assert!(variance_profile(&SymmetricMatrix::zeros(3, MatrixKind::General)).is_err());
    }

    #[test]
    fn crude_bound_value() {
        assert!((crude_bound(10_000) - 50.758_7).abs() < 1e-3);
    }

    #[test]
    fn zero_kernel_edge_is_zero() {
        let e = bulk_edge_of(&constant(20, 0.0), 3, 2).unwrap();
        assert_eq!(e.mean, 0.0);
        assert!(bulk_edge_of(&constant(20, 0.0), 3, 0).is_err());
    }

    #[test]
    fn lower_bound_trivial_delta() {
        let vp = variance_profile(&constant(10, 0.3)).unwrap();
        let r = norm_lower_bound_check(&vp, &[0.0], 1.0, Vec::new()).unwrap();
        assert_eq!(r.threshold, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn free_resolvent_for_zero_kernel() {
        let grid = lambda_grid(-1.0, 1.0, 5, 0.1).unwrap();
        let sol =
            cavity_solve_with_kernel(&constant(4, 0.0), &grid, &CavityOptions::default()).unwrap();
        for (z, s) in grid.iter().zip(&sol.s) {
            assert!((s - (-1.0 / z)).norm() < 1e-15);
        }
        assert!(sol.require_converged().is_ok());
    }

    #[test]
    fn rejects_bad_options() {
        let grid = lambda_grid(-1.0, 1.0, 3, 0.1).unwrap();
        let bad = CavityOptions {
            damping: 0.0,
            ..CavityOptions::default()
        };
        assert!(cavity_solve_with_kernel(&constant(3, 0.1), &grid, &bad).is_err());
        assert!(lambda_grid(0.0, 1.0, 3, 0.0).is_err());
    }

    #[test]
    fn atoms_are_ordered() {
        let a = ppp_sample(0.5, 100, 9).unwrap();
        assert!(a.gamma_cumsum.windows(2).all(|w| w[1] > w[0]));
        assert!(a.y.windows(2).all(|w| w[1] < w[0]));
        assert!(a.tail_sum_estimate() > 0.0);
        assert!(ppp_sample(0.5, 0, 9).is_err());
    }

    #[test]
    fn empty_atoms_give_free_resolvent() {
        let atoms = PppAtoms {
            alpha: 0.5,
            gamma_cumsum: vec![],
            y: vec![],
            seed: 0,
        };
        let z = Complex64::new(0.2, 0.3);
        let sol = ppp_fixed_point(&atoms, z, PppScale::Unit, &CavityOptions::default()).unwrap();
        assert_eq!(sol.s, -1.0 / z);
    }

    #[test]
    fn small_edge_measurement_is_reproducible() {
        let params = ModelParams::new(64, 0.5, 5, WeightMode::Deterministic).unwrap();
        let a = measure_bulk_edge(&params, 3).unwrap();
        let b = measure_bulk_edge(&params, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.mean <= crude_bound(64));
    }
}
