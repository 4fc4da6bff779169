//! Closed-form eigenvalue predictions for the expected matrix `P`.
//!
//! The leading eigenvalues are `lambda_k = (-1)^(k+1) alpha |Gamma(-alpha/2 + i omega_k)| sqrt(n)`,
//! where `omega_k` solves the admissibility equation
//!
//! ```text
//! f(omega) = (omega / alpha) ln n - k pi,    f(omega) = arg Gamma(-alpha/2 + i omega)
//! ```
//!
//! with `f` the continuous argument anchored at `f(0) = -pi`. Geometrically
//! the `lambda_k` are the real-axis crossings of the logarithmic spiral
//! `sigma(omega) = -alpha Gamma(-alpha/2 - i omega) n^(1/2 + i omega/alpha)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_n, Error, Result};
use crate::roots;
use crate::special_functions::{digamma_line_derivative, gamma_line, EULER_GAMMA};

/// Residual tolerance an exact root must meet.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;

fn ln_n(n: usize) -> f64 {
    (n as f64).ln()
}

fn check_inputs(n: usize, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_n(n)
}

/// `lambda_1 = -alpha Gamma(-alpha/2) sqrt(n)`, positive on `0 < alpha < 1`.
pub fn lambda_1(n: usize, alpha: f64) -> Result<f64> {
    check_inputs(n, alpha)?;
    let g = gamma_line(alpha, 0.0)?;
    Ok(alpha * g.log_abs.exp() * (n as f64).sqrt())
}

/// `f(omega) - ((omega / alpha) ln n - k pi)`.
pub fn admissibility_residual(k: usize, omega: f64, n: usize, alpha: f64) -> Result<f64> {
    check_inputs(n, alpha)?;
    let f = gamma_line(alpha, omega)?.arg_continuous;
    Ok(f - (omega / alpha * ln_n(n) - k as f64 * PI))
}

/// Signed eigenvalue for a given `omega_k`; the sign is `(-1)^(k+1)` so that
/// `k = 1` is the positive Perron eigenvalue.
pub fn lambda_k_from_omega(k: usize, omega_k: f64, n: usize, alpha: f64) -> Result<f64> {
    check_inputs(n, alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let g = gamma_line(alpha, omega_k)?;
    let magnitude = alpha * g.log_abs.exp() * (n as f64).sqrt();
    Ok(if k % 2 == 1 { magnitude } else { -magnitude })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    ExactRoot,
    Approximate,
}

/// Bookkeeping from the bracketed solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: usize,
    /// Slope `ln n / alpha` of the right-hand side.
    pub line_slope: f64,
    /// Largest sampled `f'` on the bracket.
    pub max_arg_slope: f64,
    /// `max_arg_slope < line_slope`: the residual is strictly decreasing and the root unique.
    pub monotone: bool,
    /// The same magnitude with the opposite parity `(-1)^k`.
    pub opposite_parity_lambda: f64,
}

/// One rung of the eigenvalue ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPrediction {
    pub k: usize,
    pub omega_k: f64,
    pub lambda_k: f64,
    pub method: RootMethod,
    pub residual: f64,
    pub diagnostics: Option<SolverDiagnostics>,
}

const MONOTONE_SAMPLES: usize = 65;

/// Solves the admissibility equation for `omega_k` and evaluates `lambda_k`.
///
/// `k = 1` returns `omega = 0` exactly. For `k >= 2` the residual is positive
/// at 0 and the root is bracketed starting from `2 alpha (k + 1) pi / ln n`,
/// growing geometrically up to the ceiling `alpha (k + 4) pi / ln n`; past the
/// ceiling the index is outside the ladder and `NoRoot` is returned.
pub fn solve_omega_k(k: usize, n: usize, alpha: f64) -> Result<SpectralPrediction> {
    check_inputs(n, alpha)?;
    let log_n = ln_n(n);
    let line_slope = log_n / alpha;
    let ceiling = alpha * (k as f64 + 4.0) * PI / log_n;
    if k == 1 {
        let lambda = lambda_1(n, alpha)?;
        return Ok(SpectralPrediction {
            k,
            omega_k: 0.0,
            lambda_k: lambda,
            method: RootMethod::ExactRoot,
            residual: admissibility_residual(1, 0.0, n, alpha)?,
            diagnostics: None,
        });
    }
    let residual = |w: f64| admissibility_residual(k, w, n, alpha);
    if residual(0.0)? <= 0.0 {
        return Err(Error::NoRoot {
            k,
            omega_max: ceiling,
        });
    }
    let mut lo = 0.0;
    let mut hi = (2.0 * alpha * (k as f64 + 1.0) * PI / log_n).min(ceiling);
    while residual(hi)? > 0.0 {
        if hi >= ceiling {
            return Err(Error::NoRoot {
                k,
                omega_max: ceiling,
            });
        }
        lo = hi;
        hi = (hi * 1.5).min(ceiling);
    }
    let (omega, iterations) = roots::brent(residual, lo, hi, 1e-15, 200)?;
    let r = residual(omega)?;
    if r.abs() >= ROOT_RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            iterations,
            delta: r.abs(),
        });
    }
    let mut max_arg_slope = f64::NEG_INFINITY;
    for i in 0..MONOTONE_SAMPLES {
        let w = lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64;
        max_arg_slope = max_arg_slope.max(digamma_line_derivative(alpha, w)?);
    }
    let lambda = lambda_k_from_omega(k, omega, n, alpha)?;
    Ok(SpectralPrediction {
        k,
        omega_k: omega,
        lambda_k: lambda,
        method: RootMethod::ExactRoot,
        residual: r,
        diagnostics: Some(SolverDiagnostics {
            bracket_lo: lo,
            bracket_hi: hi,
            iterations,
            line_slope,
            max_arg_slope,
            monotone: max_arg_slope < line_slope,
            opposite_parity_lambda: -lambda,
        }),
    })
}

/// Predictions for `k = 1..=k_max`, stopping at the first index without a root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionLadder {
    pub predictions: Vec<SpectralPrediction>,
    /// First `k` that had no admissible root, if the ladder was cut short.
    pub truncated_at: Option<usize>,
}

pub fn prediction_ladder(k_max: usize, n: usize, alpha: f64) -> Result<PredictionLadder> {
    check_inputs(n, alpha)?;
    let mut predictions = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        match solve_omega_k(k, n, alpha) {
            Ok(p) => predictions.push(p),
            Err(Error::NoRoot { .. }) => {
                return Ok(PredictionLadder {
                    predictions,
                    truncated_at: Some(k),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PredictionLadder {
        predictions,
        truncated_at: None,
    })
}

/// `omega_alpha = sqrt(alpha/2 (1/gamma - alpha/2))`, the zeroth-order stationary point of `f`.
pub fn omega_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = 0.5 * alpha;
    Ok((a * (1.0 / EULER_GAMMA - a)).sqrt())
}

/// Plateau value `phi_alpha = f(omega_alpha)`.
pub fn phi_alpha(alpha: f64) -> Result<f64> {
    Ok(gamma_line(alpha, omega_alpha(alpha)?)?.arg_continuous)
}

/// `omega_k ~ alpha (k pi + phi_alpha) / ln n`, meaningful for `1 < k <~ ln n`.
pub fn omega_k_approx(k: usize, n: usize, alpha: f64) -> Result<f64> {
    check_inputs(n, alpha)?;
    if k < 2 {
        return Err(Error::InvalidParameter(
            "the plateau approximation needs k >= 2".into(),
        ));
    }
    Ok(alpha * (k as f64 * PI + phi_alpha(alpha)?) / ln_n(n))
}

/// Prediction built from the approximate `omega_k`.
pub fn approximate_prediction(k: usize, n: usize, alpha: f64) -> Result<SpectralPrediction> {
    let omega = omega_k_approx(k, n, alpha)?;
    Ok(SpectralPrediction {
        k,
        omega_k: omega,
        lambda_k: lambda_k_from_omega(k, omega, n, alpha)?,
        method: RootMethod::Approximate,
        residual: admissibility_residual(k, omega, n, alpha)?,
        diagnostics: None,
    })
}

/// Stationary point of `f` in closed form, next to a numerical estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub alpha: f64,
    pub omega_alpha: f64,
    pub phi_alpha: f64,
    /// `f'(omega_alpha)` from the full series.
    pub derivative_at_omega_alpha: f64,
    /// First zero of `f'` on `(0, 5]` or, when `f'` stays positive, its
    /// first local minimum (the centre of the plateau).
    pub omega_star_numeric: f64,
    /// Whether `omega_star_numeric` is a genuine zero of `f'`.
    pub star_is_root: bool,
}

const STAR_SCAN_MAX: f64 = 5.0;
const STAR_SCAN_STEP: f64 = 0.005;

pub fn stationary_point(alpha: f64) -> Result<StationaryPoint> {
    let omega_a = omega_alpha(alpha)?;
    let phi = gamma_line(alpha, omega_a)?.arg_continuous;
    let derivative = |w: f64| digamma_line_derivative(alpha, w);

    let steps = (STAR_SCAN_MAX / STAR_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (1..=steps).map(|i| i as f64 * STAR_SCAN_STEP).collect();
    let values = grid
        .iter()
        .map(|&w| derivative(w))
        .collect::<Result<Vec<f64>>>()?;

    let mut star = None;
    for i in 1..grid.len() {
        if values[i - 1] > 0.0 && values[i] <= 0.0 {
            let (root, _) = roots::brent(derivative, grid[i - 1], grid[i], 1e-14, 200)?;
            star = Some((root, true));
            break;
        }
    }
    let (omega_star_numeric, star_is_root) = match star {
        Some(s) => s,
        None => {
            let i_min = (1..grid.len() - 1)
                .find(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
                .unwrap_or_else(|| {
                    (0..grid.len())
                        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
                        .unwrap_or(0)
                });
            let lo = grid[i_min.saturating_sub(1)];
            let hi = grid[(i_min + 1).min(grid.len() - 1)];
            (roots::golden_min(derivative, lo, hi, 1e-10)?, false)
        }
    };
    Ok(StationaryPoint {
        alpha,
        omega_alpha: omega_a,
        phi_alpha: phi,
        derivative_at_omega_alpha: derivative(omega_a)?,
        omega_star_numeric,
        star_is_root,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiralBranch {
    Plus,
    Minus,
}

impl SpiralBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpiralBranch::Plus => "plus",
            SpiralBranch::Minus => "minus",
        }
    }
}

/// Point on `sigma_plus(omega) = -alpha Gamma(-alpha/2 - i omega) n^(1/2 + i omega/alpha)`
/// or its conjugate `sigma_minus`.
pub fn spiral_point(alpha: f64, n: usize, omega: f64, branch: SpiralBranch) -> Result<Complex64> {
    check_inputs(n, alpha)?;
    let g = gamma_line(alpha, omega)?;
    let radius = alpha * g.log_abs.exp() * (n as f64).sqrt();
    // -Gamma(-a - i w) = |Gamma| e^{i(pi - f)}; folding the pi into the phase
    // keeps the omega = 0 point exactly on the real axis.
    let phase = -g.arg_continuous - PI + omega / alpha * ln_n(n);
    let (s, c) = phase.sin_cos();
    Ok(match branch {
        SpiralBranch::Plus => Complex64::new(radius * c, radius * s),
        SpiralBranch::Minus => Complex64::new(radius * c, -radius * s),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralSample {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralLocus {
    pub alpha: f64,
    pub n: usize,
    pub branch: SpiralBranch,
    pub samples: Vec<SpiralSample>,
}

/// Samples a spiral branch on a uniform grid `0..=omega_max`.
pub fn spiral(
    alpha: f64,
    n: usize,
    omega_max: f64,
    steps: usize,
    branch: SpiralBranch,
) -> Result<SpiralLocus> {
    check_inputs(n, alpha)?;
    if !(omega_max.is_finite() && omega_max > 0.0) || steps < 2 {
        return Err(Error::InvalidParameter(
            "spiral needs omega_max > 0 and at least 2 steps".into(),
        ));
    }
    let samples = (0..steps)
        .map(|i| {
            let omega = omega_max * i as f64 / (steps - 1) as f64;
            spiral_point(alpha, n, omega, branch).map(|z| SpiralSample {
                omega,
                re: z.re,
                im: z.im,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpiralLocus {
        alpha,
        n,
        branch,
        samples,
    })
}

/// Real-axis crossing of the spiral; `k` counts crossings from `omega = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralCrossing {
    pub k: usize,
    pub omega: f64,
    pub value: f64,
}

/// Crossings of `sigma_plus` with the real axis on `[0, omega_max]`, found as
/// sign changes of the imaginary part on the sampling grid and refined by
/// bisection. The grid must be fine enough to separate consecutive crossings.
pub fn spiral_crossings(
    alpha: f64,
    n: usize,
    omega_max: f64,
    steps: usize,
) -> Result<Vec<SpiralCrossing>> {
    let locus = spiral(alpha, n, omega_max, steps, SpiralBranch::Plus)?;
    let first = locus.samples[0];
    let mut out = vec![SpiralCrossing {
        k: 1,
        omega: 0.0,
        value: first.re,
    }];
    let im_at = |w: f64| spiral_point(alpha, n, w, SpiralBranch::Plus).map(|z| z.im);
    for pair in locus.samples.windows(2).skip(1) {
        let (a, b) = (pair[0], pair[1]);
        if a.im == 0.0 || a.im.signum() == b.im.signum() && b.im != 0.0 {
            continue;
        }
        let omega = roots::bisect(im_at, a.omega, b.omega, 1e-14)?;
        out.push(SpiralCrossing {
            k: out.len() + 1,
            omega,
            value: spiral_point(alpha, n, omega, SpiralBranch::Plus)?.re,
        });
    }
    Ok(out)
}

/// First `k` whose predicted `|lambda_k|` falls below the bulk-edge proxy `sqrt(n)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStar {
    pub k_star: usize,
    pub ln_n: f64,
}

impl KStar {
    pub fn ratio(&self) -> f64 {
        self.k_star as f64 / self.ln_n
    }
}

pub fn k_star_estimate(n: usize, alpha: f64) -> Result<KStar> {
    check_inputs(n, alpha)?;
    let edge = 0.5 * (n as f64).sqrt();
    let mut k = 2;
    loop {
        match solve_omega_k(k, n, alpha) {
            Ok(p) if p.lambda_k.abs() < edge => break,
            Ok(_) => k += 1,
            // past the ladder the prefactor is already exponentially small
            Err(Error::NoRoot { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(KStar {
        k_star: k,
        ln_n: ln_n(n),
    })
}

/// Stirling envelope of `|lambda_k|` along the plateau approximation.
pub fn stirling_envelope(k: usize, n: usize, alpha: f64) -> Result<f64> {
    let omega = omega_k_approx(k, n, alpha)?;
    Ok(alpha
        * (2.0 * PI * n as f64).sqrt()
        * omega.powf(-0.5 * (alpha + 1.0))
        * (-0.5 * PI * omega).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rung_is_exact() {
        for alpha in [0.2, 0.5, 0.8] {
            for n in [100, 10_000] {
                assert_eq!(admissibility_residual(1, 0.0, n, alpha).unwrap(), 0.0);
                let p = solve_omega_k(1, n, alpha).unwrap();
                assert_eq!(p.omega_k, 0.0);
                assert_eq!(p.lambda_k, lambda_1(n, alpha).unwrap());
                assert!(p.lambda_k > 0.0);
            }
        }
    }

    #[test]
    fn lambda_1_scales_as_sqrt_n() {
        let a = lambda_1(10_000, 0.5).unwrap();
        let b = lambda_1(40_000, 0.5).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn k_zero_has_no_root() {
        assert!(matches!(
            solve_omega_k(0, 10_000, 0.5),
            Err(Error::NoRoot { k: 0, .. })
        ));
        // residual is strictly negative on the bracket
        for i in 0..50 {
            let w = i as f64 * 0.02;
            assert!(admissibility_residual(0, w, 10_000, 0.5).unwrap() < 0.0);
        }
    }

    #[test]
    fn signs_alternate_from_positive() {
        assert!(lambda_k_from_omega(1, 0.0, 100, 0.5).unwrap() > 0.0);
        assert!(lambda_k_from_omega(2, 0.3, 100, 0.5).unwrap() < 0.0);
        assert!(lambda_k_from_omega(3, 0.3, 100, 0.5).unwrap() > 0.0);
        assert!(lambda_k_from_omega(0, 0.3, 100, 0.5).is_err());
    }

    #[test]
    fn approx_needs_k_at_least_two() {
        assert!(omega_k_approx(1, 1000, 0.5).is_err());
        let d1 = omega_k_approx(3, 1000, 0.5).unwrap() - omega_k_approx(2, 1000, 0.5).unwrap();
        assert!((d1 - 0.5 * PI / 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spiral_starts_on_positive_axis() {
        let z = spiral_point(0.5, 10_000, 0.0, SpiralBranch::Plus).unwrap();
        assert_eq!(z.im, 0.0);
        assert_eq!(z.re, lambda_1(10_000, 0.5).unwrap());
        assert!(spiral(0.5, 100, 0.0, 10, SpiralBranch::Plus).is_err());
        assert!(spiral(0.5, 100, 1.0, 1, SpiralBranch::Plus).is_err());
    }
}
