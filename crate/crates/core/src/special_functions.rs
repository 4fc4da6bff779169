//! Complex Gamma machinery and the Laplace transform of the Pareto density.
//!
//! Everything here is evaluated in log space where it matters, so that the
//! vertical line `Re z = -alpha/2` can be followed to large `|Im z|` without
//! overflow. The log-Gamma is the analytic continuation from the positive
//! real axis (branch cut along the negative real axis), which makes its
//! imaginary part a continuous function of `omega` along that line.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};

/// Complex number used throughout the analytic layer.
pub type ComplexValue = Complex64;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this real part the recurrence is applied before the Stirling series.
const STIRLING_MIN_RE: f64 = 15.0;

/// `B_{2m} / (2m (2m - 1))`, m = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `B_{2m} / (2m)`, m = 1..7, for the digamma expansion.
const DIGAMMA_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

/// `ln Gamma` and the continuous argument of `Gamma(-alpha/2 + i omega)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaLineEvaluation {
    pub alpha: f64,
    pub omega: f64,
    /// `ln |Gamma(-alpha/2 + i omega)|`
    pub log_abs: f64,
    /// Argument continued from the value `-pi` at `omega = 0`.
    pub arg_continuous: f64,
}

impl GammaLineEvaluation {
    /// The complex value `Gamma(-alpha/2 + i omega)`.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.arg_continuous)
    }
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

fn stirling_series(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut acc = Complex64::new(STIRLING_COEFFS[STIRLING_COEFFS.len() - 1], 0.0);
    for &c in STIRLING_COEFFS.iter().rev().skip(1) {
        acc = acc * inv2 + c;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + acc * inv
}

/// Principal-branch `ln Gamma(z)`.
///
/// The argument is shifted up with `ln Gamma(z) = ln Gamma(z + N) - sum ln(z + k)`
/// until `Re z >= 15`, where the Stirling series with eight Bernoulli terms
/// is accurate to roughly machine precision.
pub fn log_gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
    }
    if is_pole(z) {
        return Err(Error::Pole(z));
    }
    if z.re < -1.0e4 {
        return Err(Error::InvalidParameter(format!(
            "Re z = {} is outside the supported domain",
            z.re
        )));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < STIRLING_MIN_RE {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling_series(w) - shift)
}

/// `Gamma(z)`; errors instead of returning an infinite value.
pub fn gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    let lg = log_gamma_complex(z)?;
    if lg.re > 709.0 {
        return Err(Error::Overflow("Gamma(z)"));
    }
    Ok(lg.exp())
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "omega must be finite and >= 0, got {omega}"
        )))
    }
}

/// Evaluates `Gamma(-alpha/2 + i omega)` in log-polar form.
///
/// `arg_continuous` is the imaginary part of the analytic log-Gamma. Along
/// the line it starts at exactly `-pi` for `omega = 0` (where the value is a
/// negative real) and then varies continuously, so no unwrapping is needed.
pub fn gamma_line(alpha: f64, omega: f64) -> Result<GammaLineEvaluation> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    let lg = log_gamma_complex(Complex64::new(-0.5 * alpha, omega))?;
    let arg_continuous = if omega == 0.0 { -PI } else { lg.im };
    Ok(GammaLineEvaluation {
        alpha,
        omega,
        log_abs: lg.re,
        arg_continuous,
    })
}

fn digamma_asymptotic(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut acc = Complex64::new(DIGAMMA_COEFFS[DIGAMMA_COEFFS.len() - 1], 0.0);
    for &c in DIGAMMA_COEFFS.iter().rev().skip(1) {
        acc = acc * inv2 + c;
    }
    w.ln() - 0.5 * inv - acc * inv2
}

/// Derivative in `omega` of the continuous argument of `Gamma(-alpha/2 + i omega)`.
///
/// Sums the series
/// `-gamma + a/(a^2 + w^2) + sum_m [1/m - (m - a)/((m - a)^2 + w^2)]`, `a = alpha/2`,
/// explicitly up to an adaptive `M`, and closes it with the exact tail
/// `Re[psi(M + 1 + z) - psi(M + 1)]`, `z = -a + i w`, from the asymptotic
/// digamma expansion. The result equals `Re psi(-alpha/2 + i omega)`.
pub fn digamma_line_derivative(alpha: f64, omega: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    let a = 0.5 * alpha;
    let w2 = omega * omega;
    // The expansion at |M + 1 + z| >= 20 has a first omitted term below 1e-22.
    let mut m_max = 16_usize;
    while ((m_max as f64 + 1.0 - a).powi(2) + w2).sqrt() < 20.0 {
        m_max += 1;
    }
    let mut sum = -EULER_GAMMA + a / (a * a + w2);
    for m in 1..=m_max {
        let mf = m as f64;
        let shifted = mf - a;
        sum += 1.0 / mf - shifted / (shifted * shifted + w2);
    }
    let start = m_max as f64 + 1.0;
    let tail = digamma_asymptotic(Complex64::new(start - a, omega)).re
        - digamma_asymptotic(Complex64::new(start, 0.0)).re;
    Ok(sum + tail)
}

const LENTZ_TINY: f64 = 1.0e-300;

/// Continued fraction for `Gamma(z, s)`, returned as `h` with
/// `Gamma(z, s) = exp(-s) s^z h`. Converges quickly for `s >~ 1`.
fn upper_gamma_cf(z: Complex64, s: f64) -> Result<Complex64> {
    let tiny = Complex64::new(LENTZ_TINY, 0.0);
    let mut b = Complex64::new(s + 1.0, 0.0) - z;
    let mut c = Complex64::new(1.0 / LENTZ_TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..20_000 {
        let fi = i as f64;
        let an = -fi * (Complex64::new(fi, 0.0) - z);
        b += 2.0;
        d = an * d + b;
        if d.norm() < LENTZ_TINY {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < LENTZ_TINY {
            c = tiny;
        }
        d = d.inv();
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1.0e-16 {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        iterations: 20_000,
        delta: f64::NAN,
    })
}

/// Lower incomplete gamma by its power series; for small `s` only.
fn lower_gamma_series(z: Complex64, s: f64) -> Complex64 {
    let mut coeff = 1.0_f64; // (-s)^k / k!
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = 0_usize;
    loop {
        let term = coeff / (z + k as f64);
        sum += term;
        if term.norm() <= 1.0e-17 * sum.norm() && k as f64 > s {
            break;
        }
        k += 1;
        coeff *= -s / k as f64;
        if k > 500 {
            break;
        }
    }
    (z * s.ln()).exp() * sum
}

const SERIES_CUTOFF: f64 = 1.5;

/// Upper incomplete Gamma `Gamma(z, s) = int_s^inf t^(z-1) e^(-t) dt`.
///
/// Uses `Gamma(z) - gamma(z, s)` with the lower series for `s < 1.5` and a
/// Lentz continued fraction otherwise.
pub fn incomplete_gamma_upper(z: ComplexValue, s: f64) -> Result<ComplexValue> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "incomplete Gamma needs s > 0, got {s}"
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
    }
    if s < SERIES_CUTOFF {
        if is_pole(z) {
            return Err(Error::Pole(z));
        }
        Ok(gamma_complex(z)? - lower_gamma_series(z, s))
    } else {
        let h = upper_gamma_cf(z, s)?;
        Ok((z * s.ln() - s).exp() * h)
    }
}

fn check_laplace_args(alpha: f64, t: f64) -> Result<()> {
    check_alpha(alpha)?;
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Laplace argument must be finite and >= 0, got {t}"
        )))
    }
}

/// `1 - phi_alpha(t)` without cancellation for small `t`.
///
/// With `phi_alpha(t) = exp(-t) - t^alpha Gamma(1 - alpha, t)` this is
/// `-expm1(-t) + t^alpha [Gamma(1 - alpha) - gamma(1 - alpha, t)]`.
pub fn one_minus_pareto_laplace(alpha: f64, t: f64) -> Result<f64> {
    check_laplace_args(alpha, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t >= 1.0 {
        return Ok(1.0 - pareto_laplace(alpha, t)?);
    }
    let a = Complex64::new(1.0 - alpha, 0.0);
    let upper = gamma_complex(a)?.re - lower_gamma_series(a, t).re;
    Ok(-(-t).exp_m1() + t.powf(alpha) * upper)
}

/// Laplace transform `phi_alpha(t) = alpha int_1^inf x^(-1-alpha) e^(-t x) dx`
/// of the Pareto(alpha) density, i.e. `alpha t^alpha Gamma(-alpha, t)`.
pub fn pareto_laplace(alpha: f64, t: f64) -> Result<f64> {
    check_laplace_args(alpha, t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    if t < 1.0 {
        return Ok(1.0 - one_minus_pareto_laplace(alpha, t)?);
    }
    // alpha t^alpha Gamma(-alpha, t) = alpha e^(-t) h
    let h = upper_gamma_cf(Complex64::new(-alpha, 0.0), t)?;
    Ok(alpha * (-t).exp() * h.re)
}
