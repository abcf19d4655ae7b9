//! Standard normal kernel: density, distribution function, quantile and the
//! density derivatives expressed through probabilists' Hermite polynomials.
//!
//! The distribution function is evaluated through `erfc`, so both tails keep
//! full relative precision. Use [`sf`] rather than `1.0 - cdf(x)` for upper
//! tail probabilities.

use crate::error::{Error, Result};
use libm::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail probability `1 - cdf(x)`, accurate for large positive `x`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal quantile `z_p`.
///
/// Acklam's rational approximation followed by two Halley steps against
/// [`cdf`]. Upper-half probabilities are inverted through the lower tail of
/// `1 - p` (exact in floating point for `p >= 0.5`), which keeps
/// `cdf(quantile(p))` within about `1e-16` of `p` everywhere.
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "quantile requires p in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (tail, upper) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let mut x = acklam_lower(tail);
    for _ in 0..2 {
        let e = cdf(x) - tail;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(if upper { -x } else { x })
}

// Initial guess for p <= 0.5.
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Hermite polynomial `He_2(x) = x^2 - 1`.
#[inline]
pub fn he2(x: f64) -> f64 {
    x * x - 1.0
}

/// Hermite polynomial `He_3(x) = x^3 - 3x`.
#[inline]
pub fn he3(x: f64) -> f64 {
    x * (x * x - 3.0)
}

/// Hermite polynomial `He_4(x) = x^4 - 6x^2 + 3`.
#[inline]
pub fn he4(x: f64) -> f64 {
    let x2 = x * x;
    x2 * (x2 - 6.0) + 3.0
}

/// `k`-th derivative of the standard normal density, `k` in `1..=4`:
/// `φ^(k)(x) = (-1)^k He_k(x) φ(x)`.
pub fn pdf_derivative(k: u32, x: f64) -> Result<f64> {
    let phi = pdf(x);
    match k {
        1 => Ok(-x * phi),
        2 => Ok(he2(x) * phi),
        3 => Ok(-he3(x) * phi),
        4 => Ok(he4(x) * phi),
        _ => Err(Error::domain(format!(
            "density derivative order must be in 1..=4, got {k}"
        ))),
    }
}
