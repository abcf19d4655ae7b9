//! Adaptive Simpson integration and the Expected Shortfall correction
//! integrals `∫_lower^∞ δ(y) φ(y) dy` of the kurtosis variants.

use crate::approx::Variant;
use crate::error::{Error, Result};
use crate::stdnormal;

/// Integration is truncated at `min(lower + TRUNCATION, HARD_UPPER)`.
pub const TRUNCATION: f64 = 40.0;
pub const HARD_UPPER: f64 = 45.0;

// Grid step of the denominator sign scan.
const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonOptions {
    /// Absolute tolerance over the whole interval.
    pub tol: f64,
    pub max_depth: u32,
    /// Number of equal panels the interval is split into before adapting.
    pub panels: usize,
}

impl SimpsonOptions {
    /// Options for `∫_lower^∞`: the absolute tolerance 1e-12 is tightened in
    /// proportion to `φ(lower)` so the result stays accurate relative to the
    /// mass beyond `lower`, and the range starts out in panels of width about
    /// 1/2 so the initial rule resolves the Gaussian decay.
    pub fn for_tail(lower: f64) -> Self {
        let scale = (stdnormal::pdf(lower) / stdnormal::FRAC_1_SQRT_2PI).min(1.0);
        let width = truncation_point(lower) - lower;
        SimpsonOptions {
            tol: 1e-12 * scale,
            max_depth: 40,
            panels: (2.0 * width).ceil().max(1.0) as usize,
        }
    }
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        SimpsonOptions {
            tol: 1e-12,
            max_depth: 40,
            panels: 1,
        }
    }
}

/// Adaptive Simpson rule with the usual `|S2 - S| / 15` error estimate and
/// Richardson correction. Panels that hit `max_depth` are accepted as is and
/// their error estimate is still accumulated.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: &SimpsonOptions,
) -> IntegralResult {
    let panels = opts.panels.max(1);
    let width = (b - a) / panels as f64;
    let mut acc = IntegralResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        evaluations: 0,
    };
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        acc.evaluations += 3;
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let seg = Segment { a: lo, b: hi, fa: flo, fm: fmid, fb: fhi, whole };
        recurse(&f, seg, opts.tol / panels as f64, opts.max_depth, &mut acc);
    }
    acc
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn recurse(f: &impl Fn(f64) -> f64, s: Segment, tol: f64, depth: u32, acc: &mut IntegralResult) {
    let m = 0.5 * (s.a + s.b);
    let (lm, rm) = (0.5 * (s.a + m), 0.5 * (m + s.b));
    let (flm, frm) = (f(lm), f(rm));
    acc.evaluations += 2;
    let h = (s.b - s.a) / 12.0;
    let left = h * (s.fa + 4.0 * flm + s.fm);
    let right = h * (s.fm + 4.0 * frm + s.fb);
    let diff = left + right - s.whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        acc.value += left + right + diff / 15.0;
        acc.abs_error_estimate += diff.abs() / 15.0;
        return;
    }
    let l = Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left };
    let r = Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right };
    recurse(f, l, 0.5 * tol, depth - 1, acc);
    recurse(f, r, 0.5 * tol, depth - 1, acc);
}

/// Upper integration limit used for a given lower limit.
pub fn truncation_point(lower: f64) -> f64 {
    (lower + TRUNCATION).min(HARD_UPPER)
}

/// Checks that the variant denominator keeps one sign on `[low, high]`.
///
/// For `γ, κ > 0` no zero exists beyond `√(3+√6)` (beyond `√3` for variants
/// II and IV), so only the part of the range below that bound is scanned.
pub fn check_denominator_sign(variant: Variant, gamma: f64, kappa: f64, low: f64, high: f64) -> Result<()> {
    let bound = variant.negative_denominator_bound();
    let guaranteed = gamma > 0.0 && (kappa > 0.0 || !variant.uses_kurtosis_denominator());
    let scan_high = if guaranteed { high.min(bound) } else { high };
    let den = |y: f64| variant.denominator(y, gamma, kappa);

    let mut prev_y = low;
    let mut prev = den(low);
    if prev == 0.0 {
        return Err(Error::SingularIntegrand { low, high: low });
    }
    if scan_high <= low {
        return Ok(());
    }
    let steps = ((scan_high - low) / SCAN_STEP).ceil().max(1.0) as usize;
    for i in 1..=steps {
        let y = if i == steps { scan_high } else { low + i as f64 * SCAN_STEP };
        let d = den(y);
        if d == 0.0 || d.signum() != prev.signum() {
            return Err(Error::SingularIntegrand { low: prev_y, high: y });
        }
        prev_y = y;
        prev = d;
    }
    // Past the scanned range the sign is fixed analytically, but the endpoint
    // must agree with it.
    if guaranteed && high > scan_high && (den(high) >= 0.0) != (prev >= 0.0) {
        return Err(Error::SingularIntegrand { low: scan_high, high });
    }
    Ok(())
}

/// `∫_lower^∞ δ_v(y) φ(y) dy`, with `δ_v` the variant's rational correction.
///
/// The range is truncated at [`truncation_point`]; the Gaussian tail
/// `1 - Φ(T)` bounds the neglected part (`|δ_v| <= 1` far out) and is added
/// to the error estimate. Uses [`SimpsonOptions::for_tail`].
pub fn es_correction_integral(variant: Variant, gamma: f64, kappa: f64, lower: f64) -> Result<IntegralResult> {
    es_correction_integral_with(variant, gamma, kappa, lower, &SimpsonOptions::for_tail(lower))
}

pub fn es_correction_integral_with(
    variant: Variant,
    gamma: f64,
    kappa: f64,
    lower: f64,
    opts: &SimpsonOptions,
) -> Result<IntegralResult> {
    if ![gamma, kappa, lower].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("correction integral needs finite gamma, kappa and lower limit"));
    }
    let upper = truncation_point(lower);
    if upper <= lower {
        return Ok(IntegralResult {
            value: 0.0,
            abs_error_estimate: stdnormal::sf(lower),
            evaluations: 0,
        });
    }
    check_denominator_sign(variant, gamma, kappa, lower, upper)?;
    let integrand = |y: f64| variant.delta_unchecked(y, gamma, kappa) * stdnormal::pdf(y);
    let mut result = adaptive_simpson(integrand, lower, upper, opts);
    result.abs_error_estimate += stdnormal::sf(upper);
    Ok(result)
}
