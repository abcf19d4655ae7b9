//! Closed-form VaR and ES approximations from the first four moments.
//!
//! The standardized loss `Z = (S - E S) / sd(S)` is approximated by the
//! fourth-order Gram-Charlier expansion
//!
//! `GC₄(x) = Φ(x) + (γ/6 (1 - x²) + κ/24 (3x - x³)) φ(x)`,
//!
//! and the VaR of `Z` is written as `z_α + δ(z_α)`, where `δ(x)` solves
//! `Φ(x) = GC₄(x + δ)`. One Newton step from `δ = 0` gives the rational
//! correction of variant I; variants II-IV drop the kurtosis term from the
//! denominator, the numerator, or both.

use std::fmt;
use std::str::FromStr;

use crate::distributions::MomentSummary;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::stdnormal::{self, cdf, he2, he3, he4, pdf, sf};

/// `√(3 + √6)`: beyond this point the variant I/III denominator is negative
/// for all `γ, κ > 0`.
pub fn c1_point() -> f64 {
    (3.0 + 6f64.sqrt()).sqrt()
}

/// `√3`: beyond this point the variant II/IV denominator is negative for
/// `γ > 0`, and the variant I/III one as well when `κ < 4`.
pub fn c2_point() -> f64 {
    3f64.sqrt()
}

/// `C₁ = Φ(√(3+√6)) ≈ 0.990213`.
pub fn c1() -> f64 {
    cdf(c1_point())
}

/// `C₂ = Φ(√3) ≈ 0.9583677`.
pub fn c2() -> f64 {
    cdf(c2_point())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ApproxMethod {
    Npa,
    CornishFisher,
    KurtI,
    KurtII,
    KurtIII,
    KurtIV,
}

impl ApproxMethod {
    pub const ALL: [ApproxMethod; 6] = [
        ApproxMethod::Npa,
        ApproxMethod::CornishFisher,
        ApproxMethod::KurtI,
        ApproxMethod::KurtII,
        ApproxMethod::KurtIII,
        ApproxMethod::KurtIV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ApproxMethod::Npa => "NPA",
            ApproxMethod::CornishFisher => "CF",
            ApproxMethod::KurtI => "KurtI",
            ApproxMethod::KurtII => "KurtII",
            ApproxMethod::KurtIII => "KurtIII",
            ApproxMethod::KurtIV => "KurtIV",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            ApproxMethod::KurtI => Some(Variant::I),
            ApproxMethod::KurtII => Some(Variant::II),
            ApproxMethod::KurtIII => Some(Variant::III),
            ApproxMethod::KurtIV => Some(Variant::IV),
            _ => None,
        }
    }
}

impl fmt::Display for ApproxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ApproxMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "npa" => Ok(ApproxMethod::Npa),
            "cf" | "cornishfisher" | "cornish-fisher" => Ok(ApproxMethod::CornishFisher),
            "kurti" | "kurt1" | "i" => Ok(ApproxMethod::KurtI),
            "kurtii" | "kurt2" | "ii" => Ok(ApproxMethod::KurtII),
            "kurtiii" | "kurt3" | "iii" => Ok(ApproxMethod::KurtIII),
            "kurtiv" | "kurt4" | "iv" => Ok(ApproxMethod::KurtIV),
            other => Err(Error::parse(
                "methods",
                format!("unknown method `{other}` (NPA, CF, KurtI, KurtII, KurtIII, KurtIV)"),
            )),
        }
    }
}

/// The four rational corrections `δ(x) = numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Full one-step Newton correction.
    I,
    /// κ dropped from the denominator.
    II,
    /// κ dropped from the numerator.
    III,
    /// κ dropped from both.
    IV,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::I, Variant::II, Variant::III, Variant::IV];

    pub fn method(self) -> ApproxMethod {
        match self {
            Variant::I => ApproxMethod::KurtI,
            Variant::II => ApproxMethod::KurtII,
            Variant::III => ApproxMethod::KurtIII,
            Variant::IV => ApproxMethod::KurtIV,
        }
    }

    pub fn uses_kurtosis_numerator(self) -> bool {
        matches!(self, Variant::I | Variant::II)
    }

    pub fn uses_kurtosis_denominator(self) -> bool {
        matches!(self, Variant::I | Variant::III)
    }

    pub fn numerator(self, x: f64, gamma: f64, kappa: f64) -> f64 {
        let skew = -gamma / 6.0 * he2(x);
        if self.uses_kurtosis_numerator() {
            skew - kappa / 24.0 * he3(x)
        } else {
            skew
        }
    }

    pub fn denominator(self, x: f64, gamma: f64, kappa: f64) -> f64 {
        let base = -1.0 - gamma / 6.0 * he3(x);
        if self.uses_kurtosis_denominator() {
            base - kappa / 24.0 * he4(x)
        } else {
            base
        }
    }

    /// Point beyond which the denominator is negative whenever `γ > 0`
    /// (and `κ > 0` for I/III).
    pub fn negative_denominator_bound(self) -> f64 {
        if self.uses_kurtosis_denominator() {
            c1_point()
        } else {
            c2_point()
        }
    }

    /// Plain ratio, no singularity check.
    pub fn delta_unchecked(self, x: f64, gamma: f64, kappa: f64) -> f64 {
        self.numerator(x, gamma, kappa) / self.denominator(x, gamma, kappa)
    }
}

/// An approximated VaR or ES with its validity metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub method: ApproxMethod,
    pub alpha: f64,
    /// Variant denominator at `z_α`, for the kurtosis variants.
    pub denominator_value: Option<f64>,
    /// Whether `α` exceeds the level above which the variant's denominator
    /// is provably negative.
    pub in_validity_region: bool,
}

/// Level above which `method` is guaranteed well defined for moments
/// `(γ, κ)`: `C₂` for II/IV; for I/III `C₂` when `0 < κ < 4`, else `C₁`.
/// `None` for the methods without a rational correction.
pub fn validity_threshold(method: ApproxMethod, kappa: f64) -> Option<f64> {
    match method.variant()? {
        Variant::II | Variant::IV => Some(c2()),
        Variant::I | Variant::III if kappa > 0.0 && kappa < 4.0 => Some(c2()),
        Variant::I | Variant::III => Some(c1()),
    }
}

/// Gram-Charlier distribution function `GC₄(x)`.
pub fn gc4(x: f64, gamma: f64, kappa: f64) -> f64 {
    cdf(x) + gc4_correction(x, gamma, kappa) * pdf(x)
}

/// `1 - GC₄(x)` without cancellation in the upper tail.
pub fn gc4_survival(x: f64, gamma: f64, kappa: f64) -> f64 {
    sf(x) - gc4_correction(x, gamma, kappa) * pdf(x)
}

// γ/6 (1 - x²) + κ/24 (3x - x³)
fn gc4_correction(x: f64, gamma: f64, kappa: f64) -> f64 {
    -gamma / 6.0 * he2(x) - kappa / 24.0 * he3(x)
}

/// `h(x) = GC₄'(x) / φ(x) = κ/24 x⁴ + γ/6 x³ - κ/4 x² - γ/2 x + κ/8 + 1`.
/// Equal to minus the variant I denominator.
pub fn gc4_density_factor(x: f64, gamma: f64, kappa: f64) -> f64 {
    1.0 + gamma / 6.0 * he3(x) + kappa / 24.0 * he4(x)
}

/// Largest real root of [`gc4_density_factor`], if any. Beyond it `GC₄` is
/// strictly increasing.
pub fn gc4_largest_root(gamma: f64, kappa: f64) -> Option<f64> {
    let h = |x: f64| gc4_density_factor(x, gamma, kappa);
    // Cauchy bound on the roots of the polynomial, leading coefficient
    // κ/24 (or γ/6 when κ = 0).
    let coeffs = [kappa / 8.0 + 1.0, -gamma / 2.0, -kappa / 4.0, gamma / 6.0, kappa / 24.0];
    let lead_idx = coeffs.iter().rposition(|c| *c != 0.0)?;
    if lead_idx == 0 {
        return None;
    }
    let lead = coeffs[lead_idx];
    let bound = 1.0 + coeffs[..lead_idx].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);

    let steps = 20_000;
    let step = 2.0 * bound / steps as f64;
    let mut hi = bound;
    let mut f_hi = h(hi);
    for i in 1..=steps {
        let lo = bound - i as f64 * step;
        let f_lo = h(lo);
        if f_lo == 0.0 {
            return Some(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            return Some(bisect(h, lo, hi));
        }
        hi = lo;
        f_hi = f_lo;
    }
    None
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Confidence level at which the variant I denominator vanishes, i.e.
/// `Φ(x₀)` for the largest root `x₀` of the Gram-Charlier density factor.
/// Near this level KurtI blows up.
pub fn denominator_root_alpha(gamma: f64, kappa: f64) -> Option<f64> {
    gc4_largest_root(gamma, kappa).map(cdf)
}

/// `g_x(δ) = Φ(x) - GC₄(x + δ)`, evaluated as
/// `(1 - GC₄(x + δ)) - (1 - Φ(x))` to keep precision in the upper tail.
pub fn g(x: f64, delta: f64, gamma: f64, kappa: f64) -> f64 {
    let y = x + delta;
    if delta == 0.0 {
        return -gc4_correction(x, gamma, kappa) * pdf(x);
    }
    if x > 0.0 {
        (sf(y) - sf(x)) - gc4_correction(y, gamma, kappa) * pdf(y)
    } else {
        (cdf(x) - cdf(y)) - gc4_correction(y, gamma, kappa) * pdf(y)
    }
}

/// `d/dδ g_x(δ) = (-1 - γ/6 He₃(y) - κ/24 He₄(y)) φ(y)` with `y = x + δ`.
pub fn g_prime(x: f64, delta: f64, gamma: f64, kappa: f64) -> f64 {
    let y = x + delta;
    Variant::I.denominator(y, gamma, kappa) * pdf(y)
}

/// Rational correction `δ(x)` of the given variant.
///
/// Fails with [`Error::Singularity`] when
/// `|denominator| < 1e-12 (1 + |numerator|)`.
pub fn delta_correction(variant: Variant, x: f64, gamma: f64, kappa: f64) -> Result<f64> {
    let num = variant.numerator(x, gamma, kappa);
    let den = variant.denominator(x, gamma, kappa);
    if !(den.abs() >= 1e-12 * (1.0 + num.abs())) {
        return Err(Error::Singularity { x, denominator: den });
    }
    Ok(num / den)
}

/// `δ^(k)` of the Newton-Raphson recursion for `g_x(δ) = 0` started at 0.
/// `δ^(1)` is the variant I correction.
pub fn newton_raphson_delta(x: f64, gamma: f64, kappa: f64, k: usize) -> Result<f64> {
    let mut delta = 0.0;
    for step in 0..k {
        let d = g_prime(x, delta, gamma, kappa);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Iteration { step, delta });
        }
        let next = delta - g(x, delta, gamma, kappa) / d;
        if !next.is_finite() {
            return Err(Error::Iteration { step, delta });
        }
        delta = next;
    }
    Ok(delta)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("confidence level must be in (0, 1), got {alpha}")))
    }
}

fn check_method_moments(method: ApproxMethod, m: &MomentSummary) -> Result<()> {
    let Some(variant) = method.variant() else {
        return Ok(());
    };
    if !(m.skewness > 0.0) {
        return Err(Error::domain(format!(
            "{method} needs positive skewness, got {}",
            m.skewness
        )));
    }
    let uses_kappa = variant.uses_kurtosis_numerator() || variant.uses_kurtosis_denominator();
    if uses_kappa && m.excess_kurtosis < 0.0 {
        return Err(Error::domain(format!(
            "{method} needs non-negative excess kurtosis, got {}",
            m.excess_kurtosis
        )));
    }
    Ok(())
}

fn estimate(value: f64, method: ApproxMethod, alpha: f64, m: &MomentSummary, z: f64) -> RiskEstimate {
    let denominator_value = method
        .variant()
        .map(|v| v.denominator(z, m.skewness, m.excess_kurtosis));
    let in_validity_region = validity_threshold(method, m.excess_kurtosis).is_none_or(|t| alpha > t);
    RiskEstimate {
        value,
        method,
        alpha,
        denominator_value,
        in_validity_region,
    }
}

/// Approximate `VaR_S(α) = E S + sd(S) (z_α + correction)`.
///
/// The validity flag is advisory: below the threshold the value is still
/// returned as long as the denominator does not vanish.
pub fn var_approx(method: ApproxMethod, m: &MomentSummary, alpha: f64) -> Result<RiskEstimate> {
    check_alpha(alpha)?;
    m.validate()?;
    check_method_moments(method, m)?;
    let (gamma, kappa) = (m.skewness, m.excess_kurtosis);
    let z = stdnormal::quantile(alpha)?;
    let correction = match method {
        ApproxMethod::Npa => gamma / 6.0 * he2(z),
        ApproxMethod::CornishFisher => {
            gamma / 6.0 * he2(z) + kappa / 24.0 * he3(z)
                - gamma * gamma / 36.0 * (2.0 * z * z * z - 5.0 * z)
        }
        _ => delta_correction(method.variant().unwrap(), z, gamma, kappa)?,
    };
    Ok(estimate(m.mean + m.sd * (z + correction), method, alpha, m, z))
}

/// Approximate `ES_S(α)`.
///
/// NPA and Cornish-Fisher use their closed forms. The kurtosis variants use
/// `E S + sd/(1-α) (φ(z_α) + ∫_{z_α}^∞ δ(y) φ(y) dy)` and require `α` above
/// [`validity_threshold`], where the integrand has no pole.
pub fn es_approx(method: ApproxMethod, m: &MomentSummary, alpha: f64) -> Result<RiskEstimate> {
    check_alpha(alpha)?;
    m.validate()?;
    check_method_moments(method, m)?;
    let (gamma, kappa) = (m.skewness, m.excess_kurtosis);
    let z = stdnormal::quantile(alpha)?;
    let tail = 1.0 - alpha;
    let phi = pdf(z);
    let standardized = match method {
        ApproxMethod::Npa => phi / tail * (1.0 + gamma * z / 6.0),
        ApproxMethod::CornishFisher => {
            phi / tail
                * (1.0 + gamma * z / 6.0 + he2(z) * kappa / 24.0
                    + (1.0 - 2.0 * z * z) * gamma * gamma / 36.0)
        }
        _ => {
            let variant = method.variant().unwrap();
            let threshold = validity_threshold(method, kappa).unwrap();
            if alpha <= threshold {
                return Err(Error::domain(format!(
                    "{method} ES needs alpha > {threshold:.7}, got {alpha}"
                )));
            }
            let integral = quadrature::es_correction_integral(variant, gamma, kappa, z)?;
            (phi + integral.value) / tail
        }
    };
    Ok(estimate(m.mean + m.sd * standardized, method, alpha, m, z))
}

/// `E S + sd(S) √(-2 ln(1-α))`, the common first-order growth of the
/// kurtosis-variant VaR and ES as `α → 1`.
pub fn asymptotic_envelope(m: &MomentSummary, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(m.mean + m.sd * (-2.0 * (-alpha).ln_1p()).sqrt())
}
