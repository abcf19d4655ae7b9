//! Parametric loss families and their first four moments.
//!
//! Exponential losses are parameterised by rate, lognormal losses by the
//! mean `mu` and variance `sigma_sq` of the underlying normal.

mod text;

use crate::error::{Error, Result};
use crate::stdnormal;

pub use text::parse_config;

/// Mean, standard deviation, skewness and excess kurtosis of a loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl MomentSummary {
    /// Validated constructor: `sd > 0`, all finite, and
    /// `excess_kurtosis >= skewness^2 - 2`.
    pub fn new(mean: f64, sd: f64, skewness: f64, excess_kurtosis: f64) -> Result<Self> {
        let summary = MomentSummary {
            mean,
            sd,
            skewness,
            excess_kurtosis,
        };
        summary.validate()?;
        Ok(summary)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mean, self.sd, self.skewness, self.excess_kurtosis];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite moment summary {self:?}")));
        }
        if self.sd <= 0.0 {
            return Err(Error::domain("standard deviation must be positive"));
        }
        if !self.is_feasible() {
            return Err(Error::domain(format!(
                "infeasible moments: excess kurtosis {} < skewness^2 - 2",
                self.excess_kurtosis
            )));
        }
        Ok(())
    }

    /// Moment feasibility `κ >= γ² - 2`, with a relative slack for rounding.
    pub fn is_feasible(&self) -> bool {
        let g2 = self.skewness * self.skewness;
        self.excess_kurtosis + 2.0 >= g2 * (1.0 - 1e-12)
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    /// Summary of `a * S + b` for `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> MomentSummary {
        MomentSummary {
            mean: a * self.mean + b,
            sd: a * self.sd,
            ..*self
        }
    }
}

/// Mean, variance, skewness and excess kurtosis of a frequency or severity
/// component of a compound loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl ComponentMoments {
    /// Moments of a Poisson(`lambda`) claim count.
    pub fn poisson(lambda: f64) -> Self {
        ComponentMoments {
            mean: lambda,
            variance: lambda,
            skewness: lambda.powf(-0.5),
            excess_kurtosis: 1.0 / lambda,
        }
    }
}

impl From<MomentSummary> for ComponentMoments {
    fn from(m: MomentSummary) -> Self {
        ComponentMoments {
            mean: m.mean,
            variance: m.variance(),
            skewness: m.skewness,
            excess_kurtosis: m.excess_kurtosis,
        }
    }
}

/// Positive-support severity families usable inside a compound Poisson loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Severity {
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma_sq: f64 },
}

impl Severity {
    fn validate(&self) -> Result<()> {
        match *self {
            Severity::Exponential { rate } => check_positive("sev_lambda", rate),
            Severity::Lognormal { mu, sigma_sq } => {
                check_finite("sev_mu", mu)?;
                check_positive("sev_sigma_sq", sigma_sq)
            }
        }
    }

    /// `ln E(X^k)`.
    pub fn ln_raw_moment(&self, k: u32) -> f64 {
        match *self {
            Severity::Exponential { rate } => ln_factorial(k) - k as f64 * rate.ln(),
            Severity::Lognormal { mu, sigma_sq } => {
                let k = k as f64;
                k * mu + 0.5 * k * k * sigma_sq
            }
        }
    }

    pub fn raw_moment(&self, k: u32) -> f64 {
        self.ln_raw_moment(k).exp()
    }

    pub fn as_loss(&self) -> LossSpec {
        match *self {
            Severity::Exponential { rate } => LossSpec::Exponential { rate },
            Severity::Lognormal { mu, sigma_sq } => LossSpec::Lognormal { mu, sigma_sq },
        }
    }
}

/// A loss distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    Exponential {
        rate: f64,
    },
    /// `P(S < x) = 1 - (c/x)^a` for `x >= c`; requires `a > 4`.
    ParetoI {
        shape: f64,
        scale: f64,
    },
    Lognormal {
        mu: f64,
        sigma_sq: f64,
    },
    CompoundPoisson {
        lambda: f64,
        severity: Severity,
    },
    /// Compound loss known only through component moment summaries.
    CompoundGeneral {
        frequency: ComponentMoments,
        severity: ComponentMoments,
    },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Exponential { rate } => check_positive("lambda", rate),
            LossSpec::ParetoI { shape, scale } => {
                check_positive("c", scale)?;
                check_finite("a", shape)?;
                if shape <= 4.0 {
                    return Err(Error::domain(format!(
                        "Pareto shape a = {shape}: fourth moment undefined unless a > 4"
                    )));
                }
                Ok(())
            }
            LossSpec::Lognormal { mu, sigma_sq } => {
                check_finite("mu", mu)?;
                check_positive("sigma_sq", sigma_sq)
            }
            LossSpec::CompoundPoisson { lambda, severity } => {
                check_positive("lambda", lambda)?;
                severity.validate()
            }
            LossSpec::CompoundGeneral {
                frequency,
                severity,
            } => check_compound_components(&frequency, &severity),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            LossSpec::Exponential { .. } => "exponential",
            LossSpec::ParetoI { .. } => "pareto",
            LossSpec::Lognormal { .. } => "lognormal",
            LossSpec::CompoundPoisson { .. } => "compound_poisson",
            LossSpec::CompoundGeneral { .. } => "compound_general",
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(
            self,
            LossSpec::Exponential { .. } | LossSpec::ParetoI { .. } | LossSpec::Lognormal { .. }
        )
    }
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{key} must be finite, got {v}")))
    }
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{key} must be positive and finite, got {v}")))
    }
}

fn check_compound_components(freq: &ComponentMoments, sev: &ComponentMoments) -> Result<()> {
    let values = [
        freq.mean,
        freq.variance,
        freq.skewness,
        freq.excess_kurtosis,
        sev.mean,
        sev.variance,
        sev.skewness,
        sev.excess_kurtosis,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("compound component moments must be finite"));
    }
    if freq.mean == 0.0 {
        return Err(Error::domain("compound frequency mean must be non-zero"));
    }
    if sev.variance == 0.0 {
        return Err(Error::domain("compound severity variance must be non-zero"));
    }
    if freq.variance < 0.0 || sev.variance < 0.0 {
        return Err(Error::domain("variances must be non-negative"));
    }
    Ok(())
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Closed-form moment summary of a loss.
pub fn moment_summary(spec: &LossSpec) -> Result<MomentSummary> {
    spec.validate()?;
    let summary = match *spec {
        LossSpec::Exponential { rate } => MomentSummary {
            mean: 1.0 / rate,
            sd: 1.0 / rate,
            skewness: 2.0,
            excess_kurtosis: 6.0,
        },
        LossSpec::ParetoI { shape: a, scale: c } => MomentSummary {
            mean: a * c / (a - 1.0),
            sd: (a * c * c / ((a - 1.0).powi(2) * (a - 2.0))).sqrt(),
            skewness: 2.0 * (1.0 + a) / (a - 3.0) * ((a - 2.0) / a).sqrt(),
            excess_kurtosis: 6.0 * (a.powi(3) + a * a - 6.0 * a - 2.0)
                / (a * (a - 3.0) * (a - 4.0)),
        },
        LossSpec::Lognormal { mu, sigma_sq } => {
            let w = sigma_sq.exp();
            let wm1 = sigma_sq.exp_m1();
            MomentSummary {
                mean: (mu + 0.5 * sigma_sq).exp(),
                sd: (wm1 * (2.0 * mu + sigma_sq).exp()).sqrt(),
                skewness: (w + 2.0) * wm1.sqrt(),
                excess_kurtosis: w.powi(4) + 2.0 * w.powi(3) + 3.0 * w * w - 6.0,
            }
        }
        LossSpec::CompoundPoisson { lambda, severity } => {
            compound_poisson_moments(lambda, &severity)
        }
        LossSpec::CompoundGeneral {
            frequency,
            severity,
        } => compound_moments(&frequency, &severity)?,
    };
    Ok(summary)
}

/// Compound Poisson moments from severity raw moments:
/// `E S = λ E X`, `D² S = λ E X²`, `γ = E X³ / (√λ (E X²)^{3/2})`,
/// `κ = E X⁴ / (λ (E X²)²)`. Evaluated in log space so that very heavy
/// lognormal severities do not overflow.
pub fn compound_poisson_moments(lambda: f64, severity: &Severity) -> MomentSummary {
    let l1 = severity.ln_raw_moment(1);
    let l2 = severity.ln_raw_moment(2);
    let l3 = severity.ln_raw_moment(3);
    let l4 = severity.ln_raw_moment(4);
    let ln_lambda = lambda.ln();
    MomentSummary {
        mean: (ln_lambda + l1).exp(),
        sd: (0.5 * (ln_lambda + l2)).exp(),
        skewness: (l3 - 0.5 * ln_lambda - 1.5 * l2).exp(),
        excess_kurtosis: (l4 - ln_lambda - 2.0 * l2).exp(),
    }
}

/// `E(X^k) = exp(kμ + k²σ²/2)` for a lognormal `X`.
pub fn lognormal_raw_moment(mu: f64, sigma_sq: f64, k: u32) -> f64 {
    Severity::Lognormal { mu, sigma_sq }.raw_moment(k)
}

/// Moments of a compound sum `S = X_1 + ... + X_N` from the moments of the
/// claim count `N` and the claim size `X_1`.
///
/// The excess kurtosis is the fourth cumulant `Ã = A - 3 (D² S)²` expanded
/// term by term, so no cancellation against `3 (D² S)²` occurs:
///
/// `Ã = κ_X E N (D²X)² + 4 γ_X D²N (D²X)^{3/2} E X + 3 D²N (D²X)²
///      + κ_N (D²N)² (E X)⁴ + 6 γ_N (D²N)^{3/2} (E X)² D²X`.
pub fn compound_moments(freq: &ComponentMoments, sev: &ComponentMoments) -> Result<MomentSummary> {
    check_compound_components(freq, sev)?;
    let (en, vn, gn, kn) = (freq.mean, freq.variance, freq.skewness, freq.excess_kurtosis);
    let (ex, vx, gx, kx) = (sev.mean, sev.variance, sev.skewness, sev.excess_kurtosis);

    let variance = en * vx + vn * ex * ex;
    if !(variance > 0.0) {
        return Err(Error::domain("compound variance must be positive"));
    }
    let third = gn * vn.powf(1.5) * ex.powi(3) + 3.0 * vn * ex * vx + en * gx * vx.powf(1.5);
    let a_tilde = kx * en * vx * vx
        + 4.0 * gx * vn * vx.powf(1.5) * ex
        + 3.0 * vn * vx * vx
        + kn * vn * vn * ex.powi(4)
        + 6.0 * gn * vn.powf(1.5) * ex * ex * vx;

    Ok(MomentSummary {
        mean: en * ex,
        sd: variance.sqrt(),
        skewness: third / variance.powf(1.5),
        excess_kurtosis: a_tilde / (variance * variance),
    })
}

/// Excess kurtosis of a compound sum through the fourth raw-central form
/// `A / (D² S)² - 3`. Mathematically equal to
/// [`compound_moments`]`.excess_kurtosis`, but loses precision when the
/// kurtosis is small relative to 3.
pub fn compound_excess_kurtosis_central_form(
    freq: &ComponentMoments,
    sev: &ComponentMoments,
) -> Result<f64> {
    check_compound_components(freq, sev)?;
    let (en, vn, gn, kn) = (freq.mean, freq.variance, freq.skewness, freq.excess_kurtosis);
    let (ex, vx, gx, kx) = (sev.mean, sev.variance, sev.skewness, sev.excess_kurtosis);
    let variance = en * vx + vn * ex * ex;
    let a = (kx + 3.0) * en * vx * vx
        + 4.0 * gx * vn * vx.powf(1.5) * ex
        + 3.0 * (vn + en * (en - 1.0)) * vx * vx
        + (kn + 3.0) * vn * vn * ex.powi(4)
        + 6.0 * (gn * vn.powf(1.5) + en * vn) * ex * ex * vx;
    Ok(a / (variance * variance) - 3.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("confidence level must be in (0, 1), got {alpha}")))
    }
}

/// Closed-form Value at Risk (the `alpha`-quantile).
pub fn exact_var(spec: &LossSpec, alpha: f64) -> Result<f64> {
    spec.validate()?;
    check_alpha(alpha)?;
    match *spec {
        LossSpec::Exponential { rate } => Ok(-(-alpha).ln_1p() / rate),
        LossSpec::ParetoI { shape, scale } => Ok(scale * (1.0 - alpha).powf(-1.0 / shape)),
        LossSpec::Lognormal { mu, sigma_sq } => {
            let z = stdnormal::quantile(alpha)?;
            Ok((mu + sigma_sq.sqrt() * z).exp())
        }
        LossSpec::CompoundPoisson { .. } => Err(Error::NoClosedForm("compound Poisson VaR")),
        LossSpec::CompoundGeneral { .. } => Err(Error::NoClosedForm("compound VaR")),
    }
}

/// Closed-form Expected Shortfall `E(S | S >= VaR_S(alpha))`.
pub fn exact_es(spec: &LossSpec, alpha: f64) -> Result<f64> {
    spec.validate()?;
    check_alpha(alpha)?;
    match *spec {
        LossSpec::Exponential { rate } => Ok(exact_var(spec, alpha)? + 1.0 / rate),
        LossSpec::ParetoI { shape, .. } => Ok(shape / (shape - 1.0) * exact_var(spec, alpha)?),
        LossSpec::Lognormal { mu, sigma_sq } => {
            let z = stdnormal::quantile(alpha)?;
            let tail = stdnormal::sf(z - sigma_sq.sqrt());
            Ok((mu + 0.5 * sigma_sq).exp() * tail / (1.0 - alpha))
        }
        LossSpec::CompoundPoisson { .. } => Err(Error::NoClosedForm("compound Poisson ES")),
        LossSpec::CompoundGeneral { .. } => Err(Error::NoClosedForm("compound ES")),
    }
}

const CUMULANT_STEP: f64 = 5e-3;

/// `order`-th derivative at 0 of a log moment generating function by central
/// differences at `h` and `h/2`, combined with one Richardson level.
pub fn log_mgf_derivative_at_zero(log_mgf: impl Fn(f64) -> f64, order: u32, h: f64) -> Result<f64> {
    let stencil = |h: f64| -> f64 {
        let f = |k: f64| log_mgf(k * h);
        match order {
            1 => (f(1.0) - f(-1.0)) / (2.0 * h),
            2 => (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h),
            3 => (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h.powi(3)),
            _ => (f(2.0) - 4.0 * f(1.0) + 6.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / h.powi(4),
        }
    };
    if !(1..=4).contains(&order) {
        return Err(Error::domain(format!("cumulant order must be in 1..=4, got {order}")));
    }
    Ok((4.0 * stencil(0.5 * h) - stencil(h)) / 3.0)
}

/// Cumulants of the standardized loss `Z = (S - E S) / sd(S)` from its log
/// moment generating function. Only families with a closed-form MGF near zero
/// are supported, i.e. the exponential, where `M_Z(t) = e^{-t} / (1 - t)`.
pub fn numeric_cumulants(spec: &LossSpec, order: u32) -> Result<f64> {
    spec.validate()?;
    match spec {
        LossSpec::Exponential { .. } => {
            log_mgf_derivative_at_zero(|t| -t - (-t).ln_1p(), order, CUMULANT_STEP)
        }
        other => Err(Error::Unsupported(format!(
            "numeric cumulants need a finite MGF; {} has none in closed form",
            other.family_name()
        ))),
    }
}
