//! Value at Risk and Expected Shortfall for skewed, heavy-tailed losses.
//!
//! Exact closed forms where they exist, normal-power, Cornish-Fisher and
//! kurtosis-corrected approximations, and a Monte-Carlo reference for
//! compound Poisson losses.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod stdnormal;

pub use approx::{ApproxMethod, RiskEstimate, Variant};
pub use distributions::{LossSpec, MomentSummary, Severity};
pub use error::{Error, Result};
pub use montecarlo::{McConfig, McEstimate, SampleSet};
