use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The rational correction of a kurtosis variant has a (numerically) vanishing
    /// denominator.
    #[error("singular correction at x = {x}: denominator {denominator:e}")]
    Singularity { x: f64, denominator: f64 },

    /// The correction integrand changes sign inside the integration range.
    #[error("integrand denominator changes sign in [{low}, {high}]")]
    SingularIntegrand { low: f64, high: f64 },

    /// Newton-Raphson derivative vanished at an iterate.
    #[error("Newton-Raphson derivative vanished at step {step} (delta = {delta})")]
    Iteration { step: usize, delta: f64 },

    #[error("no closed form for {0}")]
    NoClosedForm(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Monte-Carlo estimation failure.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Malformed `key=value` loss specification.
    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            key: key.into(),
            message: message.into(),
        }
    }
}
