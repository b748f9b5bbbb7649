use thiserror::Error;

/// Errors raised by the model, map, and simulator layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument falls outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The map is only defined when the downstream link is the bottleneck.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The branch slope would divide by zero (xi = 0 or xi = 1).
    #[error("degenerate slope: {0}")]
    DegenerateSlope(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("half-life undefined: per-lap ratio {0} is not below 1")]
    UndefinedHalfLife(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
