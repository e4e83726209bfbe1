use thiserror::Error;

/// Errors produced by the influence engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested method or estimator is not available for the function class.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Variance-normalized quantities are undefined for a constant function.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// An evaluator produced a non-finite value.
    #[error("non-finite value {value} at point {point:?}")]
    TaintedSample { point: Vec<f64>, value: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// Which branch of a piecewise closed form applies cannot be decided numerically.
    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Configuration(msg.into()))
}
