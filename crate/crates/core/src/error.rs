use thiserror::Error;

/// Errors raised by the numerical and modeling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("{function}: argument {value} outside domain ({requirement})")]
    Domain {
        function: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// Gamma function evaluated at a non-positive integer.
    #[error("gamma: pole at x = {0}")]
    Pole(f64),

    /// Result exceeds the representable f64 range.
    #[error("{function}: overflow at x = {value}")]
    Overflow { function: &'static str, value: f64 },

    /// No evaluation strategy reached the accuracy target.
    #[error("meijer_g: no convergence ({method}, residual estimate {residual:e})")]
    Convergence { method: &'static str, residual: f64 },

    /// The Mellin-Barnes contour cannot separate the two pole families.
    #[error("mellin_barnes_oracle: cannot place contour ({0})")]
    ContourPlacement(String),

    /// Malformed Meijer-G parameter lists.
    #[error("invalid Meijer-G parameters: {0}")]
    InvalidSpec(String),

    /// The moment set cannot be represented by the Meijer-G approximant family.
    #[error("approximant fit ill-conditioned: {0}")]
    IllConditioned(String),

    /// The n-th BRT moment integral diverges.
    #[error("BRT moment of order {order} is undefined (tail exponent {exponent:.4} <= 0)")]
    MomentUndefined { order: u32, exponent: f64 },

    /// Invalid scenario, battery, or channel configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, value: f64, requirement: &'static str) -> Error {
    Error::Domain {
        function,
        value,
        requirement,
    }
}
