//! Error type shared across the library.

use thiserror::Error;

/// Convenience alias used by all fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for pattern generation, kernel construction, dreaming
/// dynamics, mean-field solvers, and Monte Carlo drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension argument was zero or two objects disagree in size.
    #[error("invalid dimension for {what}: {details}")]
    InvalidDimension { what: &'static str, details: String },

    /// Vectors or matrices passed together do not have matching sizes.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A state or pattern entry was not exactly -1 or +1.
    #[error("entry at index {index} is {value}, expected -1 or +1")]
    NotSpin { index: usize, value: i8 },

    /// A sleep extent (dream time) was negative.
    #[error("sleep extent must be non-negative, got {t}")]
    NegativeSleepExtent { t: f64 },

    /// A matrix expected to be symmetric was not.
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },

    /// The pattern correlation matrix is singular where an inverse is needed.
    #[error("correlation matrix is singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    SingularCorrelation { min_eigenvalue: f64 },

    /// A linear solve on a supposedly positive-definite matrix failed.
    #[error("positive-definite factorization failed for {what}")]
    FactorizationFailed { what: &'static str },

    /// Invalid solver or experiment configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The dreaming iteration blew up (operator norm above the divergence
    /// threshold) at the reported cycle.
    #[error("dreaming dynamics diverged at cycle {cycle} (norm {norm:.3e})")]
    DreamDivergence { cycle: usize, norm: f64 },

    /// A fixed-point iteration failed to converge.
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A free-energy evaluation left its domain of definition.
    #[error("free-energy domain violation in factor {factor}: value {value:.6e}")]
    DomainViolation { factor: &'static str, value: f64 },

    /// An integrand returned a non-finite value during quadrature.
    #[error("integrand evaluated to a non-finite value at x = {x:.6e}")]
    NonFiniteIntegrand { x: f64 },

    /// Sigmoid fit input cannot be normalized (too few points or a flat range).
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    /// I/O failure while serializing or deserializing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed content while parsing a serialized artifact.
    #[error("parse error: {0}")]
    Parse(String),
}
