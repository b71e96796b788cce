use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("wedge product needs at least two dimensions, got {0}")]
    WedgeUndefined(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not diagonalizable: eigenvalue {eigenvalue} is defective")]
    NonDiagonalizable { eigenvalue: Complex64 },

    #[error("2x2 block is not of the form [[a, -b], [b, a]] (deviation {deviation:e})")]
    NotCanonicalPair { deviation: f64 },

    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("no equilibrium found after {iterations} Newton iterations (|f|inf = {residual:e})")]
    NoEquilibrium { iterations: usize, residual: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid diode characteristic: {0}")]
    InvalidCharacteristic(String),

    #[error("no strictly dominant mode (real-part gap {gap:e})")]
    AmbiguousDominance { gap: f64 },

    #[error("not enough valid samples in the tail window ({valid} valid)")]
    InsufficientTail { valid: usize },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
