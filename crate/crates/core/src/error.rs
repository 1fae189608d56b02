use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("operator is not hermitian: max |M - M^dagger| = {0:e}")]
    NotHermitian(f64),
    #[error("label (p={p}, q={q}) outside the trusted radius: mean occupation {occupation:.3} exceeds {limit:.3}")]
    TruncationRadius { p: f64, q: f64, occupation: f64, limit: f64 },
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("inadmissible symbol: {0}")]
    Inadmissible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("finite-difference step unresolved: Richardson estimates differ by {0:e}")]
    Richardson(f64),
    #[error("degenerate metric at ({p}, {q})")]
    DegenerateMetric { p: f64, q: f64 },
    #[error("point ({p}, {q}) is outside the chart domain")]
    ChartDomain { p: f64, q: f64 },
    #[error("level set: {0}")]
    LevelSet(String),
    #[error("root not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("grid tail mass {mass:e} exceeds threshold {threshold:e}")]
    GridTail { mass: f64, threshold: f64 },
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
