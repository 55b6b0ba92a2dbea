use thiserror::Error;

/// Errors raised by operator algebra, solvers and perturbation engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("matrix is {rows}x{cols} but the basis has dimension {dim}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        dim: usize,
    },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("expectation value has imaginary part {imag:.3e} for a Hermitian operator")]
    ComplexExpectation { imag: f64 },

    #[error("state is not normalized (deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("vector of length {len} is not a perfect square")]
    NotSquareLength { len: usize },

    #[error("invalid spin length: 2J = {twice_j} for N = {emitters}")]
    InvalidSpinLength { emitters: usize, twice_j: usize },

    #[error("emitter count {emitters} outside the supported range {min}..={max}")]
    EmitterCountOutOfRange {
        emitters: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model cannot be represented as a Liouvillian: {0}")]
    NotLiouvillian(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("perturbation assumption violated: {0}")]
    AssumptionViolated(String),

    #[error(
        "singular perturbative system: state {index} has vanishing denominator ({magnitude:.3e})"
    )]
    SingularPerturbation { index: usize, magnitude: f64 },

    #[error("vanishing mean spin ({norm:.3e}): transverse frame undefined")]
    VanishingMeanSpin { norm: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
