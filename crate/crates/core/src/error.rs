use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ramification mismatch: {left} vs {right}")]
    KappaMismatch { left: u32, right: u32 },

    #[error("gamma pole at argument {arg}")]
    GammaPole { arg: f64 },

    #[error("moment function has a pole at index {index} (u = {u})")]
    MomentPole { index: usize, u: f64 },

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("argument outside validated range: {0}")]
    UnsupportedRange(String),

    #[error("exponent shift {q} does not land on the 1/{kappa} grid")]
    OffGrid { q: String, kappa: u32 },

    #[error("truncation exhausted: need {needed} coefficients, have {available}")]
    TruncationExhausted { needed: usize, available: usize },

    #[error("insufficient z-truncation: data has N_z = {have}, solver needs N_z >= {required}")]
    InsufficientData { have: usize, required: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("empty or all-zero input: {0}")]
    EmptyInput(String),

    #[error("integration ray blocked: {0}")]
    RayBlocked(String),

    #[error("outside admissible sector: {0}")]
    OutsideSector(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed series file at line {line}: {msg}")]
    SeriesFormat { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
