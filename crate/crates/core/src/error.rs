use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TatError {
    #[error("unsupported dimension {0}; only n = 2 and n = 3 are supported")]
    UnsupportedDimension(usize),
    #[error("resolution {got} is below the minimum of {min}")]
    ResolutionTooLow { got: usize, min: usize },
    #[error("reconstruction grid is empty")]
    EmptyGrid,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("phantom component {index} reaches radius {extent} outside the closed unit ball")]
    PhantomOutsideBall { index: usize, extent: f64 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("data kind mismatch: {context} expects {expected}, got {got}")]
    KindMismatch { context: String, expected: String, got: String },
    #[error("evaluation radius {s} outside the valid window [{lo}, {hi}]")]
    RadiusOutsideWindow { s: f64, lo: f64, hi: f64 },
    #[error("tail integral diverges for power decay exponent {0}")]
    DivergentTail(f64),
    #[error("profile is nonzero at s = 0 ({0}); odd-dimension transform is singular there")]
    NonzeroAtOrigin(f64),
    #[error("lambda_max {lambda_max} exceeds the grid Nyquist limit {nyquist}")]
    NyquistExceeded { lambda_max: f64, nyquist: f64 },
    #[error("operation requires even dimension, got n = {0}")]
    RequiresEvenDimension(usize),
    #[error("Green's function is singular at s = {s}, lambda = {lambda}")]
    SingularKernel { s: f64, lambda: f64 },
    #[error("Y0 is undefined for x = {0} <= 0")]
    BesselDomain(f64),
    #[error("formula spec is inconsistent: {0}")]
    InvalidFormula(String),
}

pub type Result<T> = std::result::Result<T, TatError>;
