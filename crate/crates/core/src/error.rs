use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("flat-top rank {rank} exceeds dimension {dim}")]
    RankExceedsDimension { rank: usize, dim: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all-zero spectrum")]
    ZeroSpectrum,
    #[error("unknown distribution model `{0}`")]
    UnknownModel(String),
    #[error("closed-form population moment requires a Gaussian model in signed-power mode")]
    ClosedFormUnavailable,
    #[error("signed-power mode requires an integer exponent, got {0}")]
    NonIntegerSignedPower(f64),
    #[error("exponent must be at least {min}, got {got}")]
    ExponentTooSmall { min: f64, got: f64 },
    #[error("gradient undefined: inner product vanished at row {row}")]
    NonDifferentiable { row: usize },
    #[error("exact eigen path requires p = 2 in signed mode, got p = {0}")]
    NotQuadratic(f64),
    #[error("grid oracle supports dimension 2 or 3, got {0}")]
    GridDimension(usize),
    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("psi2 bisection bracket does not contain the root")]
    BracketFailure,
    #[error("scalar law has psi2 norm {0} > 1; rescale before verifying")]
    NotNormalized(f64),
    #[error("inputs violate the Jensen bound gamma >= sqrt(2/pi) * radius (gamma = {gamma}, radius = {radius})")]
    JensenViolation { gamma: f64, radius: f64 },
    #[error("at least {need} eligible cells needed for a slope fit, got {got}")]
    TooFewCells { need: usize, got: usize },
    #[error("unsupported target set for this operation: {0}")]
    UnsupportedSet(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
