use thiserror::Error;

/// Errors raised by the library. Each variant names the violated
/// precondition; numeric failures inside AMP carry the iteration index.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("atom value must be non-negative, got {0}")]
    NegativeValue(f64),
    #[error("atom weights sum to {0}, expected 1")]
    WeightsDoNotSumToOne(f64),
    #[error("measure has second moment {0}, expected 1")]
    NotNormalized(f64),
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("sparsity level must lie in (0, 1], got {0}")]
    EpsOutOfRange(f64),
    #[error("argument outside the domain of {func}: {value}")]
    DomainError { func: &'static str, value: f64 },
    #[error("prior has zero mean; the fixed point degenerates at 0")]
    NoPositiveMean,
    #[error("signal-to-noise ratio must be positive, got {0}")]
    BetaNonPositive(f64),
    #[error("aspect ratio must be positive, got {0}")]
    AlphaNonPositive(f64),
    #[error("correlation must lie in [0, 1], got {0}")]
    QOutOfRange(f64),
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("iterate has empty positive part at t = {t}")]
    DeadIterate { t: usize },
    #[error("left iterate vanished at t = {t}")]
    ZeroUVector { t: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support of the planted signal is empty (dim = {dim}, eps = {eps})")]
    EmptySupport { dim: usize, eps: f64 },
    #[error("planted signal is not feasible: {0}")]
    SignalNotFeasible(String),
    #[error("invalid prior spec: {0}")]
    ParsePrior(String),
    #[error("invalid instance dump: {0}")]
    InvalidDump(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
