use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not skew-symmetric (asymmetry {0:e})")]
    NotSkew(f64),
    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("deformation gradient must have positive determinant (det = {0:e})")]
    NonPositiveDeterminant(f64),
    #[error("invalid weights mu = {mu}, mu_c = {muc}: need mu > 0 and mu_c >= 0")]
    InvalidWeights { mu: f64, muc: f64 },
    #[error("operation requires the non-classical regime mu > mu_c (mu = {mu}, mu_c = {muc})")]
    Regime { mu: f64, muc: f64 },
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("dimension {0} exceeds the enumeration limit of 10")]
    TooLarge(usize),
    #[error("inadmissible partition: {0}")]
    InadmissiblePartition(String),
    #[error("sign pattern has determinant -1 and cannot be realized in SO(n)")]
    Orientation,
    #[error("invalid singular values: {0}")]
    InvalidSingularValues(String),
}
