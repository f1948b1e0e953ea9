use thiserror::Error;

/// Errors raised by distributions, regions, classifiers and certification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("query point lies outside the support of the distribution")]
    QueryOutsideSupport,
    #[error("support set is empty")]
    EmptySupportSet,
    #[error("kappa {0} is outside (0, 1]")]
    KappaOutOfRange(f64),
    #[error("robustness region cannot be certified bounded")]
    UnboundedRegion,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("k = {k} exceeds the number of samples n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("schedule requires n >= 2, got {0}")]
    NTooSmall(usize),
    #[error("enumeration limited to n <= {max} and d <= 2 (got n = {n}, d = {d})")]
    TooLarge { n: usize, d: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("plot requires at least one non-empty series")]
    EmptySeries,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
