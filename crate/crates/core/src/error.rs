use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid data-generating spec: {0}")]
    InvalidSpec(String),
    #[error("malformed data: {0}")]
    Data(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("set has no masked node")]
    EmptySet,
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("kernel weights vanish on every observation")]
    ZeroEffectiveSample,
    #[error("block length {len} too short: {reason}")]
    BlockTooShort { len: usize, reason: String },
    #[error("invalid error density: {0}")]
    InvalidDensity(String),
    #[error("covariance factorization failed after jitter {jitter:e}")]
    FactorizationFailure { jitter: f64 },
    #[error("grid with {nodes} nodes exceeds the limit of {limit}")]
    GridTooLarge { nodes: usize, limit: usize },
    #[error("{failed} of {total} replications failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("io: {0}")]
    Io(String),
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::InvalidSpec(_) | Error::EmptyGrid => ErrorKind::Config,
            Error::Data(_)
            | Error::DegenerateData(_)
            | Error::EmptySet
            | Error::AllZeroWeights
            | Error::ZeroEffectiveSample
            | Error::BlockTooShort { .. }
            | Error::Io(_) => ErrorKind::Data,
            Error::InvalidDensity(_)
            | Error::FactorizationFailure { .. }
            | Error::GridTooLarge { .. }
            | Error::TooManyFailures { .. } => ErrorKind::Numeric,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}
