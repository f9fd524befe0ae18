use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: line {line}: {message}")]
    MalformedRow {
        file: String,
        line: u64,
        message: String,
    },

    #[error("{file}: bad header, expected `{expected}`, found `{found}`")]
    BadHeader {
        file: String,
        expected: String,
        found: String,
    },

    #[error("{file}: duplicate key {key}")]
    DuplicateKey { file: String, key: String },

    #[error("market return missing for month {0}")]
    MissingMarketMonth(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("missing input file {0}")]
    MissingFile(PathBuf),

    #[error("refusing to overwrite existing output in {0} (pass force)")]
    WouldOverwrite(PathBuf),

    #[error("empty cross-section")]
    EmptyCrossSection,

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("need at least 2 clusters, found {0}")]
    TooFewClusters(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
