use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("unknown language condition {0:?}")]
    UnknownLanguage(String),

    #[error("row {row}: label {label} not permitted for binary condition {language}")]
    LabelNotPermitted {
        row: usize,
        label: String,
        language: String,
    },

    #[error("duplicate example id {0:?}")]
    DuplicateId(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported script {0}")]
    UnsupportedScript(String),

    #[error("rule table {table}: line {line}: {message}")]
    RuleTable {
        table: String,
        line: usize,
        message: String,
    },

    #[error("text too short: {len} code points, need at least {min}")]
    TextTooShort { len: usize, min: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("missing grid cell {0}")]
    MissingCell(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
