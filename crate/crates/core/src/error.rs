use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid word {0:?}")]
    InvalidWord(String),

    #[error("invalid wildcard pattern {0:?}: only a single trailing '*' is allowed")]
    InvalidPattern(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no data: {0}")]
    NoData(String),

    #[error("language {0:?} is not available in this graph")]
    LanguageUnavailable(String),

    #[error("dictionary direction mismatch: expected target {expected:?}, found {found:?}")]
    LanguageMismatch { expected: String, found: String },

    #[error("degenerate (zero-norm) vector")]
    DegenerateVector,

    #[error("no seed word is present in the vocabulary")]
    NotExpandable,

    #[error("cannot sample {requested} words from a universe of {available}")]
    InfeasibleSample { requested: usize, available: usize },

    #[error("kappa is undefined when chance agreement equals 1")]
    UndefinedKappa,

    #[error("correlation is undefined for a constant series")]
    UndefinedCorrelation,

    #[error("document {0:?} has no tokens")]
    EmptyDocument(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("series cover different document ids")]
    IdMismatch,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("word {word:?} has {labels} label(s); at least two are required")]
    InsufficientLabels { word: String, labels: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input files.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidWord(_)
                | Error::InvalidPattern(_)
                | Error::Json(_)
                | Error::LanguageMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
