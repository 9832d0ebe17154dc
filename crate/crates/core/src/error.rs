use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("need ≥ 2 languages, got {0}")]
    TooFewLanguages(usize),

    #[error("corpus has no nonempty sentences")]
    EmptyCorpus,

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("empty language selection")]
    EmptyLanguageSelection,

    #[error("row {0} has no occupied cells")]
    ZeroRow(usize),

    #[error("matrix has zero total mass")]
    ZeroMarginals,

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("languages `{0}` and `{1}` share no aligned sentence")]
    NoOverlap(String, String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("requested rank {rank} exceeds min(rows, cols) = {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("out-of-vocabulary word `{0}`")]
    OutOfVocabulary(String),

    #[error("document keys cover {got} sentences, corpus has {expected}")]
    DocumentKeyMismatch { expected: usize, got: usize },

    #[error("document granularity requested but the corpus has no document keys")]
    MissingDocumentKeys,

    #[error("empty dictionary")]
    EmptyDictionary,

    #[error("sentence IDs differ between prediction and gold: {0}")]
    SentenceMismatch(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}
