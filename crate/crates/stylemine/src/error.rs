use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {detail}")]
    MalformedLine {
        path: String,
        /// 1-based line number.
        line: usize,
        detail: String,
    },

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("no embedding for id {0}")]
    MissingEmbedding(String),

    #[error("no entity profile for id {0}")]
    MissingProfile(String),

    #[error("dangling id {0}")]
    DanglingId(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("cannot embed sentence {0:?}: no tokens")]
    EmptySentence(String),

    #[error("remote embedding request failed after {attempts} attempt(s): {detail}")]
    Remote { attempts: usize, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
