//! Crate-wide error type.

use std::path::PathBuf;

/// Everything that can go wrong across the toolkit, grouped by subsystem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Event-token grammar violations (parsing, serialization, construction).
    #[error("token error: {0}")]
    Token(String),

    /// Routine construction, tokenization, or routine-file problems.
    #[error("routine error: {0}")]
    Routine(String),

    /// Corpus files and vocabulary construction.
    #[error("corpus error: {0}")]
    Corpus(String),

    /// Timeline construction and sequence extraction.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// Language-model training, evaluation, and model files.
    #[error("model error: {0}")]
    Model(String),

    /// Scenario generation and routine extraction.
    #[error("generation error: {0}")]
    Generation(String),

    /// Policy files, policy validation, and scenario checking.
    #[error("policy error: {0}")]
    Policy(String),

    /// File access, with the offending path. The message embeds the cause;
    /// the field is deliberately not named `source`, which would make it the
    /// error's source and repeat it in chained printing.
    #[error("{path}: {cause}")]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, cause: std::io::Error) -> Self {
        Error::Io { path: path.into(), cause }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
