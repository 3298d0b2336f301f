use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::pipeline::StageKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    // configuration
    #[error("config line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config is missing required key `{0}`")]
    MissingKey(String),

    // pipeline
    #[error("component `{name}` is already registered for stage {stage}")]
    DuplicateName { stage: StageKind, name: String },
    #[error("no component registered for stage {0}")]
    NoComponent(StageKind),
    #[error("stage order violation: {0}")]
    OrderViolation(String),
    #[error("stage {stage} failed: {cause}")]
    StageFailure { stage: StageKind, cause: Box<Error> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // index
    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),
    #[error("index format version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    // questions and classifier
    #[error("duplicate question id `{0}`")]
    DuplicateQid(String),
    #[error("no training examples")]
    NoExamples,
    #[error("smoothing alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("invalid answer type label `{0}`")]
    BadLabel(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("malformed {what} at line {line}: {reason}")]
    Malformed {
        what: &'static str,
        line: usize,
        reason: String,
    },

    // evaluation
    #[error("bad gold pattern for {qid} `{pattern}`: {reason}")]
    BadPattern {
        qid: String,
        pattern: String,
        reason: String,
    },
    #[error("gold standard is empty")]
    EmptyGold,
    #[error("answer for `{answer}` judged against gold for `{gold}`")]
    QidMismatch { answer: String, gold: String },
    #[error("cannot compute accuracy over an empty test set")]
    EmptyTestSet,
    #[error("{judged} distinct judged questions exceed the gold total {total}")]
    InconsistentTotal { judged: usize, total: usize },
}

impl Error {
    /// Returns true for errors that stem from configuration or user input
    /// rather than a failure while doing work.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::MissingFile(_)
            | Error::ParseError { .. }
            | Error::UnknownKey(_)
            | Error::MissingKey(_)
            | Error::InvalidConfig(_)
            | Error::OrderViolation(_)
            | Error::BadAlpha(_) => true,
            Error::StageFailure { cause, .. } => cause.is_validation(),
            _ => false,
        }
    }
}

pub(crate) trait IoContext<T> {
    fn io_context(self, path: &Path) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn io_context(self, path: &Path) -> Result<T> {
        self.map_err(|source| {
            if source.kind() == io::ErrorKind::NotFound {
                Error::MissingFile(path.to_path_buf())
            } else {
                Error::Io { path: path.to_path_buf(), source }
            }
        })
    }
}
