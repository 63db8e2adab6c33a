use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::attributes::SchemaError;
use crate::classify::ClassifyError;
use crate::dedup::DedupError;
use crate::lexicon::LexError;
use crate::runtime::RuntimeError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("directory {} does not exist", .0.display())]
    MissingDirectory(PathBuf),
    #[error("no corpus files in {}", .0.display())]
    NoCorpusFiles(PathBuf),
    #[error("no lexicographer files in {}", .0.display())]
    NoLexiconFiles(PathBuf),
    #[error("{}:{line}: {reason}", path.display())]
    Csv { path: PathBuf, line: usize, reason: String },
    #[error("class label {0:?} cannot be written to a data file")]
    InvalidLabel(String),
    #[error("ARFF output needs at least one class label")]
    EmptyLabelUniverse,
    #[error("vector length {found} does not match schema length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// 2 for bad input data, 3 for failures of the runtime itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Runtime(RuntimeError::Dedup(_)) => 2,
            Error::Runtime(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
