use std::path::PathBuf;

use crossclone_core::corpus::CorpusError;
use crossclone_core::detect::DetectError;
use crossclone_core::eval::EvalError;
use crossclone_core::graph::GraphError;
use crossclone_core::tokens::TokenError;
use crossclone_core::ParseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("no source files found under {0}")]
    NoFilesFound(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checksum mismatch for {path}: expected {expected}, found {found}")]
    ChecksumMismatch { path: PathBuf, expected: String, found: String },
    #[error("unit `{0}` is referenced but not present in any unit store")]
    UnknownUnit(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| LabError::Io { path: path.into(), source })
    }
}
