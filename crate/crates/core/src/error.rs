use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the conflict laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("{location}: {message}")]
    InvalidScenario { location: String, message: String },

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("feature `{0}` has zero variance; standardization is undefined")]
    ZeroVariance(String),

    #[error("embedding column {0} is constant; correlation is undefined")]
    ConstantColumn(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex index {index} out of range for graph with {len} vertices")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss {loss} at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("name mismatch: {0}")]
    NameMismatch(String),

    #[error("unknown vertex `{name}` on line {line}")]
    UnknownVertex { name: String, line: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
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

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
