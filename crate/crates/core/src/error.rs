use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest: {0}")]
    Manifest(String),

    #[error("line {line_id}: {message}")]
    Record { line_id: String, message: String },

    #[error("image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("linear solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("no finite-cost path between the requested endpoints")]
    NoFinitePath,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("mixture collapsed: no component kept at least two samples")]
    EmptyModel,

    #[error("{0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(line_id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Record {
            line_id: line_id.into(),
            message: message.into(),
        }
    }
}
