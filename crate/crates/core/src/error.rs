use std::path::PathBuf;

/// Errors raised anywhere in the forecasting pipeline.
///
/// Every message starts with the error kind so the CLI can print a single
/// diagnostic line that names the failure class.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("SpacingError: row {row}: expected spacing {expected} s, found {found} s")]
    Spacing { row: usize, expected: i64, found: i64 },

    #[error("ValueError: row {row}: {reason}")]
    Value { row: usize, reason: String },

    #[error("SizeError: {0}")]
    Size(String),

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("ShapeError: {0}")]
    Shape(String),

    #[error("ConvergenceError: no convergence after {iterations} iterations (KKT violation {violation:.3e})")]
    Convergence { iterations: usize, violation: f64 },

    #[error("SingularError: {0}")]
    Singular(String),

    #[error("IndexError: index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("SearchError: every grid candidate failed: {}", .0.join("; "))]
    Search(Vec<String>),

    #[error("ConfigError: {0}")]
    Config(String),

    #[error("ParseError: {0}")]
    Parse(String),

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
