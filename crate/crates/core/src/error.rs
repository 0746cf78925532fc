use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = UimcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum UimcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    /// Every view has fewer presented instances than clusters.
    #[error("unsolvable instance: {0}")]
    Unsolvable(String),

    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: String, detail: String },

    #[error("malformed {what} at {path}: {detail}")]
    Malformed {
        what: &'static str,
        path: PathBuf,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl UimcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Self::ShapeMismatch(msg.into())
    }

    pub(crate) fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::Numerical {
            context: context.into(),
            detail: detail.into(),
        }
    }

    /// Prefixes the context of a numerical error, leaving other variants untouched.
    pub fn with_context(self, prefix: impl AsRef<str>) -> Self {
        match self {
            Self::Numerical { context, detail } => Self::Numerical {
                context: format!("{}: {}", prefix.as_ref(), context),
                detail,
            },
            other => other,
        }
    }
}
