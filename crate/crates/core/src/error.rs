use thiserror::Error;

use crate::gridmap::CellIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("cells {from:?} and {to:?} are not adjacent")]
    NotAdjacent { from: CellIndex, to: CellIndex },

    /// A document parsed but one of its fields is invalid.
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("broken parent chain at {0:?}")]
    BrokenParentChain(CellIndex),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
