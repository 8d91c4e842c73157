use thiserror::Error;

use crate::discovery::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate state: every conditioned amplitude is zero")]
    DegenerateState,

    #[error("fidelity undefined: conditioned state has zero norm")]
    UndefinedFidelity,

    #[error("graph has no edges to prune")]
    NoEdges,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("search failed: no qualified solution (best fidelity {:.6})", .0.fidelity)]
    SearchFailed(Box<Solution>),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
