//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented range or shape.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A structural invariant of a loaded or constructed artifact failed.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Lookup of an object, room, or node id that no catalog resolves.
    #[error("unknown {kind} id: {id}")]
    UnknownId { kind: &'static str, id: String },

    /// A feature vector or answer list with the wrong arity.
    #[error("wrong arity: expected {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A chat reply that still contained no standalone YES/NO after a reprompt.
    #[error("answer unparseable: {0:?}")]
    AnswerUnparseable(String),

    /// Chat backend transport failure (after retries).
    #[error("chat backend: {0}")]
    ChatBackend(String),

    /// A pipeline stage failed; carries the stage name for diagnostics.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("query {index}: {source}")]
    AtQuery {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn at_query(self, index: usize) -> Self {
        Error::AtQuery {
            index,
            source: Box::new(self),
        }
    }
}
