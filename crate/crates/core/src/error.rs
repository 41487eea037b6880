use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dangling reference: {0}")]
    DanglingReference(String),

    #[error("alias error: {0}")]
    Alias(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("out of bounds: index {index} outside extent {size}")]
    OutOfBounds { index: isize, size: usize },

    /// A streamed kernel tried to read a sample its input channel has not delivered yet.
    #[error("causality violation: sample {index} requested, {available} delivered")]
    Causality { index: usize, available: usize },

    #[error("event {event}: {source}")]
    AtEvent {
        event: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {cause}")]
    Stage { stage: String, cause: Box<Error> },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn at_event(self, event: usize) -> Self {
        match self {
            e @ Error::AtEvent { .. } => e,
            other => Error::AtEvent {
                event,
                source: Box::new(other),
            },
        }
    }
}

/// Wraps errors with the name of the pipeline stage that raised them.
pub fn in_stage(stage: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Stage {
        stage: stage.to_string(),
        cause: Box::new(e),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
