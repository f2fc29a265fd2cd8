use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tile `{0}`")]
    InvalidTile(String),

    #[error("invalid session config: {0}")]
    InvalidConfig(String),

    #[error("time regression: got t={got}ms after t={last}ms")]
    TimeRegression { last: u64, got: u64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("session has already ended")]
    SessionEnded,

    #[error("movement type `{0}` has no non-repetition items (k = 0)")]
    UndefinedDenominator(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("wrong session mode: {0}")]
    WrongMode(String),

    #[error("log has no leading meta record")]
    MissingMeta,

    #[error("line {line}: {msg}")]
    Corrupt { line: usize, msg: String },

    #[error("script step {index}: {msg}")]
    Script { index: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
