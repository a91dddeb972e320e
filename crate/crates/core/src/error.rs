use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty mesh")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("direction not normalized")]
    DirectionNotNormalized,
    #[error("behind camera")]
    BehindCamera,
    #[error("degenerate ray has no 2D direction")]
    DegenerateRay,
    #[error("empty field")]
    EmptyField,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
