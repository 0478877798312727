use crate::volume::FieldKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated or oversized payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("non-finite value in field `{field}` at index {index}")]
    Data { field: String, index: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("field `{field}` is not a {expected} field")]
    FieldKind { field: String, expected: FieldKind },

    #[error("point ({:.6}, {:.6}, {:.6}) lies outside the grid", .0[0], .0[1], .0[2])]
    OutOfBounds([f64; 3]),

    #[error("invalid synthetic field spec: {0}")]
    Spec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid camera: {0}")]
    Camera(String),
}
