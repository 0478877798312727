use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// JSON error body `{error, detail}` with its status code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: &'static str,
    pub detail: String,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    detail: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        ApiError { status, error, detail: detail.into() }
    }

    pub fn bad_request(error: &'static str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, detail)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session {id:?}"))
    }

    pub fn conflict(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", detail)
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail)
    }
}

impl From<isostream_core::Error> for ApiError {
    fn from(e: isostream_core::Error) -> Self {
        use isostream_core::Error::*;
        let error = match &e {
            Io(_) => "io",
            Format(_) | Truncated { .. } | Data { .. } | InvalidGrid(_) => "invalid_dataset",
            UnknownField(_) => "unknown_field",
            FieldKind { .. } => "field_kind",
            Camera(_) => "invalid_camera",
            OutOfBounds(_) | Spec(_) | InvalidArgument(_) => "invalid_argument",
        };
        ApiError::bad_request(error, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.error, self.detail);
        }
        (self.status, Json(Body { error: self.error, detail: &self.detail })).into_response()
    }
}
