use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use factweaver::document::DocumentError;
use factweaver::search::SearchError;
use factweaver::TableError;

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                details: Vec::new(),
            },
        }
    }

    pub fn with_details(mut self, details: Vec<String>) -> Self {
        self.body.details = details;
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("{what} '{id}' not found"))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl From<TableError> for ApiError {
    fn from(e: TableError) -> Self {
        let details = match &e {
            TableError::Csv { row, .. } | TableError::Ragged { row, .. } => vec![format!("row {row}")],
            _ => Vec::new(),
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_csv", e.to_string()).with_details(details)
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidGoal(m) => ApiError::bad_request(m),
            SearchError::Generation(m) => ApiError::conflict("generation_failed", m),
            SearchError::Cancelled => ApiError::conflict("cancelled", "generation was cancelled"),
        }
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        let message = e.to_string();
        match e {
            DocumentError::Invalid { violations, .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_fact", message).with_details(violations)
            }
            DocumentError::Fact { .. } | DocumentError::Spec(_) | DocumentError::Narration(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_fact", message)
            }
            DocumentError::OutOfRange { .. } | DocumentError::BadOrder(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "bad_index", message)
            }
            DocumentError::Empty => ApiError::conflict("empty_story", message),
            DocumentError::Compose(_) => ApiError::internal(message),
        }
    }
}
