use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use safescope_core::heuristics::{AnswerParseError, TriageError};
use safescope_core::project::ProjectError;
use serde_json::json;

/// An error response. The body is always `{"error": "..."}`, plus
/// `current_revision` for conflicts.
#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Unprocessable(String),
    Conflict {
        message: String,
        current_revision: u64,
    },
    Unavailable(String),
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Conflict { .. } => StatusCode::CONFLICT,
            ApiError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<AnswerParseError> for ApiError {
    fn from(e: AnswerParseError) -> Self {
        match e {
            AnswerParseError::Json(_) => ApiError::BadRequest(e.to_string()),
            AnswerParseError::InvalidValue { .. } | AnswerParseError::InvalidTimestamp(_) => {
                ApiError::Unprocessable(e.to_string())
            }
        }
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        match e {
            ProjectError::StaleRevision { current, .. } => ApiError::Conflict {
                message: e.to_string(),
                current_revision: current,
            },
            ProjectError::Triage(TriageError::UnknownQuestion(_)) => {
                ApiError::NotFound(e.to_string())
            }
            ProjectError::Triage(_) => ApiError::Unprocessable(e.to_string()),
            ProjectError::Locked(_) => ApiError::Unavailable(e.to_string()),
            _ => ApiError::Internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let body = match self {
            ApiError::Conflict {
                message,
                current_revision,
            } => json!({ "error": message, "current_revision": current_revision }),
            ApiError::BadRequest(m)
            | ApiError::NotFound(m)
            | ApiError::Unprocessable(m)
            | ApiError::Unavailable(m)
            | ApiError::Internal(m) => json!({ "error": m }),
        };
        (status, Json(body)).into_response()
    }
}
