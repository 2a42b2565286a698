use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use erpsel_core::project::{PipelineError, StoreError, Violation};
use serde::Serialize;

/// Every failure leaves the server as `{code, message, path}` JSON.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub path: Option<String>,
    pub violations: Vec<Violation>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    path: Option<&'a str>,
    #[serde(skip_serializing_if = "<[Violation]>::is_empty")]
    violations: &'a [Violation],
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), path: None, violations: Vec::new() }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no {what} `{id}`"))
    }

    pub fn invalid(violations: Vec<Violation>) -> Self {
        let message = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        let path = violations.first().map(|v| v.location.clone());
        Self { status: StatusCode::UNPROCESSABLE_ENTITY, code: "invalid-project", message, path, violations }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
            path: self.path.as_deref(),
            violations: &self.violations,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Invalid(v) => ApiError::invalid(v),
            StoreError::Io { .. } => ApiError::internal(e.to_string()),
            other => {
                let path = other.path();
                let mut err = ApiError::new(StatusCode::BAD_REQUEST, "malformed-project", other.to_string());
                err.path = path;
                err
            }
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let (status, code) = match &e {
            PipelineError::NotFound { .. } => (StatusCode::NOT_FOUND, "not-found"),
            PipelineError::Inconsistent { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "inconsistent-judgments"),
            PipelineError::Precondition(_) => (StatusCode::UNPROCESSABLE_ENTITY, "precondition-failed"),
            PipelineError::Adaptation(_) => (StatusCode::BAD_REQUEST, "invalid-input"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "computation-failed"),
        };
        let path = match &e {
            PipelineError::Inconsistent { matrix, .. } | PipelineError::Macbeth { matrix, .. } => {
                Some(format!("matrices.{matrix}"))
            }
            _ => None,
        };
        ApiError { status, code, message: e.to_string(), path, violations: Vec::new() }
    }
}
