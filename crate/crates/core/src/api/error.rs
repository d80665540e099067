use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use crate::inventory::InventoryError;
use crate::reporting::ReportError;
use crate::risk::RiskError;

/// Error body returned by every endpoint. `code` mirrors the module error
/// variant name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_string(),
            message: message.into(),
            field: None,
        }
    }

    fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn status(&self) -> StatusCode {
        match self.code.as_str() {
            "UnknownId" | "UnknownRisk" | "UnknownDraft" | "NotFound" => StatusCode::NOT_FOUND,
            "RetiredRecord" | "AlreadyClosed" => StatusCode::CONFLICT,
            "Io" | "StoreUnreadable" | "Internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        }
    }

    /// Maps a body deserialisation failure, pulling out the offending
    /// field where serde names one.
    pub fn from_json(err: &serde_json::Error) -> Self {
        let text = err.to_string();
        let quoted = |prefix: &str| {
            text.strip_prefix(prefix)
                .and_then(|rest| rest.split('`').next())
                .map(str::to_string)
        };
        if let Some(field) = quoted("missing field `") {
            ApiError::new("MissingField", text.clone()).with_field(field)
        } else if let Some(field) = quoted("unknown field `") {
            ApiError::new("UnknownField", text.clone()).with_field(field)
        } else {
            ApiError::new("InvalidJson", text)
        }
    }
}

impl From<InventoryError> for ApiError {
    fn from(e: InventoryError) -> Self {
        let err = ApiError::new(e.code(), e.to_string());
        match e {
            InventoryError::MissingField(f) | InventoryError::ScaleViolation { field: f, .. } => err.with_field(f),
            _ => err,
        }
    }
}

impl From<RiskError> for ApiError {
    fn from(e: RiskError) -> Self {
        let message = e.to_string();
        match e {
            RiskError::UnknownField(f) => ApiError::new("UnknownField", message).with_field(f),
            RiskError::OutOfRange { field, .. } => ApiError::new("OutOfRange", message).with_field(field),
            RiskError::MissingField(f) => ApiError::new("MissingField", message).with_field(f),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::UnsupportedFormat(_) => "UnsupportedFormat",
            ReportError::EmptyStore => "EmptyStore",
            ReportError::ZeroTopK => "OutOfRange",
        };
        ApiError::new(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}
