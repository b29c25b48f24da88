use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use greenbasket_core::catalog::CatalogError;
use greenbasket_core::lists::ListError;

/// Error body returned by every endpoint. `code` is stable; `message` is for people.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

/// Every machine code the API can return, with its HTTP status.
pub const ERROR_CODES: &[(&str, u16)] = &[
    ("unauthenticated", 401),
    ("forbidden", 403),
    ("not_found", 404),
    ("list_not_found", 404),
    ("item_not_found", 404),
    ("product_unknown", 404),
    ("duplicate_list_name", 409),
    ("no_purchase_provenance", 409),
    ("item_not_checked", 409),
    ("alternative_already_accepted", 409),
    ("no_alternative", 409),
    ("alternative_mismatch", 409),
    ("idempotency_key_reused", 422),
    ("validation_failed", 422),
    ("internal_error", 500),
];

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        let status = ERROR_CODES
            .iter()
            .find(|(c, _)| *c == code)
            .map_or(500, |(_, s)| *s);
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
            field: None,
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn unauthenticated() -> Self {
        Self::new("unauthenticated", "missing, unknown or expired bearer token")
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self::new("validation_failed", message).with_field(field)
    }

    pub fn internal(message: impl std::fmt::Display) -> Self {
        tracing::error!(%message, "internal error");
        Self::new("internal_error", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<ListError> for ApiError {
    fn from(e: ListError) -> Self {
        let message = e.to_string();
        match e {
            ListError::ListNotFound(_) => ApiError::new("list_not_found", message),
            ListError::Forbidden(_) => ApiError::new("forbidden", message),
            ListError::ItemNotFound(_) => ApiError::new("item_not_found", message),
            ListError::UnknownProduct(_) => ApiError::new("product_unknown", message).with_field("code"),
            ListError::UnknownProductId(_) => {
                ApiError::new("product_unknown", message).with_field("product_id")
            }
            ListError::DuplicateName(_) => ApiError::new("duplicate_list_name", message).with_field("name"),
            ListError::Validation(_) => ApiError::new("validation_failed", message),
            ListError::NoPurchaseProvenance(_) => ApiError::new("no_purchase_provenance", message),
            ListError::NotChecked(_) => ApiError::new("item_not_checked", message),
            ListError::AlreadyAccepted(_) => ApiError::new("alternative_already_accepted", message),
            ListError::NoAlternative(_) => ApiError::new("no_alternative", message),
            ListError::AlternativeMismatch { .. } => {
                ApiError::new("alternative_mismatch", message).with_field("product_id")
            }
            ListError::Catalog(CatalogError::NotInCatalog(_)) => ApiError::new("product_unknown", message),
            ListError::Catalog(_) | ListError::Footprint(_) | ListError::Gamify(_) | ListError::Store(_) => {
                ApiError::internal(message)
            }
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
