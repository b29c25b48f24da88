//! Replay protection for mutating requests carrying an `Idempotency-Key`.
//!
//! The first request with a given (user, key) runs and its successful
//! response is remembered; later requests with the same key and the same
//! body get that response back without touching state. Concurrent retries
//! wait on the first one. The cache lives in memory only.

use std::collections::HashMap;
use std::sync::Arc;

use axum::http::{HeaderMap, StatusCode};
use parking_lot::Mutex;
use serde_json::Value;

use greenbasket_core::gamify::UserId;

use crate::error::{ApiError, ApiResult};

pub const HEADER: &str = "idempotency-key";
pub const REPLAYED_HEADER: &str = "idempotent-replayed";

#[derive(Debug, Clone)]
struct Stored {
    fingerprint: String,
    status: StatusCode,
    body: Value,
}

type Slot = Arc<Mutex<Option<Stored>>>;

#[derive(Debug, Default)]
pub struct IdempotencyCache {
    slots: Mutex<HashMap<(UserId, String), Slot>>,
}

pub fn key_from(headers: &HeaderMap) -> ApiResult<Option<String>> {
    let Some(raw) = headers.get(HEADER) else {
        return Ok(None);
    };
    let key = raw
        .to_str()
        .ok()
        .map(str::trim)
        .filter(|k| !k.is_empty() && k.len() <= 200)
        .ok_or_else(|| {
            ApiError::validation("Idempotency-Key", "idempotency key must be 1 to 200 visible ASCII characters")
        })?;
    Ok(Some(key.to_string()))
}

pub struct Outcome {
    pub status: StatusCode,
    pub body: Value,
    pub replayed: bool,
}

impl IdempotencyCache {
    /// Runs `op` unless this (user, key) already succeeded. `fingerprint`
    /// identifies the request; reusing a key for a different one is an error.
    pub fn run(
        &self,
        user: &UserId,
        key: Option<String>,
        fingerprint: String,
        op: impl FnOnce() -> ApiResult<(StatusCode, Value)>,
    ) -> ApiResult<Outcome> {
        let Some(key) = key else {
            let (status, body) = op()?;
            return Ok(Outcome {
                status,
                body,
                replayed: false,
            });
        };
        let slot = self
            .slots
            .lock()
            .entry((user.clone(), key))
            .or_default()
            .clone();
        let mut slot = slot.lock();
        if let Some(stored) = slot.as_ref() {
            if stored.fingerprint != fingerprint {
                return Err(ApiError::new(
                    "idempotency_key_reused",
                    "this idempotency key was already used for a different request",
                )
                .with_field("Idempotency-Key"));
            }
            return Ok(Outcome {
                status: stored.status,
                body: stored.body.clone(),
                replayed: true,
            });
        }
        let (status, body) = op()?;
        *slot = Some(Stored {
            fingerprint,
            status,
            body: body.clone(),
        });
        Ok(Outcome {
            status,
            body,
            replayed: false,
        })
    }
}
