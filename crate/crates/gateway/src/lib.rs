//! HTTP/JSON API and admin command line for greenbasket.
//!
//! The API lives under `/v1`. Everything except the health probe needs a
//! bearer token. Footprint numbers in responses are copied from the core
//! crate's assessments; nothing here computes them.

pub mod api;
pub mod auth;
pub mod cli;
pub mod config;
pub mod error;
mod idempotency;

use std::sync::Arc;

use greenbasket_core::clock::Clock;
use greenbasket_core::lists::Listkeeper;

pub use api::router;
pub use auth::{ApiSession, Sessions};
pub use error::{ApiError, ERROR_CODES};
use idempotency::IdempotencyCache;

#[derive(Clone)]
pub struct AppState {
    pub keeper: Arc<Listkeeper>,
    pub sessions: Arc<Sessions>,
    pub clock: Arc<dyn Clock>,
    idempotency: Arc<IdempotencyCache>,
}

impl AppState {
    pub fn new(keeper: Arc<Listkeeper>, sessions: Sessions, clock: Arc<dyn Clock>) -> Self {
        Self {
            keeper,
            sessions: Arc::new(sessions),
            clock,
            idempotency: Arc::new(IdempotencyCache::default()),
        }
    }
}
