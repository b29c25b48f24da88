//! Pre-shared bearer tokens, one or more per user, loaded at startup.

use std::collections::HashMap;
use std::path::Path;

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use greenbasket_core::clock::Clock;
use greenbasket_core::gamify::UserId;

use crate::error::ApiError;
use crate::AppState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiSession {
    pub user: UserId,
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UsersFile {
    #[serde(default)]
    users: Vec<ApiSession>,
}

#[derive(Debug, Clone, Default)]
pub struct Sessions {
    by_token: HashMap<String, ApiSession>,
}

impl Sessions {
    pub fn new(sessions: impl IntoIterator<Item = ApiSession>) -> Result<Self, String> {
        let mut by_token = HashMap::new();
        for s in sessions {
            if s.token.trim().is_empty() {
                return Err(format!("user {}: empty token", s.user));
            }
            if s.user.as_str().trim().is_empty() {
                return Err("empty user identifier".into());
            }
            if by_token.insert(s.token.clone(), s).is_some() {
                return Err("the same token is listed twice".into());
            }
        }
        Ok(Self { by_token })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let file: UsersFile = toml::from_str(text).map_err(|e| e.to_string())?;
        Self::new(file.users)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
    }

    /// The session for `token` if it exists and has not expired at `now`.
    pub fn authenticate(&self, token: &str, now: DateTime<Utc>) -> Option<&ApiSession> {
        self.by_token.get(token).filter(|s| now < s.expires_at)
    }
}

/// The authenticated caller. Missing, unknown and expired tokens are
/// indistinguishable to the client.
#[derive(Debug, Clone)]
pub struct Caller(pub UserId);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthenticated)?;
        state
            .sessions
            .authenticate(token, state.clock.now())
            .map(|s| Caller(s.user.clone()))
            .ok_or_else(ApiError::unauthenticated)
    }
}
