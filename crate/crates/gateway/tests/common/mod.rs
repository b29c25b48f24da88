#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Duration, Utc};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use greenbasket_core::catalog::{ingest_path, Catalog, CatalogHandle};
use greenbasket_core::clock::{Clock, ManualClock};
use greenbasket_core::footprint::References;
use greenbasket_core::gamify::{GamifyConfig, UserId};
use greenbasket_core::lists::{Listkeeper, Store};
use greenbasket_gateway::{router, ApiSession, AppState, Sessions};

pub const MARIA: &str = "maria-token";
pub const OLIVIA: &str = "olivia-token";
pub const EXPIRED: &str = "expired-token";

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn start() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2026-06-01T10:00:00Z").unwrap().to_utc()
}

pub fn shipped_catalog() -> Catalog {
    ingest_path(&data("catalog.csv")).unwrap().0
}

pub fn shipped_refs() -> References {
    References::load(&data("references.toml")).unwrap()
}

pub struct TestApp {
    pub router: Router,
    pub keeper: Arc<Listkeeper>,
    pub clock: Arc<ManualClock>,
}

pub fn sessions() -> Sessions {
    let session = |user: &str, token: &str, expires: DateTime<Utc>| ApiSession {
        user: UserId::new(user),
        token: token.into(),
        expires_at: expires,
    };
    Sessions::new([
        session("maria", MARIA, start() + Duration::days(30)),
        session("olivia", OLIVIA, start() + Duration::days(30)),
        session("guest", EXPIRED, start() - Duration::days(1)),
    ])
    .unwrap()
}

pub fn app_with(catalog: Catalog, store: Store) -> TestApp {
    let clock = Arc::new(ManualClock::new(start()));
    let dyn_clock: Arc<dyn Clock> = clock.clone();
    let keeper = Arc::new(
        Listkeeper::open(
            Arc::new(CatalogHandle::new(catalog)),
            Arc::new(shipped_refs()),
            Arc::new(GamifyConfig::load(&data("gamify.toml")).unwrap()),
            store,
            dyn_clock.clone(),
        )
        .unwrap(),
    );
    let state = AppState::new(keeper.clone(), sessions(), dyn_clock);
    TestApp {
        router: router(state),
        keeper,
        clock,
    }
}

pub fn app() -> TestApp {
    app_with(shipped_catalog(), Store::in_memory().unwrap())
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Value,
}

impl TestApp {
    pub async fn call(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        body: Option<Value>,
        headers: &[(&str, &str)],
    ) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let res = self.router.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let headers = res.headers().clone();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let body = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        Reply { status, headers, body }
    }

    pub async fn get(&self, uri: &str, token: &str) -> Reply {
        self.call(Method::GET, uri, Some(token), None, &[]).await
    }

    pub async fn post(&self, uri: &str, token: &str, body: Value) -> Reply {
        self.call(Method::POST, uri, Some(token), Some(body), &[]).await
    }

    pub async fn create_list(&self, token: &str, name: &str) -> String {
        let r = self
            .post("/v1/lists", token, serde_json::json!({ "name": name }))
            .await;
        assert_eq!(r.status, StatusCode::CREATED, "{:?}", r.body);
        r.body["list"]["list_id"].as_str().unwrap().to_string()
    }
}
