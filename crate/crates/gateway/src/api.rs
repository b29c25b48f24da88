//! `/v1` routes and their request/response bodies.

use std::collections::{BTreeMap, BTreeSet};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use greenbasket_core::catalog::{Product, ProductId};
use greenbasket_core::footprint::{display_stars, FootprintAssessment};
use greenbasket_core::gamify::{MissionStatus, PlayerProfile, UserId};
use greenbasket_core::lists::{AlternativeOffer, ListId, ListItem, ShoppingList, Suggestion};

use crate::auth::Caller;
use crate::error::{ApiError, ApiResult};
use crate::idempotency::{self, REPLAYED_HEADER};
use crate::AppState;

pub const MAX_LIMIT: usize = 100;
const DEFAULT_LIMIT: usize = 20;

pub fn router(state: AppState) -> Router {
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/products/{code}", get(product))
        .route("/suggestions", get(suggestions))
        .route("/lists", post(create_list).get(my_lists))
        .route("/lists/{list_id}", get(get_list))
        .route("/lists/{list_id}/items", post(add_item))
        .route("/lists/{list_id}/items/{item_id}", delete(remove_item))
        .route("/lists/{list_id}/items/{item_id}/check", post(manual_check))
        .route(
            "/lists/{list_id}/items/{item_id}/accept-alternative",
            post(accept_alternative),
        )
        .route("/lists/{list_id}/scan", post(scan))
        .route("/recommendations", post(share))
        .route("/feed", get(feed))
        .route("/leaderboard", get(leaderboard))
        .route("/profile", get(profile))
        .route("/missions", get(missions));
    Router::new()
        .nest("/v1", v1)
        .fallback(|| async { ApiError::new("not_found", "no such route") })
        .with_state(state)
}

/// JSON body whose decoding failures come back as `validation_failed`.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(json_rejection(e)),
        }
    }
}

fn json_rejection(e: JsonRejection) -> ApiError {
    ApiError::validation("body", e.body_text())
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| ApiQuery(q.0))
            .map_err(|e: QueryRejection| ApiError::validation("query", e.body_text()))
    }
}

fn limit(value: Option<usize>) -> ApiResult<usize> {
    match value {
        None => Ok(DEFAULT_LIMIT),
        Some(n) if (1..=MAX_LIMIT).contains(&n) => Ok(n),
        Some(_) => Err(ApiError::validation(
            "limit",
            format!("limit must be between 1 and {MAX_LIMIT}"),
        )),
    }
}

fn to_value<T: Serialize>(v: &T) -> ApiResult<Value> {
    serde_json::to_value(v).map_err(ApiError::internal)
}

fn reply(status: StatusCode, body: Value) -> Response {
    (status, Json(body)).into_response()
}

// ---- response bodies ----

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub products: usize,
}

/// A product with its assessment. `display_stars` is the half-star rounding
/// of `assessment.stars` for rendering.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProductView {
    pub product_id: ProductId,
    pub code: String,
    pub name: String,
    pub category: String,
    pub unit_weight_kg: f64,
    pub image_ref: Option<String>,
    pub assessment: FootprintAssessment,
    pub display_stars: f64,
}

impl ProductView {
    fn new(product: &Product, assessment: FootprintAssessment) -> Self {
        Self {
            product_id: product.product_id.clone(),
            code: product.code.clone(),
            name: product.name.clone(),
            category: product.category.clone(),
            unit_weight_kg: product.unit_weight_kg,
            image_ref: product.image_ref.clone(),
            display_stars: display_stars(assessment.stars),
            assessment,
        }
    }

    fn offer(offer: &AlternativeOffer) -> Self {
        Self::new(&offer.product, offer.assessment.clone())
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProductLookup {
    pub product: ProductView,
    pub alternative: Option<ProductView>,
}

/// Public part of a player profile.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProfileView {
    pub user: UserId,
    pub points: u64,
    pub level: u64,
    pub badges: BTreeSet<String>,
    pub mission_progress: BTreeMap<String, u32>,
    pub points_reached_at: Option<DateTime<Utc>>,
}

impl From<PlayerProfile> for ProfileView {
    fn from(p: PlayerProfile) -> Self {
        Self {
            user: p.user,
            points: p.points,
            level: p.level,
            badges: p.badges,
            mission_progress: p.mission_progress,
            points_reached_at: p.points_reached_at,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EventView {
    pub kind: String,
    pub product_id: ProductId,
    pub stars: f64,
    pub timestamp: DateTime<Utc>,
    pub replayed: bool,
    pub earned: bool,
    pub points_awarded: u64,
    pub new_badges: Vec<String>,
    pub completed_missions: Vec<String>,
}

fn events(applied: &[greenbasket_core::lists::AppliedEvent]) -> Vec<EventView> {
    applied
        .iter()
        .map(|a| EventView {
            kind: a.event.kind.as_str().to_string(),
            product_id: a.event.product_id.clone(),
            stars: a.event.stars,
            timestamp: a.event.timestamp,
            replayed: a.outcome.replayed,
            earned: a.outcome.earned,
            points_awarded: a.outcome.points_awarded,
            new_badges: a.outcome.new_badges.clone(),
            completed_missions: a.outcome.completed_missions.clone(),
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScanResponse {
    pub list_id: ListId,
    pub item: ListItem,
    pub product: ProductView,
    /// Same value as `product.assessment.stars`.
    pub stars: f64,
    pub alternative: Option<ProductView>,
    pub events: Vec<EventView>,
    pub profile: ProfileView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreatedList {
    pub list: ShoppingList,
    pub suggestions: Vec<Suggestion>,
}

// ---- handlers ----

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        products: state.keeper.catalog().len(),
    })
}

async fn product(
    State(state): State<AppState>,
    _caller: Caller,
    Path(code): Path<String>,
) -> ApiResult<Json<ProductLookup>> {
    let catalog = state.keeper.catalog();
    let refs = state.keeper.references();
    let p = catalog
        .lookup_by_code(&code)
        .ok_or_else(|| ApiError::new("product_unknown", format!("no product with code {code:?}")).with_field("code"))?;
    let assessment = p.assess(refs).map_err(ApiError::internal)?;
    let alternative = match catalog.suggest_alternative(p, refs).map_err(ApiError::internal)? {
        Some(alt) => Some(ProductView::new(alt, alt.assess(refs).map_err(ApiError::internal)?)),
        None => None,
    };
    Ok(Json(ProductLookup {
        product: ProductView::new(p, assessment),
        alternative,
    }))
}

#[derive(Debug, Deserialize)]
struct SuggestQuery {
    #[serde(default)]
    q: String,
    limit: Option<usize>,
}

async fn suggestions(
    State(state): State<AppState>,
    Caller(user): Caller,
    ApiQuery(query): ApiQuery<SuggestQuery>,
) -> ApiResult<Json<Value>> {
    let limit = limit(query.limit)?;
    let suggestions = state.keeper.suggest_while_typing(&user, &query.q, limit)?;
    Ok(Json(json!({ "suggestions": suggestions })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateList {
    name: String,
    #[serde(default)]
    seed_suggestions: bool,
}

async fn create_list(
    State(state): State<AppState>,
    Caller(user): Caller,
    headers: HeaderMap,
    ApiJson(body): ApiJson<CreateList>,
) -> ApiResult<Response> {
    let fingerprint = format!("create_list|{}|{}", body.name, body.seed_suggestions);
    mutate(&state, &user, &headers, fingerprint, || {
        let (list, suggestions) = state
            .keeper
            .create_list(&user, &body.name, body.seed_suggestions)?;
        Ok((StatusCode::CREATED, to_value(&CreatedList { list, suggestions })?))
    })
}

async fn my_lists(State(state): State<AppState>, Caller(user): Caller) -> Json<Value> {
    Json(json!({ "lists": state.keeper.lists_for(&user) }))
}

async fn get_list(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path(list_id): Path<String>,
) -> ApiResult<Json<ShoppingList>> {
    Ok(Json(state.keeper.get_list(&user, &ListId::new(list_id))?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AddItem {
    #[serde(default)]
    label: String,
    code: Option<String>,
}

async fn add_item(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path(list_id): Path<String>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<AddItem>,
) -> ApiResult<Response> {
    let fingerprint = format!("add_item|{list_id}|{}|{:?}", body.label, body.code);
    mutate(&state, &user, &headers, fingerprint, || {
        let item = state
            .keeper
            .add_item(&user, &ListId::new(list_id.clone()), &body.label, body.code.as_deref())?;
        Ok((StatusCode::CREATED, to_value(&item)?))
    })
}

async fn remove_item(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path((list_id, item_id)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let fingerprint = format!("remove_item|{list_id}|{item_id}");
    mutate(&state, &user, &headers, fingerprint, || {
        let list = state
            .keeper
            .remove_item(&user, &ListId::new(list_id.clone()), &item_id)?;
        Ok((StatusCode::OK, to_value(&list)?))
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManualCheck {
    checked: bool,
}

async fn manual_check(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path((list_id, item_id)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<ManualCheck>,
) -> ApiResult<Response> {
    let fingerprint = format!("manual_check|{list_id}|{item_id}|{}", body.checked);
    mutate(&state, &user, &headers, fingerprint, || {
        let item = state.keeper.set_manual_check(
            &user,
            &ListId::new(list_id.clone()),
            &item_id,
            body.checked,
        )?;
        Ok((StatusCode::OK, to_value(&item)?))
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanBody {
    code: String,
}

async fn scan(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path(list_id): Path<String>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<ScanBody>,
) -> ApiResult<Response> {
    let code = body.code.trim().to_string();
    if code.is_empty() {
        return Err(ApiError::validation("code", "code must not be empty"));
    }
    let fingerprint = format!("scan|{list_id}|{code}");
    mutate(&state, &user, &headers, fingerprint, || {
        let out = state
            .keeper
            .scan_check_off(&user, &ListId::new(list_id.clone()), &code)?;
        let response = ScanResponse {
            list_id: out.list_id,
            item: out.item,
            stars: out.assessment.stars,
            product: ProductView::new(&out.product, out.assessment),
            alternative: out.alternative.as_ref().map(ProductView::offer),
            events: events(&out.events),
            profile: state.keeper.profile(&user).into(),
        };
        Ok((StatusCode::OK, to_value(&response)?))
    })
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct AcceptBody {
    product_id: Option<ProductId>,
}

async fn accept_alternative(
    State(state): State<AppState>,
    Caller(user): Caller,
    Path((list_id, item_id)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<AcceptBody>,
) -> ApiResult<Response> {
    let fingerprint = format!("accept|{list_id}|{item_id}|{:?}", body.product_id);
    mutate(&state, &user, &headers, fingerprint, || {
        let out = state.keeper.accept_alternative(
            &user,
            &ListId::new(list_id.clone()),
            &item_id,
            body.product_id.as_ref(),
        )?;
        let profile: ProfileView = state.keeper.profile(&user).into();
        Ok((
            StatusCode::OK,
            json!({
                "list_id": out.list_id,
                "item": to_value(&out.item)?,
                "events": to_value(&events(&out.events))?,
                "profile": to_value(&profile)?,
            }),
        ))
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShareBody {
    product_id: ProductId,
    note: Option<String>,
}

async fn share(
    State(state): State<AppState>,
    Caller(user): Caller,
    headers: HeaderMap,
    ApiJson(body): ApiJson<ShareBody>,
) -> ApiResult<Response> {
    if body.note.as_ref().is_some_and(|n| n.chars().count() > 500) {
        return Err(ApiError::validation("note", "note is limited to 500 characters"));
    }
    let fingerprint = format!("share|{}|{:?}", body.product_id, body.note);
    mutate(&state, &user, &headers, fingerprint, || {
        let out = state
            .keeper
            .share_recommendation(&user, &body.product_id, body.note.as_deref())?;
        Ok((
            StatusCode::CREATED,
            json!({
                "recommendation": to_value(&out.recommendation)?,
                "events": to_value(&events(&out.events))?,
            }),
        ))
    })
}

#[derive(Debug, Deserialize)]
struct FeedQuery {
    limit: Option<usize>,
    after: Option<u64>,
}

async fn feed(
    State(state): State<AppState>,
    _caller: Caller,
    ApiQuery(query): ApiQuery<FeedQuery>,
) -> ApiResult<Json<Value>> {
    let page = state.keeper.community_feed(limit(query.limit)?, query.after);
    Ok(Json(to_value(&page)?))
}

#[derive(Debug, Deserialize)]
struct LimitQuery {
    limit: Option<usize>,
}

async fn leaderboard(
    State(state): State<AppState>,
    _caller: Caller,
    ApiQuery(query): ApiQuery<LimitQuery>,
) -> ApiResult<Json<Value>> {
    Ok(Json(json!({ "entries": state.keeper.leaderboard(limit(query.limit)?) })))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfileResponse {
    pub profile: ProfileView,
    pub missions: Vec<MissionStatus>,
}

async fn profile(State(state): State<AppState>, Caller(user): Caller) -> Json<ProfileResponse> {
    Json(ProfileResponse {
        profile: state.keeper.profile(&user).into(),
        missions: state.keeper.mission_progress(&user).missions,
    })
}

async fn missions(State(state): State<AppState>, Caller(user): Caller) -> ApiResult<Json<Value>> {
    Ok(Json(to_value(&state.keeper.mission_progress(&user))?))
}

/// Runs a state-changing operation under the caller's idempotency key, if any.
fn mutate(
    state: &AppState,
    user: &UserId,
    headers: &HeaderMap,
    fingerprint: String,
    op: impl FnOnce() -> ApiResult<(StatusCode, Value)>,
) -> ApiResult<Response> {
    let key = idempotency::key_from(headers)?;
    let out = state.idempotency.run(user, key, fingerprint, op)?;
    let mut response = reply(out.status, out.body);
    if out.replayed {
        response
            .headers_mut()
            .insert(REPLAYED_HEADER, HeaderValue::from_static("true"));
    }
    Ok(response)
}
