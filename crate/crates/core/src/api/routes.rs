use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde_json::Value;
use tower_http::services::ServeDir;

use super::{ApiError, CloseRiskRequest, ConfirmReviewRequest, LinkRiskRequest, WhatIfRequest};
use crate::inventory::{EucaFilter, EucaMetadata, EucaRecord, RiskRegisterEntry, Store};
use crate::reporting::{kpi_snapshot, KpiSnapshot};
use crate::risk::{assess, triage, what_if, AssessmentInput, AssessmentResult, TriageResult, TriageSubmission};

type Shared = Arc<Mutex<Store>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::from_json(&e))
}

fn lock(store: &Shared) -> MutexGuard<'_, Store> {
    // A panic mid-request never leaves a half-applied change behind
    // (mutations run on a copy), so a poisoned lock is still consistent.
    store.lock().unwrap_or_else(|p| p.into_inner())
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    match q.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e: T::Err| {
            let mut err = ApiError::new("OutOfRange", format!("bad {key} `{v}`: {e}"));
            err.field = Some(key.to_string());
            err
        }),
    }
}

fn today() -> NaiveDate {
    chrono::Local::now().date_naive()
}

async fn list_eucas(
    State(store): State<Shared>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Vec<EucaRecord>> {
    let filter = EucaFilter {
        department: q.get("department").filter(|d| !d.is_empty()).cloned(),
        band: param(&q, "band")?,
        lifecycle: param(&q, "lifecycle")?,
        due_before: param(&q, "due_before")?,
    };
    let store = lock(&store);
    Ok(Json(store.list_eucas(&filter).into_iter().cloned().collect()))
}

async fn upsert_euca(State(store): State<Shared>, bytes: Bytes) -> ApiResult<EucaRecord> {
    let meta: EucaMetadata = body(&bytes)?;
    Ok(Json(lock(&store).transact(|s| s.upsert_euca(meta))?))
}

async fn post_assess(
    State(store): State<Shared>,
    Query(q): Query<HashMap<String, String>>,
    bytes: Bytes,
) -> ApiResult<AssessmentResult> {
    let input: AssessmentInput = body(&bytes)?;
    let result = assess(&input);
    if let Some(id) = q.get("euca_id").filter(|id| !id.is_empty()) {
        let recorded = result.clone();
        lock(&store).transact(|s| s.record_assessment(id, input, recorded))?;
    }
    Ok(Json(result))
}

async fn post_whatif(bytes: Bytes) -> ApiResult<AssessmentResult> {
    let req: WhatIfRequest = body(&bytes)?;
    Ok(Json(what_if(&req.input, &req.toggles)?))
}

async fn post_triage(bytes: Bytes) -> ApiResult<TriageResult> {
    let sub: TriageSubmission = body(&bytes)?;
    Ok(Json(triage(&sub)?))
}

async fn confirm_review(State(store): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<EucaRecord> {
    let confirmed_on = if bytes.iter().all(u8::is_ascii_whitespace) {
        today()
    } else {
        body::<ConfirmReviewRequest>(&bytes)?.confirmed_on
    };
    Ok(Json(lock(&store).transact(|s| s.confirm_review(&id, confirmed_on))?))
}

async fn link_risk(State(store): State<Shared>, bytes: Bytes) -> ApiResult<RiskRegisterEntry> {
    let (euca_id, risk) = body::<LinkRiskRequest>(&bytes)?.into_parts();
    Ok(Json(lock(&store).transact(|s| s.link_risk(&euca_id, risk))?))
}

async fn close_risk(State(store): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<RiskRegisterEntry> {
    let req: CloseRiskRequest = body(&bytes)?;
    Ok(Json(lock(&store).transact(|s| s.close_risk(&id, req.closed_on))?))
}

async fn get_kpi(State(store): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult<KpiSnapshot> {
    let as_of = param(&q, "as_of")?.unwrap_or_else(today);
    Ok(Json(kpi_snapshot(&lock(&store), as_of)))
}

async fn get_draft(State(store): State<Shared>, Path(key): Path<String>) -> ApiResult<Value> {
    lock(&store)
        .draft(&key)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new("UnknownDraft", format!("no draft saved under `{key}`")))
}

async fn put_draft(State(store): State<Shared>, Path(key): Path<String>, bytes: Bytes) -> ApiResult<Value> {
    let value: Value = body(&bytes)?;
    let saved = value.clone();
    lock(&store).transact(|s| {
        s.put_draft(&key, saved);
        Ok(())
    })?;
    Ok(Json(value))
}

async fn not_found() -> ApiError {
    ApiError::new("NotFound", "no such endpoint")
}

/// All endpoints over one shared store. With `static_dir`, other paths
/// serve files from that directory.
pub fn router(store: Arc<Mutex<Store>>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/euca", get(list_eucas).post(upsert_euca))
        .route("/api/assess", post(post_assess))
        .route("/api/whatif", post(post_whatif))
        .route("/api/triage", post(post_triage))
        .route("/api/review/{id}/confirm", post(confirm_review))
        .route("/api/risk", post(link_risk))
        .route("/api/risk/{id}/close", post(close_risk))
        .route("/api/kpi", get(get_kpi))
        .route("/api/drafts/{key}", get(get_draft).put(put_draft))
        .route("/api/{*rest}", axum::routing::any(not_found))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}
