//! Local HTTP/JSON API backing the curation UI.
//!
//! | route                          | body / response                                  |
//! |--------------------------------|--------------------------------------------------|
//! | `GET  /methods`                | available methods and graph languages            |
//! | `POST /expand`                 | `{seeds, method, params}` → session + candidates |
//! | `GET  /session/{id}`           | current session state                            |
//! | `POST /session/{id}/decide`    | `{word, decision: accept|reject, rater?}`        |
//! | `GET  /session/{id}/export`    | curated word list and annotation CSV             |

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lexpand_core::{normalize_word, WordList};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::resources::{MethodError, MethodParams, Resources, METHODS};
use crate::session::{Decision, SessionState, SessionStore, DEFAULT_RATER};

pub struct AppState {
    pub resources: Resources,
    pub sessions: SessionStore,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/methods", get(methods))
        .route("/expand", post(expand))
        .route("/session/{id}", get(session))
        .route("/session/{id}/decide", post(decide))
        .route("/session/{id}/export", get(export))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.to_string())
}

fn internal(e: anyhow::Error) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}"))
}

fn not_found(id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown session {id:?}"))
}

impl From<MethodError> for ApiError {
    fn from(e: MethodError) -> Self {
        match e {
            MethodError::Unknown(_) => bad_request(e),
            MethodError::Unavailable(_) => ApiError(StatusCode::SERVICE_UNAVAILABLE, e.to_string()),
            MethodError::Core(lexpand_core::Error::LanguageUnavailable(_)) => bad_request(e),
            MethodError::Core(_) => bad_request(e),
        }
    }
}

async fn methods(State(app): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let methods: Vec<_> = METHODS
        .iter()
        .map(|m| json!({ "id": m, "available": app.resources.is_available(m) }))
        .collect();
    let languages: Vec<&str> = app
        .resources
        .graph
        .as_ref()
        .map(|g| g.languages().collect())
        .unwrap_or_default();
    Json(json!({
        "methods": methods,
        "graph_languages": languages,
        "embedding_vocabulary": app.resources.space.as_ref().map(|s| s.len()),
        "synonym_words": app.resources.synonyms.as_ref().map(|s| s.word_count()),
    }))
}

#[derive(Deserialize)]
pub struct ExpandRequest {
    pub seeds: Vec<String>,
    pub method: String,
    #[serde(default)]
    pub params: Option<MethodParams>,
}

#[derive(Serialize, Deserialize)]
pub struct ExpandResponse {
    pub session_id: String,
    pub expanded: Vec<String>,
    pub new_words: Vec<String>,
    pub unmatched: Vec<String>,
    pub expandable: bool,
}

async fn expand(State(app): State<Arc<AppState>>, Json(req): Json<ExpandRequest>) -> Result<Json<ExpandResponse>, ApiError> {
    let params = req.params.unwrap_or_default();
    let expander = app.resources.expander(&req.method, &params)?;
    let seeds = WordList::from_strs("seeds", &req.seeds).map_err(bad_request)?;
    if seeds.is_empty() {
        return Err(bad_request("no seed words"));
    }
    let app2 = app.clone();
    let method = req.method.clone();
    let (expansion, state) = tokio::task::spawn_blocking(move || -> anyhow::Result<_> {
        let expansion = expander.expand(&seeds)?;
        let state = app2
            .sessions
            .create(&method, serde_json::to_value(&params)?, &expansion)?;
        Ok((expansion, state))
    })
    .await
    .map_err(|e| internal(e.into()))?
    .map_err(|e| match e.downcast_ref::<lexpand_core::Error>() {
        Some(_) => bad_request(format!("{e:#}")),
        None => internal(e),
    })?;
    let strings = |l: &WordList| l.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    Ok(Json(ExpandResponse {
        session_id: state.session_id,
        expanded: strings(&expansion.expanded()),
        new_words: strings(&expansion.new_words),
        unmatched: strings(&expansion.unmatched),
        expandable: expansion.is_expandable(),
    }))
}

fn session_json(state: &SessionState) -> serde_json::Value {
    let decisions: serde_json::Map<String, serde_json::Value> = state
        .decisions
        .iter()
        .map(|(w, (d, r))| (w.to_string(), json!({ "decision": d, "rater": r })))
        .collect();
    let rejected = state.decisions.values().filter(|(d, _)| *d == Decision::Reject).count();
    let accepted = state.decisions.len() - rejected;
    json!({
        "session_id": state.session_id,
        "method": state.method,
        "params": state.params,
        "seeds": state.seeds,
        "expanded": state.expanded,
        "unmatched": state.unmatched,
        "decisions": decisions,
        "counts": {
            "candidates": state.expanded.len(),
            "accepted": accepted,
            "rejected": rejected,
            "pending": state.expanded.len() - state.decisions.len(),
        },
    })
}

async fn session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, ApiError> {
    let state = app.sessions.state(&id).ok_or_else(|| not_found(&id))?;
    Ok(Json(session_json(&state)))
}

#[derive(Deserialize)]
pub struct DecideRequest {
    pub word: String,
    pub decision: Decision,
    #[serde(default)]
    pub rater: Option<String>,
}

async fn decide(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<DecideRequest>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let word = normalize_word(&req.word).map_err(bad_request)?;
    let rater = req.rater.unwrap_or_else(|| DEFAULT_RATER.to_string());
    if app.sessions.state(&id).is_none() {
        return Err(not_found(&id));
    }
    let state = app
        .sessions
        .decide(&id, word, req.decision, &rater)
        .map_err(bad_request)?
        .ok_or_else(|| not_found(&id))?;
    Ok(Json(session_json(&state)))
}

async fn export(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, ApiError> {
    let state = app.sessions.state(&id).ok_or_else(|| not_found(&id))?;
    let export = state.export().map_err(internal)?;
    Ok(Json(serde_json::to_value(export).map_err(|e| internal(e.into()))?))
}
