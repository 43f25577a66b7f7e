//! HTTP API over loaded mental models and their dialogue sessions.
//!
//! | method | path | body / query | success |
//! |---|---|---|---|
//! | GET | `/models` | | model summaries |
//! | GET | `/models/{name}/graph` | `anchor`, `radius`, `page` | graph document |
//! | POST | `/sessions` | `{"model": name}` | 201 `{session_id, model, turn}` |
//! | POST | `/sessions/{id}/ask` | question JSON | turn record |
//! | GET | `/sessions/{id}/history` | | all turn records |
//!
//! Errors are `{"error": code, "detail": text}`: 404 for unknown models,
//! sessions or routes, 422 for questions the dialogue rejects, 400 for
//! malformed bodies.

pub mod graph;

use std::collections::HashMap;
use std::future::Future;
use std::sync::{Arc, Mutex, PoisonError, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use explainer_core::dialogue::{DialogueError, EntityRef, Question, Session, TurnRecord};
use explainer_core::search::SearchError;
use explainer_core::MentalModel;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

use crate::graph::{graph_document, GraphError, GraphQuery};

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8421;

#[derive(Debug, Clone)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        Self {
            status,
            code,
            detail: detail.into(),
        }
    }

    fn unknown_model(name: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_model", format!("no model named `{name}` is loaded"))
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "detail": self.detail }))).into_response()
    }
}

impl From<DialogueError> for ApiError {
    fn from(e: DialogueError) -> Self {
        let unprocessable = |code| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string());
        match &e {
            DialogueError::Parse(_) => ApiError::new(StatusCode::BAD_REQUEST, "malformed_question", e.to_string()),
            DialogueError::UnknownEntity(_) => unprocessable("unknown_entity"),
            DialogueError::TargetNotYetPresented(_) => unprocessable("target_not_yet_presented"),
            DialogueError::NoRootOutput => unprocessable("no_root_output"),
            DialogueError::Search(SearchError::UnknownAttribute { .. }) => unprocessable("unknown_attribute"),
            DialogueError::Search(_) => unprocessable("search_failed"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("a model named `{0}` is already loaded")]
pub struct DuplicateModel(pub String);

/// Loaded models plus the live sessions over them.
#[derive(Debug, Default)]
pub struct AppState {
    models: Vec<(String, Arc<MentalModel>)>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_model(&mut self, name: &str, mm: MentalModel) -> Result<(), DuplicateModel> {
        if self.model(name).is_some() {
            return Err(DuplicateModel(name.to_owned()));
        }
        self.models.push((name.to_owned(), Arc::new(mm)));
        Ok(())
    }

    pub fn model(&self, name: &str) -> Option<&Arc<MentalModel>> {
        self.models.iter().find(|(n, _)| n == name).map(|(_, mm)| mm)
    }

    pub fn model_names(&self) -> impl Iterator<Item = &str> {
        self.models.iter().map(|(n, _)| n.as_str())
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let sessions = self.sessions.read().unwrap_or_else(PoisonError::into_inner);
        sessions.get(id).cloned().ok_or_else(|| ApiError::unknown_session(id))
    }
}

#[derive(Debug, Serialize)]
struct ModelSummary<'a> {
    name: &'a str,
    entities: usize,
    relations: usize,
    models: usize,
    root_output: Option<EntityRef>,
}

async fn list_models(State(state): State<Arc<AppState>>) -> Response {
    let summaries: Vec<ModelSummary> = state
        .models
        .iter()
        .map(|(name, mm)| ModelSummary {
            name,
            entities: mm.entities().len(),
            relations: mm.relations().len(),
            models: mm.models().len(),
            root_output: mm.root_output().and_then(|id| mm.entity(id)).map(|e| EntityRef {
                id: e.id,
                kind: mm.entity_kind(e).name.clone(),
                name: e.name.clone(),
            }),
        })
        .collect();
    Json(summaries).into_response()
}

async fn get_graph(
    State(state): State<Arc<AppState>>,
    Path(name): Path<String>,
    query: Result<Query<GraphQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(query) = query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", e.body_text()))?;
    let mm = state.model(&name).ok_or_else(|| ApiError::unknown_model(&name))?;
    let doc = graph_document(&name, mm, &query).map_err(|e| match e {
        GraphError::UnknownAnchor(a) => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown_entity",
            format!("no entity `{a}` to anchor the graph at"),
        ),
        GraphError::NoAnchor => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "no_root_output",
            "the model has no root output; pass an anchor",
        ),
        GraphError::PageOutOfRange { page, page_count } => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "page_out_of_range",
            format!("page {page} requested, the neighbourhood has {page_count}"),
        ),
    })?;
    Ok(Json(doc).into_response())
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8], code: &'static str) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, code, e.to_string()))
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    model: String,
}

#[derive(Debug, Serialize)]
struct SessionCreated<'a> {
    session_id: &'a str,
    model: &'a str,
    turn: &'a TurnRecord,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let request: CreateSession = parse_body(&body, "malformed_request")?;
    let mm = state.model(&request.model).ok_or_else(|| ApiError::unknown_model(&request.model))?;
    let root = mm.root_output().ok_or(DialogueError::NoRootOutput)?;
    let session = Session::start(mm.clone(), root, Default::default())?;
    let created = SessionCreated {
        session_id: session.id(),
        model: &request.model,
        turn: &session.history()[0],
    };
    let response = (StatusCode::CREATED, Json(&created)).into_response();
    let id = session.id().to_owned();
    state
        .sessions
        .write()
        .unwrap_or_else(PoisonError::into_inner)
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(response)
}

async fn ask(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let question: Question = parse_body(&body, "malformed_question")?;
    // one turn at a time per session
    let mut session = session.lock().unwrap_or_else(PoisonError::into_inner);
    let turn = session.ask_question(&question)?;
    Ok(Json(turn).into_response())
}

async fn history(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().unwrap_or_else(PoisonError::into_inner);
    Ok(Json(session.history()).into_response())
}

async fn not_found(request: Request) -> ApiError {
    ApiError::new(
        StatusCode::NOT_FOUND,
        "not_found",
        format!("no route for {} {}", request.method(), request.uri().path()),
    )
}

async fn log_request(request: Request, next: Next) -> Response {
    let (method, path) = (request.method().clone(), request.uri().path().to_owned());
    let started = Instant::now();
    let response = next.run(request).await;
    tracing::info!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        started.elapsed().as_secs_f64() * 1e3
    );
    response
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/models/{name}/graph", get(get_graph))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/history", get(history))
        .fallback(not_found)
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

pub async fn bind(host: &str, port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind((host, port)).await
}

/// Serves `state` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
