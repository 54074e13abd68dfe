//! JSON-over-HTTP session service.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chromasheet::engine::{corrections_from_json, Session, TaskConfig, TaskKind};
use chromasheet::error::Category;
use chromasheet::{io, Error};
use serde::Deserialize;
use serde_json::{json, Value};

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &Error) -> StatusCode {
    match e.category() {
        Category::Validation => StatusCode::BAD_REQUEST,
        Category::Infeasible => StatusCode::UNPROCESSABLE_ENTITY,
        Category::NotFound => StatusCode::NOT_FOUND,
        Category::Busy => StatusCode::CONFLICT,
        Category::Io => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.0.code(), "message": self.0.to_string(), "details": self.0.details() });
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// A session plus its in-flight flag.
pub struct Slot {
    session: Mutex<Session>,
    busy: AtomicBool,
}

/// Held while a mutation runs; clears the busy flag on drop.
pub struct BusyGuard(Arc<Slot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

impl Slot {
    pub fn try_begin(self: &Arc<Self>) -> Result<BusyGuard, Error> {
        self.busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .map(|_| BusyGuard(self.clone()))
            .map_err(|_| Error::Busy("a task is already running in this session".into()))
    }

    pub fn snapshot(&self) -> Session {
        self.session.lock().unwrap().clone()
    }

    fn store(&self, s: Session) {
        *self.session.lock().unwrap() = s;
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Slot>>>>,
}

impl AppState {
    pub fn slot(&self, id: &str) -> Result<Arc<Slot>, Error> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session '{id}'")))
    }

    fn insert(&self, s: Session) -> String {
        let id = s.id.clone();
        let slot = Arc::new(Slot { session: Mutex::new(s), busy: AtomicBool::new(false) });
        self.sessions.lock().unwrap().insert(id.clone(), slot);
        id
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/sketch", put(put_sketch))
        .route("/sessions/{id}/tasks/{kind}", post(run))
        .route("/sessions/{id}/corrections", post(correct))
        .route("/sessions/{id}/revert", post(revert))
        .with_state(state)
}

fn parse(body: &Bytes) -> Result<Value, Error> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(json!({}));
    }
    serde_json::from_slice(body).map_err(|e| Error::InvalidArgs(format!("request body: {e}")))
}

async fn create(State(st): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let doc = io::from_json_value(parse(&body)?)?;
    let s = Session::new(uuid::Uuid::new_v4().to_string(), doc.workbook, doc.sketch)?;
    let id = st.insert(s);
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn show(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(st.slot(&id)?.snapshot().snapshot()))
}

/// Runs `f` on a copy of the session off the async runtime and stores the
/// result; reads keep seeing the previous state meanwhile.
async fn mutate<T, F>(st: &AppState, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
{
    let slot = st.slot(id)?;
    let guard = slot.try_begin()?;
    let mut s = slot.snapshot();
    let (s, out) = tokio::task::spawn_blocking(move || {
        let out = f(&mut s);
        (s, out)
    })
    .await
    .map_err(|e| Error::Busy(format!("task aborted: {e}")))?;
    let out = out?;
    slot.store(s);
    drop(guard);
    Ok(out)
}

async fn put_sketch(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<StatusCode> {
    let sketch = io::sketch_from_json_value(parse(&body)?)?;
    mutate(&st, &id, move |s| s.set_sketch(sketch)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn run(State(st): State<AppState>, Path((id, kind)): Path<(String, String)>, body: Bytes) -> ApiResult<Json<Value>> {
    let kind: TaskKind = kind.parse()?;
    let cfg: TaskConfig = serde_json::from_value(parse(&body)?).map_err(|e| Error::Config(e.to_string()))?;
    let snap = mutate(&st, &id, move |s| {
        s.run_task(kind, &cfg)?;
        Ok(s.snapshot())
    })
    .await?;
    Ok(Json(respond(snap)))
}

fn respond(snap: Value) -> Value {
    let i = snap["current"].as_u64().unwrap_or(0) as usize;
    json!({ "summary": snap["history"][i]["summary"].clone(), "state": snap })
}

async fn correct(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let fixes = corrections_from_json(&parse(&body)?)?;
    let snap = mutate(&st, &id, move |s| {
        s.correct(&fixes)?;
        Ok(s.snapshot())
    })
    .await?;
    Ok(Json(respond(snap)))
}

#[derive(Deserialize)]
struct RevertBody {
    index: usize,
}

async fn revert(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<StatusCode> {
    let b: RevertBody = serde_json::from_value(parse(&body)?).map_err(|e| Error::InvalidArgs(e.to_string()))?;
    mutate(&st, &id, move |s| s.revert(b.index)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn serve(host: &str, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::default())).await
}
