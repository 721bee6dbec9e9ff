//! HTTP session service for interactive layout editing, under `/v1`.
pub mod edit;
pub mod session;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use orc_core::lang::Diagnostic;
use orc_core::{SolutionView, Viewport};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use edit::Edit;
pub use session::{EditError, Session};

pub const DEFAULT_BUDGET: Duration = Duration::from_millis(500);

#[derive(Clone, Debug)]
pub struct Config {
    pub budget: Duration,
    /// Sessions are written here on shutdown and restored on start.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            budget: DEFAULT_BUDGET,
            snapshot_dir: None,
        }
    }
}

type Slot = Arc<tokio::sync::Mutex<Session>>;

pub struct AppState {
    sessions: Mutex<HashMap<String, Slot>>,
    next: AtomicU64,
    config: Config,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    id: String,
    revision: u64,
    spec: String,
}

impl AppState {
    pub fn new(config: Config) -> Arc<AppState> {
        Arc::new(AppState {
            sessions: Mutex::new(HashMap::new()),
            next: AtomicU64::new(1),
            config,
        })
    }

    fn slot(&self, id: &str) -> Option<Slot> {
        self.sessions.lock().expect("session map").get(id).cloned()
    }

    fn insert(&self, s: Session) -> String {
        let id = format!("s{:06x}", self.next.fetch_add(1, Ordering::Relaxed));
        self.sessions
            .lock()
            .expect("session map")
            .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(s)));
        id
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    /// Writes one JSON file per session.
    pub async fn snapshot(&self, dir: &Path) -> std::io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let slots: Vec<(String, Slot)> = self
            .sessions
            .lock()
            .expect("session map")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (id, slot) in &slots {
            let s = slot.lock().await;
            let snap = Snapshot {
                id: id.clone(),
                revision: s.revision,
                spec: s.spec(),
            };
            std::fs::write(
                dir.join(format!("{id}.json")),
                serde_json::to_vec_pretty(&snap)?,
            )?;
        }
        Ok(slots.len())
    }

    /// Loads sessions written by [`AppState::snapshot`]; unreadable files are skipped.
    pub fn restore(&self, dir: &Path) -> std::io::Result<usize> {
        let mut n = 0;
        let mut max_id = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let snap: Snapshot = match std::fs::read(&path).map(|b| serde_json::from_slice(&b)) {
                Ok(Ok(s)) => s,
                _ => {
                    log::warn!("skipping unreadable snapshot {}", path.display());
                    continue;
                }
            };
            match Session::create(&snap.spec, self.config.budget) {
                Ok(mut s) => {
                    s.revision = snap.revision;
                    if let Some(k) = snap
                        .id
                        .strip_prefix('s')
                        .and_then(|h| u64::from_str_radix(h, 16).ok())
                    {
                        max_id = max_id.max(k);
                    }
                    self.sessions
                        .lock()
                        .expect("session map")
                        .insert(snap.id, Arc::new(tokio::sync::Mutex::new(s)));
                    n += 1;
                }
                Err(d) => log::warn!("snapshot {} no longer parses: {}", path.display(), d[0]),
            }
        }
        self.next.fetch_max(max_id + 1, Ordering::Relaxed);
        Ok(n)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}", axum::routing::delete(remove))
        .route("/v1/sessions/{id}/solution", get(solution))
        .route("/v1/sessions/{id}/edits", post(edit))
        .route("/v1/sessions/{id}/spec", get(spec))
        .with_state(state)
}

/// Serves until interrupted, then snapshots if configured.
pub async fn serve(port: u16, config: Config) -> std::io::Result<()> {
    let state = AppState::new(config.clone());
    if let Some(dir) = config.snapshot_dir.as_deref().filter(|d| d.is_dir()) {
        let n = state.restore(dir)?;
        log::info!("restored {n} sessions from {}", dir.display());
    }
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &config.snapshot_dir {
        let n = state.snapshot(dir).await?;
        log::info!("wrote {n} session snapshots to {}", dir.display());
    }
    Ok(())
}

fn diagnostics(d: &[Diagnostic]) -> serde_json::Value {
    let list: Vec<_> = d
        .iter()
        .map(|x| json!({"message": x.message, "line": x.span.line, "column": x.span.column, "length": x.span.len}))
        .collect();
    json!({ "diagnostics": list })
}

fn reply(status: StatusCode, body: serde_json::Value) -> Response {
    (status, Json(body)).into_response()
}

fn not_found(id: &str) -> Response {
    reply(
        StatusCode::NOT_FOUND,
        json!({"error": format!("unknown session `{id}`")}),
    )
}

/// `{revision, solution}` or `{revision, conflicts}` for the session's state.
fn state_body(s: &Session) -> serde_json::Value {
    match &s.solution {
        Some(sol) => {
            json!({"revision": s.revision, "solution": SolutionView::new(&s.lowered.problem, sol)})
        }
        None => json!({"revision": s.revision, "conflicts": s.conflicts}),
    }
}

#[derive(Deserialize)]
struct CreateBody {
    spec: String,
}

async fn create(State(st): State<Arc<AppState>>, Json(body): Json<CreateBody>) -> Response {
    let budget = st.config.budget;
    let made = tokio::task::spawn_blocking(move || Session::create(&body.spec, budget)).await;
    match made {
        Ok(Ok(s)) => {
            let mut out = state_body(&s);
            let id = st.insert(s);
            out["id"] = json!(id);
            reply(StatusCode::CREATED, out)
        }
        Ok(Err(d)) => reply(StatusCode::UNPROCESSABLE_ENTITY, diagnostics(&d)),
        Err(e) => reply(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({"error": e.to_string()}),
        ),
    }
}

#[derive(Deserialize)]
struct ViewportQuery {
    width: Option<f64>,
    height: Option<f64>,
}

async fn solution(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ViewportQuery>,
) -> Response {
    let Some(slot) = st.slot(&id) else {
        return not_found(&id);
    };
    let s = slot.lock().await;
    if q.width.is_none() && q.height.is_none() {
        return reply(StatusCode::OK, state_body(&s));
    }
    let current = s.viewport();
    let vp = Viewport::new(
        q.width.unwrap_or(current.width),
        q.height.unwrap_or(current.height),
    );
    if !(vp.width >= 0.0 && vp.height >= 0.0 && vp.width.is_finite() && vp.height.is_finite()) {
        return reply(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({"error": "viewport must be finite and non-negative"}),
        );
    }
    let copy = s.clone();
    let revision = s.revision;
    drop(s);
    let budget = st.config.budget;
    match tokio::task::spawn_blocking(move || copy.what_if(vp, budget)).await {
        Ok(Ok((problem, Ok(sol)))) => reply(
            StatusCode::OK,
            json!({"revision": revision, "solution": SolutionView::new(&problem, &sol)}),
        ),
        Ok(Ok((_, Err(labels)))) => reply(
            StatusCode::OK,
            json!({"revision": revision, "conflicts": labels}),
        ),
        Ok(Err(msg)) => reply(StatusCode::UNPROCESSABLE_ENTITY, json!({"error": msg})),
        Err(e) => reply(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({"error": e.to_string()}),
        ),
    }
}

#[derive(Deserialize)]
struct EditBody {
    expected_revision: u64,
    edit: Edit,
}

async fn edit(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<EditBody>,
) -> Response {
    let Some(slot) = st.slot(&id) else {
        return not_found(&id);
    };
    let mut guard = slot.lock().await;
    if guard.revision != body.expected_revision {
        return reply(
            StatusCode::CONFLICT,
            json!({"error": "revision mismatch", "revision": guard.revision, "expected_revision": body.expected_revision}),
        );
    }
    let mut work = guard.clone();
    let budget = st.config.budget;
    let result =
        tokio::task::spawn_blocking(move || work.apply(&body.edit, budget).map(|()| work)).await;
    match result {
        Ok(Ok(next)) => {
            *guard = next;
            reply(StatusCode::OK, state_body(&guard))
        }
        Ok(Err(EditError::Conflicts(labels))) => {
            reply(StatusCode::CONFLICT, json!({"conflicts": labels}))
        }
        Ok(Err(EditError::Invalid(reason))) => {
            reply(StatusCode::UNPROCESSABLE_ENTITY, json!({"error": reason}))
        }
        Err(e) => reply(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({"error": e.to_string()}),
        ),
    }
}

async fn spec(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(slot) = st.slot(&id) else {
        return not_found(&id);
    };
    let s = slot.lock().await;
    reply(StatusCode::OK, json!({"spec": s.spec()}))
}

async fn remove(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    match st.sessions.lock().expect("session map").remove(&id) {
        Some(_) => StatusCode::NO_CONTENT.into_response(),
        None => not_found(&id),
    }
}
