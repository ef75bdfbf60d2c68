//! HTTP stepping API over the interpreter. Each session owns a configuration
//! plus one snapshot per transition; finished annotated sessions can spawn a
//! reverse session that runs the inverted program.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use revlang_core::checker::{equivalence, BodyRelation};
use revlang_core::engine::{Config, EngineError, Mode, TransitionRecord, DEFAULT_BUDGET};
use revlang_core::scheduler::SchedulePolicy;
use revlang_core::syntax::{render, render_annotated};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{message}")]
    BadRequest { message: String, detail: Value },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, detail) = match &self {
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, Value::Null),
            ApiError::Conflict(_) => (StatusCode::CONFLICT, Value::Null),
            ApiError::BadRequest { detail, .. } => (StatusCode::BAD_REQUEST, detail.clone()),
            ApiError::Engine(_) => (StatusCode::UNPROCESSABLE_ENTITY, Value::Null),
        };
        let mut body = json!({ "schemaVersion": SCHEMA_VERSION, "error": self.to_string() });
        if !detail.is_null() {
            body["detail"] = detail;
        }
        (status, Json(body)).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError::BadRequest {
        message: message.into(),
        detail: Value::Null,
    }
}

/// Scheduling policy used by `run`, as sent by clients.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PolicySpec {
    Seeded { seed: u64 },
    LeftmostFirst,
    Scripted { choices: Vec<usize> },
}

impl PolicySpec {
    fn build(&self) -> SchedulePolicy {
        match self {
            PolicySpec::Seeded { seed } => SchedulePolicy::seeded(*seed),
            PolicySpec::LeftmostFirst => SchedulePolicy::LeftmostFirst,
            PolicySpec::Scripted { choices } => SchedulePolicy::scripted(choices.clone()),
        }
    }
}

struct Session {
    /// Configurations after 0, 1, … transitions; the last one is current.
    history: Vec<Config>,
    trace: Vec<TransitionRecord>,
    policy: SchedulePolicy,
    /// For reverse sessions: the forward session's state at step 0.
    original: Option<Config>,
    touched: Instant,
}

impl Session {
    fn new(start: Config, policy: SchedulePolicy, original: Option<Config>) -> Session {
        Session {
            history: vec![start],
            trace: Vec::new(),
            policy,
            original,
            touched: Instant::now(),
        }
    }

    fn current(&self) -> &Config {
        self.history.last().expect("history is never empty")
    }

    fn step(&mut self, index: usize) -> Result<TransitionRecord, ApiError> {
        let c = self.current();
        if c.is_terminal() {
            return Err(ApiError::Conflict("session is terminal".into()));
        }
        let enabled = c.enabled();
        let redex = enabled.get(index).ok_or_else(|| {
            bad_request(format!(
                "redex index {index} out of range ({} enabled)",
                enabled.len()
            ))
        })?;
        let mut next = c.clone();
        let record = next.step(redex)?;
        self.history.push(next);
        self.trace.push(record.clone());
        Ok(record)
    }

    fn restored(&self) -> Option<bool> {
        let original = self.original.as_ref()?;
        let c = self.current();
        if !c.is_terminal() {
            return Some(false);
        }
        let report = equivalence(original, c, BodyRelation::Inverted);
        Some(report.overall && c.aux.is_empty())
    }

    fn view(&self, id: &str) -> Value {
        let c = self.current();
        let state = c.dump_state();
        let enabled: Vec<Value> = c
            .enabled()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                json!({
                    "index": i,
                    "rule": r.rule,
                    "path": r.path,
                    "label": c.describe(r),
                    "mRule": r.is_m_rule(),
                })
            })
            .collect();
        let mut v = json!({
            "schemaVersion": SCHEMA_VERSION,
            "sessionId": id,
            "mode": c.mode,
            "renderedProgram": render_annotated(&c.origin, &c.table),
            "residualProgram": render_annotated(&c.program, &c.table),
            "stores": { "gamma": state["gamma"], "sigma": state["sigma"], "mu": state["mu"], "beta": state["beta"] },
            "delta": state["delta"],
            "counters": state["counters"],
            "enabledRedexes": enabled,
            "stepIndex": self.trace.len(),
            "terminal": c.is_terminal(),
        });
        if let Some(r) = self.restored() {
            v["restored"] = json!(r);
        }
        v
    }
}

type Shared = Arc<Mutex<Session>>;

/// In-memory session table with idle expiry.
pub struct AppState {
    sessions: Mutex<HashMap<String, Shared>>,
    counter: AtomicU64,
    ttl: Duration,
}

impl AppState {
    pub fn new(ttl: Duration) -> Arc<AppState> {
        Arc::new(AppState {
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
            ttl,
        })
    }

    fn sweep(&self, table: &mut HashMap<String, Shared>) {
        let ttl = self.ttl;
        // a session busy in another request is not idle
        table.retain(|_, s| s.try_lock().map_or(true, |s| s.touched.elapsed() < ttl));
    }

    fn insert(&self, session: Session) -> String {
        let id = format!("s{}", self.counter.fetch_add(1, Ordering::Relaxed) + 1);
        let mut table = self.sessions.lock().unwrap();
        self.sweep(&mut table);
        table.insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        let s = {
            let mut table = self.sessions.lock().unwrap();
            self.sweep(&mut table);
            table.get(id).cloned()
        }
        .ok_or_else(|| ApiError::NotFound(id.to_string()))?;
        // the table lock is released first so a long `run` only blocks its own session
        s.lock().unwrap().touched = Instant::now();
        Ok(s)
    }
}

#[derive(Deserialize)]
struct CreateBody {
    source: String,
    #[serde(default)]
    init: BTreeMap<String, i64>,
    policy: Option<PolicySpec>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct StepBody {
    redex_index: usize,
}

#[derive(Deserialize, Default)]
struct RunBody {
    budget: Option<u64>,
}

async fn healthz() -> Json<Value> {
    Json(json!({ "schemaVersion": SCHEMA_VERSION, "status": "ok" }))
}

async fn create(
    State(app): State<Arc<AppState>>,
    Json(body): Json<CreateBody>,
) -> Result<impl IntoResponse, ApiError> {
    let program = match revlang_core::parse_and_validate(&body.source) {
        Ok(p) => p,
        Err(revlang_core::Error::Syntax(e)) => {
            return Err(ApiError::BadRequest {
                message: format!("parse error at {e}"),
                detail: json!({ "line": e.line, "col": e.col, "message": e.message }),
            })
        }
        Err(e) => return Err(bad_request(e.to_string())),
    };
    let config = Config::annotated(&program, &body.init)?;
    let policy = body
        .policy
        .map_or_else(SchedulePolicy::default, |p| p.build());
    let session = Session::new(config, policy, None);
    let view = session.view("");
    let id = app.insert(session);
    let mut view = view;
    view["sessionId"] = json!(id);
    Ok((
        StatusCode::CREATED,
        Json(json!({ "schemaVersion": SCHEMA_VERSION, "sessionId": id, "state": view })),
    ))
}

async fn state(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().unwrap();
    Ok(Json(s.view(&id)))
}

async fn step(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<StepBody>,
) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().unwrap();
    let record = s.step(body.redex_index)?;
    Ok(Json(json!({
        "schemaVersion": SCHEMA_VERSION,
        "transitionRecord": record,
        "state": s.view(&id),
    })))
}

async fn run(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<RunBody>>,
) -> Result<Json<Value>, ApiError> {
    let budget = body.and_then(|b| b.0.budget).unwrap_or(DEFAULT_BUDGET);
    let s = app.get(&id)?;
    let mut s = s.lock().unwrap();
    let mut taken = 0u64;
    while !s.current().is_terminal() {
        if taken >= budget {
            return Err(EngineError::BudgetExceeded { budget }.into());
        }
        let enabled = s.current().enabled();
        if enabled.is_empty() {
            return Err(EngineError::Stuck {
                residual: render(&s.current().program),
            }
            .into());
        }
        let step = s.current().steps;
        let i = s.policy.choose(&enabled, step).map_err(EngineError::from)?;
        s.step(i)?;
        taken += 1;
    }
    Ok(Json(s.view(&id)))
}

async fn back(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().unwrap();
    if s.current().mode == Mode::Reverse {
        return Err(ApiError::Conflict(
            "reverse sessions only step forward".into(),
        ));
    }
    if s.trace.is_empty() {
        return Err(ApiError::Conflict("already at step 0".into()));
    }
    s.history.pop();
    s.trace.pop();
    Ok(Json(s.view(&id)))
}

async fn reverse(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let (rev, original) = {
        let s = app.get(&id)?;
        let s = s.lock().unwrap();
        let c = s.current();
        if c.mode != Mode::Annotated {
            return Err(ApiError::Conflict(
                "only annotated sessions can be reversed".into(),
            ));
        }
        if !c.is_terminal() {
            return Err(ApiError::Conflict("session has not finished".into()));
        }
        (Config::reverse_of(c)?, s.history[0].clone())
    };
    let inverted = render_annotated(&rev.program, &rev.table);
    let session = Session::new(rev, SchedulePolicy::LeftmostFirst, Some(original));
    let rid = app.insert(session);
    let view = app.get(&rid)?.lock().unwrap().view(&rid);
    Ok(Json(json!({
        "schemaVersion": SCHEMA_VERSION,
        "reverseSessionId": rid,
        "invertedProgram": inverted,
        "state": view,
    })))
}

/// The API routes, with CORS, optionally serving static files for any other
/// path.
pub fn router(app: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/run", post(run))
        .route("/sessions/{id}/back", post(back))
        .route("/sessions/{id}/reverse", post(reverse))
        .with_state(app);
    let api = match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    api.layer(CorsLayer::permissive())
}

/// Bind `addr` and serve until the process ends.
pub async fn serve(
    addr: SocketAddr,
    ui_dir: Option<PathBuf>,
    ttl: Duration,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(ttl), ui_dir)).await
}
