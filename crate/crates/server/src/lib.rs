//! HTTP/JSON service over the package-query engine.
//!
//! Build a [`Router`] with [`router`] around a shared [`AppState`] and serve
//! it with axum. Solves run on the blocking pool with a per-request deadline.

// handlers return ApiError by value; it is only built on the error path
#![allow(clippy::result_large_err)]

mod error;
mod views;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path as UrlPath, Request, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use paql_core::catalog::{ColumnKind, Relation, TupleId, Value};
use paql_core::evaluator::objective_value;
use paql_core::exploration::{
    start_session_with, suggest_constraints, visual_summary_with, ConstraintSuggestion,
    ExplorationSession, SummaryDims,
};
use paql_core::local_search::{local_search, LocalSearchConfig};
use paql_core::pruning::bounds_for;
use paql_core::solver::{brute_force_oracle, solve_formula, SolveStats};
use paql_core::{parse, pretty_print, validate, Catalog, SolveOutcome, SolveStatus, SolverConfig, ValidatedQuery};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::ApiError;
pub use views::{DatasetView, PackageView, SessionView};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Deadline for a single solve unless the request sets `timeoutMs`.
    pub solve_timeout: Duration,
    pub session_ttl: Duration,
    /// Allowed CORS origin; `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            solve_timeout: Duration::from_secs(10),
            session_ttl: Duration::from_secs(30 * 60),
            cors_origin: None,
        }
    }
}

struct SessionSlot {
    session: ExplorationSession,
    relation: Arc<Relation>,
    last_used: Instant,
}

pub struct AppState {
    catalog: RwLock<Catalog>,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionSlot>>>>,
    config: ServerConfig,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState {
            catalog: RwLock::new(Catalog::new()),
            sessions: Mutex::new(HashMap::new()),
            config,
        }
    }

    pub fn catalog(&self) -> std::sync::RwLockReadGuard<'_, Catalog> {
        self.catalog.read().expect("catalog lock")
    }

    pub fn insert(&self, relation: Relation) -> Arc<Relation> {
        self.catalog.write().expect("catalog lock").insert(relation)
    }

    /// Loads every `*.csv` in `dir`, naming each relation after its file stem.
    pub fn load_dir(&self, dir: &Path) -> Result<Vec<String>, String> {
        let mut names = Vec::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        paths.sort();
        for path in paths {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let file = std::fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let rel = paql_core::catalog::load_csv(&name, file)
                .map_err(|e| format!("{}: {} {e}", path.display(), e.code()))?;
            self.insert(rel);
            names.push(name);
        }
        Ok(names)
    }

    fn dataset(&self, name: &str) -> ApiResult<Arc<Relation>> {
        self.catalog()
            .get(name)
            .ok_or_else(|| ApiError::no_such_dataset(name))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<SessionSlot>>> {
        let mut sessions = self.sessions.lock().expect("session table");
        let ttl = self.config.session_ttl;
        sessions.retain(|_, slot| {
            // a slot busy with a request is in use, not idle
            slot.try_lock().map_or(true, |s| s.last_used.elapsed() < ttl)
        });
        sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::no_such_session(id))
    }

    fn solver_config(&self, seed: Option<u64>, timeout_ms: Option<u64>) -> SolverConfig {
        SolverConfig {
            seed: seed.unwrap_or(0),
            timeout: Some(
                timeout_ms
                    .map(Duration::from_millis)
                    .unwrap_or(self.config.solve_timeout),
            ),
            ..Default::default()
        }
    }
}

/// JSON body extractor whose rejections use the API error shape.
struct Body<T>(T);

impl<S, T> FromRequest<S> for Body<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(ApiError::malformed(match e {
                JsonRejection::JsonDataError(e) => e.body_text(),
                other => other.body_text(),
            })),
        }
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?
}

fn compile(text: &str, rel: &Relation) -> ApiResult<ValidatedQuery> {
    let ast = parse(text)?;
    Ok(validate(&ast, rel.schema())?)
}

#[derive(Deserialize)]
struct NewDataset {
    name: String,
    csv: String,
}

async fn create_dataset(
    State(state): State<Arc<AppState>>,
    Body(req): Body<NewDataset>,
) -> ApiResult<(StatusCode, Json<DatasetView>)> {
    let rel = paql_core::catalog::load_csv(&req.name, req.csv.as_bytes())?;
    let rel = state.insert(rel);
    Ok((StatusCode::CREATED, Json(DatasetView::of(&rel))))
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Vec<DatasetView>> {
    Json(state.catalog().list().iter().map(|r| DatasetView::of(r)).collect())
}

#[derive(Deserialize)]
struct ParseRequest {
    text: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ParseResponse {
    ast: paql_core::PackageQuery,
    canonical_text: String,
}

async fn parse_query(Body(req): Body<ParseRequest>) -> ApiResult<Json<ParseResponse>> {
    let ast = parse(&req.text)?;
    Ok(Json(ParseResponse {
        canonical_text: pretty_print(&ast),
        ast,
    }))
}

#[derive(Deserialize, Clone, Copy, Default)]
#[serde(rename_all = "lowercase")]
enum SolveMethod {
    #[default]
    Ilp,
    Local,
    Brute,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct EvaluateRequest {
    dataset: String,
    text: String,
    #[serde(default)]
    method: SolveMethod,
    seed: Option<u64>,
    timeout_ms: Option<u64>,
}

#[derive(Serialize)]
struct BoundsView {
    lower: u64,
    upper: Option<u64>,
}

#[derive(Serialize)]
struct EvaluateResponse {
    status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    package: Option<PackageView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    bounds: BoundsView,
    stats: SolveStats,
}

fn brute_outcome(query: &ValidatedQuery, rel: &Relation) -> ApiResult<SolveOutcome> {
    let all = brute_force_oracle(query, rel, None)?;
    let stats = SolveStats {
        iterations: all.len() as u64,
        disjuncts: 1,
        ..Default::default()
    };
    Ok(match all.into_iter().next() {
        Some((package, _)) => SolveOutcome {
            status: if query.objective().is_some() {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            },
            objective_value: objective_value(&package, query, rel),
            package: Some(package),
            stats,
        },
        None => SolveOutcome {
            status: SolveStatus::Infeasible,
            package: None,
            objective_value: None,
            stats,
        },
    })
}

async fn evaluate(
    State(state): State<Arc<AppState>>,
    Body(req): Body<EvaluateRequest>,
) -> ApiResult<Json<EvaluateResponse>> {
    let rel = state.dataset(&req.dataset)?;
    let query = compile(&req.text, &rel)?;
    let config = state.solver_config(req.seed, req.timeout_ms);
    blocking(move || {
        let bounds = bounds_for(&query, &rel);
        let out = match req.method {
            SolveMethod::Ilp => solve_formula(&query, &rel, &config)?,
            SolveMethod::Local => local_search(
                &query,
                &rel,
                &LocalSearchConfig {
                    seed: config.seed,
                    ..Default::default()
                },
            ),
            SolveMethod::Brute => brute_outcome(&query, &rel)?,
        };
        if out.status == SolveStatus::Aborted && out.stats.timed_out {
            return Err(ApiError::timeout(out.stats));
        }
        Ok(Json(EvaluateResponse {
            status: out.status,
            package: out.package.as_ref().map(|p| PackageView::of(p, &rel)),
            objective: out.objective_value,
            bounds: BoundsView {
                lower: bounds.lower,
                upper: bounds.upper,
            },
            stats: out.stats,
        }))
    })
    .await
}

#[derive(Deserialize)]
struct NewSession {
    dataset: String,
    text: String,
    seed: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionCreated {
    session_id: String,
    package: PackageView,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Body(req): Body<NewSession>,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let rel = state.dataset(&req.dataset)?;
    let query = compile(&req.text, &rel)?;
    let config = state.solver_config(req.seed, None);
    let worker = Arc::clone(&state);
    blocking(move || {
        let session = start_session_with(&query, &rel, config)?;
        let id = uuid::Uuid::new_v4().to_string();
        let package = PackageView::of(session.current(), &rel);
        let slot = SessionSlot {
            session,
            relation: rel,
            last_used: Instant::now(),
        };
        worker
            .sessions
            .lock()
            .expect("session table")
            .insert(id.clone(), Arc::new(Mutex::new(slot)));
        Ok((
            StatusCode::CREATED,
            Json(SessionCreated {
                session_id: id,
                package,
            }),
        ))
    })
    .await
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<SessionView>> {
    let slot = state.session(&id)?;
    let mut slot = slot.lock().expect("session lock");
    slot.last_used = Instant::now();
    Ok(Json(SessionView::of(&id, &slot.session, &slot.relation)))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PinRequest {
    tuple_id: usize,
    #[serde(default = "one")]
    multiplicity: u32,
}

fn one() -> u32 {
    1
}

async fn pin(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Body(req): Body<PinRequest>,
) -> ApiResult<Json<SessionView>> {
    let slot = state.session(&id)?;
    let mut slot = slot.lock().expect("session lock");
    slot.last_used = Instant::now();
    slot.session.pin(TupleId(req.tuple_id), req.multiplicity)?;
    Ok(Json(SessionView::of(&id, &slot.session, &slot.relation)))
}

#[derive(Serialize)]
struct ReplaceResponse {
    package: PackageView,
}

async fn replace(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<ReplaceResponse>> {
    let slot = state.session(&id)?;
    blocking(move || {
        let mut slot = slot.lock().expect("session lock");
        slot.last_used = Instant::now();
        let rel = Arc::clone(&slot.relation);
        let package = slot.session.replace_unpinned(&rel)?;
        Ok(Json(ReplaceResponse {
            package: PackageView::of(package, &rel),
        }))
    })
    .await
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SuggestRequest {
    dataset: String,
    column: String,
    value: Option<serde_json::Value>,
    query_text: Option<String>,
}

/// Cell values may arrive as strings; numeric columns accept numeric strings.
fn cell_value(v: &serde_json::Value, kind: ColumnKind) -> ApiResult<Value> {
    match (v, kind) {
        (serde_json::Value::Number(n), _) => n
            .as_f64()
            .map(Value::Number)
            .ok_or_else(|| ApiError::malformed("value is not a finite number")),
        (serde_json::Value::String(s), ColumnKind::Numeric) => match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Number(x)),
            _ => Ok(Value::Text(s.clone())),
        },
        (serde_json::Value::String(s), ColumnKind::Text) => Ok(Value::Text(s.clone())),
        _ => Err(ApiError::malformed("value must be a number or a string")),
    }
}

async fn suggest(
    State(state): State<Arc<AppState>>,
    Body(req): Body<SuggestRequest>,
) -> ApiResult<Json<Vec<ConstraintSuggestion>>> {
    let rel = state.dataset(&req.dataset)?;
    let query = req
        .query_text
        .as_deref()
        .map(|t| compile(t, &rel))
        .transpose()?;
    let kind = rel
        .schema()
        .index_of(&req.column)
        .map(|i| rel.schema().column(i).kind)
        .unwrap_or(ColumnKind::Text);
    let value = req
        .value
        .as_ref()
        .filter(|v| !v.is_null())
        .map(|v| cell_value(v, kind))
        .transpose()?;
    Ok(Json(suggest_constraints(
        &rel,
        &req.column,
        value.as_ref(),
        query.as_ref(),
        None,
    )?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SummaryRequest {
    dataset: String,
    text: String,
    #[serde(default = "default_max_packages")]
    max_packages: usize,
    seed: Option<u64>,
}

fn default_max_packages() -> usize {
    10
}

#[derive(Serialize)]
struct PointView {
    package: PackageView,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct SummaryResponse {
    dims: SummaryDims,
    points: Vec<PointView>,
}

async fn summary(
    State(state): State<Arc<AppState>>,
    Body(req): Body<SummaryRequest>,
) -> ApiResult<Json<SummaryResponse>> {
    if req.max_packages == 0 {
        return Err(ApiError::malformed("maxPackages must be at least 1"));
    }
    let rel = state.dataset(&req.dataset)?;
    let query = compile(&req.text, &rel)?;
    let config = state.solver_config(req.seed, None);
    blocking(move || {
        let s = visual_summary_with(&query, &rel, req.max_packages, &config)?;
        Ok(Json(SummaryResponse {
            dims: s.dims,
            points: s
                .points
                .iter()
                .map(|p| PointView {
                    package: PackageView::of(&p.package, &rel),
                    x: p.x,
                    y: p.y,
                })
                .collect(),
        }))
    })
    .await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NO_SUCH_ROUTE", "no such route")
}

fn cors(config: &ServerConfig) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    match config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => layer.allow_origin(AllowOrigin::exact(origin)),
        _ => layer.allow_origin(Any),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = cors(&state.config);
    Router::new()
        .route("/datasets", post(create_dataset).get(list_datasets))
        .route("/queries/parse", post(parse_query))
        .route("/queries/evaluate", post(evaluate))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/pin", post(pin))
        .route("/sessions/{id}/replace", post(replace))
        .route("/suggest", post(suggest))
        .route("/summary", post(summary))
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
