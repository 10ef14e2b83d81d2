//! HTTP API behind the interactive editor.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/runs[?fixture=case]` | start an image-to-DSL run (raw image body), 202 |
//! | GET | `/runs/{id}` | run status; the document and report once done |
//! | POST | `/sessions` | `{"document": ...}` or `{"run": id}`, optional `"seed"` |
//! | GET | `/sessions/{id}` | session snapshot |
//! | PATCH | `/sessions/{id}/containers/{cid}` | one [`Edit`]; returns document, report and SVG |
//! | PUT / DELETE | `/sessions/{id}/data/{cid}` | upload (JSON or CSV) or drop a user table |
//! | POST | `/sessions/{id}/undo` | restore the previous state |
//! | GET | `/sessions/{id}/render?width&height&seed` | SVG |
//! | GET | `/sessions/{id}/tree` | container hierarchy with relative boxes |
//!
//! Mutations on one session are serialized; a rejected mutation leaves the
//! session unchanged.

mod config;
mod runs;
mod session;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use revis_core::datagen::UserTable;
use revis_core::dsl::{
    add_subcontainer, duplicate_container, edit_frame, frame_from_value, node_from_value, node_to_value,
    remove_container, set_description, set_spec_field, spec_from_value, to_value, validate, ContainerId, ContainerNode,
    CoordinateFrame, DslDocument, Issue,
};
use revis_core::pipeline::{ImageInput, RunStatus};
use revis_core::render::RenderOptions;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use config::{PipelineMode, ServiceConfig};
pub use runs::pick_fixture;
pub use session::{Session, Snapshot, Store};

const IMAGE_TYPES: [&str; 5] = ["image/png", "image/jpeg", "image/gif", "image/webp", "application/octet-stream"];

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} `{id}`"))
    }

    fn with_issues(mut self, issues: &[&Issue]) -> Self {
        self.body["issues"] = serde_json::to_value(issues).expect("issues serialize");
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug)]
pub struct AppState {
    pub config: ServiceConfig,
    pub store: Store,
    runs: Arc<runs::Runs>,
}

/// Builds the router, loading persisted sessions from the storage path.
pub fn app(config: ServiceConfig) -> std::io::Result<Router> {
    let store = Store::open(config.storage.as_deref())?;
    let runs = Arc::new(runs::Runs::new(config.pipeline.clone(), config.storage.as_deref(), config.run_workers));
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any).allow_origin(match &config.cors_origin {
        Some(o) => AllowOrigin::exact(
            HeaderValue::from_str(o).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?,
        ),
        None => AllowOrigin::any(),
    });
    let limit = config.max_upload_bytes;
    let state = Arc::new(AppState { config, store, runs });
    Ok(Router::new()
        .route("/runs", post(create_run))
        .route("/runs/{id}", get(get_run))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/containers/{cid}", patch(edit_container))
        .route("/sessions/{id}/data/{cid}", put(put_data).delete(delete_data))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/render", get(render))
        .route("/sessions/{id}/tree", get(tree))
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(state))
}

/// Serves on `0.0.0.0:<port>` until the process ends.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let port = config.port;
    let router = app(config)?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router).await
}

type AppRef = State<Arc<AppState>>;

#[derive(Deserialize)]
struct RunQuery {
    fixture: Option<String>,
}

async fn create_run(State(app): AppRef, Query(q): Query<RunQuery>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let ctype = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    let base = ctype.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    if !IMAGE_TYPES.contains(&base.as_str()) {
        return Err(ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, format!("expected an image body, got `{ctype}`")));
    }
    let image = ImageInput::from_bytes(body.to_vec()).map_err(|e| ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, e.to_string()))?;
    let fixture = app.runs.prepare(q.fixture.as_deref(), &image.bytes).map_err(ApiError::unprocessable)?;
    let id = app.runs.start(image, fixture);
    let location = format!("/runs/{id}");
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(json!({ "id": id, "status": RunStatus::Pending }))).into_response())
}

async fn get_run(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let rec = app.runs.get(&id).ok_or_else(|| ApiError::not_found("run", &id))?;
    Ok(Json(runs::run_json(&rec)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    document: Option<Value>,
    run: Option<String>,
    #[serde(default)]
    seed: u64,
}

fn session_json(s: &Session) -> Value {
    json!({
        "id": s.id,
        "seed": s.seed,
        "run": s.run,
        "document": to_value(&s.doc),
        "report": validate(&s.doc),
        "data": s.data_text().keys().collect::<Vec<_>>(),
        "undo_depth": s.undo_depth(),
    })
}

async fn create_session(State(app): AppRef, Json(req): Json<NewSession>) -> ApiResult<Response> {
    let doc = match (req.document, &req.run) {
        (Some(v), None) => revis_core::dsl::document_from_value(v).map_err(|e| ApiError::unprocessable(e.to_string()))?,
        (None, Some(run)) => {
            let rec = app.runs.get(run).ok_or_else(|| ApiError::not_found("run", run))?;
            let snap = rec.snapshot();
            match (snap.status, snap.document) {
                (RunStatus::Done, Some(doc)) => doc,
                (status, _) => return Err(ApiError::new(StatusCode::CONFLICT, format!("run `{run}` is {status:?}, not done"))),
            }
        }
        _ => return Err(ApiError::unprocessable("give exactly one of `document` and `run`")),
    };
    let s = Session::new(uuid::Uuid::new_v4().simple().to_string(), doc, req.seed, req.run);
    let body = session_json(&s);
    let location = format!("/sessions/{}", s.id);
    app.store.insert(s)?;
    Ok((StatusCode::CREATED, [(header::LOCATION, location)], Json(body)).into_response())
}

fn session(app: &AppState, id: &str) -> ApiResult<session::SessionHandle> {
    app.store.get(id).ok_or_else(|| ApiError::not_found("session", id))
}

async fn get_session(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = session(&app, &id)?;
    let s = h.read().await;
    Ok(Json(session_json(&s)))
}

/// One edit of `PATCH /sessions/{id}/containers/{cid}`.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Edit {
    /// Replace the container's `coordinate_system`.
    Frame { coordinate_system: Value },
    /// Set one specification field by dotted path; `null` removes it.
    Spec { path: String, value: Value },
    /// Replace the whole specification.
    ReplaceSpec { data_specification: Value },
    Description { text: String },
    /// Copy the subtree next to itself, optionally with a new frame.
    Duplicate { coordinate_system: Option<Value> },
    Remove,
    /// Add `node` as a child of the container.
    Add { node: Value, data_specification: Option<Value> },
}

fn frame(v: &Value) -> ApiResult<CoordinateFrame> {
    frame_from_value(v).map_err(|e| ApiError::unprocessable(e.to_string()))
}

fn apply_edit(doc: &DslDocument, cid: &ContainerId, edit: Edit) -> ApiResult<DslDocument> {
    let node = |id: &ContainerId| -> ApiResult<&ContainerNode> {
        doc.find(id).ok_or_else(|| ApiError::not_found("container", &id.to_string()))
    };
    let spec = |v: Value| spec_from_value(v).map_err(|e| ApiError::unprocessable(e.to_string()));
    let out = match edit {
        Edit::Frame { coordinate_system } => edit_frame(doc, cid, frame(&coordinate_system)?),
        Edit::Spec { path, value } => set_spec_field(doc, cid, &path, value),
        Edit::ReplaceSpec { data_specification } => revis_core::dsl::replace_spec(doc, cid, spec(data_specification)?),
        Edit::Description { text } => set_description(doc, cid, &text),
        Edit::Duplicate { coordinate_system } => {
            let f = match coordinate_system {
                Some(v) => frame(&v)?,
                None => node(cid)?.frame,
            };
            duplicate_container(doc, cid, f).map(|(d, _)| d)
        }
        Edit::Remove => remove_container(doc, cid),
        Edit::Add { node: n, data_specification } => {
            let parent = node(cid)?;
            let child = node_from_value(n, parent.frame.kind()).map_err(|e| ApiError::unprocessable(e.to_string()))?;
            let s = data_specification.map(spec).transpose()?;
            add_subcontainer(doc, cid, child, s)
        }
    };
    out.map_err(|e| match e {
        revis_core::error::EditError::NotFound(id) => ApiError::not_found("container", &id.to_string()),
        e => ApiError::unprocessable(e.to_string()),
    })
}

fn cid(s: &str) -> ApiResult<ContainerId> {
    ContainerId::parse(s).map_err(|e| ApiError::unprocessable(e.to_string()))
}

/// Rejects `next` when it has validation errors that `prev` did not have.
fn check_new_errors(prev: &DslDocument, next: &DslDocument) -> ApiResult<()> {
    let before = validate(prev);
    let known: BTreeSet<_> = before.errors().map(|i| (i.container.to_string(), i.rule, i.message.clone())).collect();
    let after = validate(next);
    let fresh: Vec<&Issue> = after.errors().filter(|i| !known.contains(&(i.container.to_string(), i.rule, i.message.clone()))).collect();
    if fresh.is_empty() {
        Ok(())
    } else {
        Err(ApiError::unprocessable("the edit leaves the document invalid").with_issues(&fresh))
    }
}

/// Validates, renders and stores a new state for session `id`. The session
/// is untouched unless every step succeeds.
async fn commit(app: &AppState, id: &str, change: impl FnOnce(&Session) -> ApiResult<(DslDocument, BTreeMap<String, String>)>) -> ApiResult<Json<Value>> {
    let h = session(app, id)?;
    let mut s = h.write().await;
    let (doc, data) = change(&s)?;
    check_new_errors(&s.doc, &doc)?;
    let mut next = s.clone();
    next.commit(doc, data, app.config.history_depth).map_err(ApiError::unprocessable)?;
    let opts = RenderOptions { seed: next.seed, ..RenderOptions::default() };
    let probe = next.clone();
    let svg = tokio::task::spawn_blocking(move || probe.render(&opts))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    app.store.persist(&next)?;
    *s = next;
    Ok(Json(json!({ "document": to_value(&s.doc), "report": validate(&s.doc), "svg": svg })))
}

async fn edit_container(State(app): AppRef, Path((id, c)): Path<(String, String)>, Json(edit): Json<Edit>) -> ApiResult<Json<Value>> {
    let c = cid(&c)?;
    let removing = matches!(edit, Edit::Remove);
    commit(&app, &id, |s| {
        let doc = apply_edit(&s.doc, &c, edit)?;
        let mut data = s.data_text().clone();
        if removing {
            // Tables of removed containers go with them.
            data.retain(|k, _| ContainerId::parse(k).is_ok_and(|k| !c.contains(&k)));
        }
        Ok((doc, data))
    })
    .await
}

async fn put_data(State(app): AppRef, Path((id, c)): Path<(String, String)>, body: String) -> ApiResult<Json<Value>> {
    let c = cid(&c)?;
    let table = UserTable::parse(&body).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    commit(&app, &id, |s| {
        if s.doc.find(&c).is_none() {
            return Err(ApiError::not_found("container", &c.to_string()));
        }
        // The structure follows the table, so its row count and grouping
        // become part of the document.
        let (doc, _) = revis_core::datagen::apply_user_data(&s.doc, &c, &table, s.seed)
            .map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let mut data = s.data_text().clone();
        data.insert(c.to_string(), body);
        Ok((doc, data))
    })
    .await
}

async fn delete_data(State(app): AppRef, Path((id, c)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    let c = cid(&c)?;
    commit(&app, &id, |s| {
        let mut data = s.data_text().clone();
        if data.remove(&c.to_string()).is_none() {
            return Err(ApiError::not_found("user table for", &c.to_string()));
        }
        Ok((s.doc.clone(), data))
    })
    .await
}

async fn undo(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = session(&app, &id)?;
    let mut s = h.write().await;
    let mut next = s.clone();
    if !next.undo() {
        return Err(ApiError::new(StatusCode::CONFLICT, "nothing to undo"));
    }
    app.store.persist(&next)?;
    *s = next;
    Ok(Json(session_json(&s)))
}

#[derive(Deserialize)]
struct RenderQuery {
    width: Option<f64>,
    height: Option<f64>,
    seed: Option<u64>,
}

async fn render(State(app): AppRef, Path(id): Path<String>, Query(q): Query<RenderQuery>) -> ApiResult<Response> {
    let h = session(&app, &id)?;
    let s = h.read().await.clone();
    let (width, height) = (q.width.unwrap_or(800.0), q.height.unwrap_or(600.0));
    let max = app.config.max_render_side;
    if !(width > 0.0 && height > 0.0 && width <= max && height <= max) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("canvas must be within 1..={max} pixels per side")));
    }
    let opts = RenderOptions { width, height, seed: q.seed.unwrap_or(s.seed), threads: 0 };
    let svg = tokio::task::spawn_blocking(move || s.render(&opts))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

/// Position of `frame` inside its parent, as fractions of the parent.
/// Cartesian boxes use a bottom-left origin; polar frames are already
/// relative.
fn relative_box(frame: &CoordinateFrame, parent: Option<&CoordinateFrame>) -> Value {
    match (frame, parent) {
        (CoordinateFrame::Cartesian(f), Some(CoordinateFrame::Cartesian(p))) => json!({
            "x": (f.x1 - p.x1) / p.width(),
            "y": (f.y1 - p.y1) / p.height(),
            "w": f.width() / p.width(),
            "h": f.height() / p.height(),
        }),
        (CoordinateFrame::Cartesian(_), _) => json!({ "x": 0.0, "y": 0.0, "w": 1.0, "h": 1.0 }),
        (CoordinateFrame::Polar(f), _) => json!({ "cx": f.cx, "cy": f.cy, "r1": f.r1, "r2": f.r2, "a1": f.a1, "a2": f.a2 }),
    }
}

fn tree_json(n: &ContainerNode, parent: Option<&CoordinateFrame>) -> Value {
    let raw = node_to_value(n);
    json!({
        "id": n.id,
        "kind": n.frame.kind(),
        "is_leaf": n.is_leaf,
        "is_template": n.is_template(),
        "mark_type": raw.get("mark_type"),
        "description": n.description,
        "coordinate_system": raw["coordinate_system"],
        "bbox": relative_box(&n.frame, parent),
        "children": n.children.iter().map(|c| tree_json(c, Some(&n.frame))).collect::<Vec<_>>(),
    })
}

async fn tree(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = session(&app, &id)?;
    let s = h.read().await;
    Ok(Json(tree_json(&s.doc.root, None)))
}
