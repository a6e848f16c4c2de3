//! HTTP/JSON service over projects stored as JSON files in a directory.
//!
//! Every mutating request carries the `revision` it was based on. A stale
//! revision gets 409; mutations to one project are serialized, reads see the
//! last committed revision without waiting.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::camera::{CameraState, Viewport};
use crate::data::{select_by_lasso, select_nearest, DataError, Feature};
use crate::geo::{GeoPoint, GeoPolygon};
use crate::shot::{DefaultShotTable, NarrativePurpose};
use crate::story::{
    compile_story, export_script, load_datasets, storyboard, DataRef, DesignSpec, LayoutName,
    ParamsOverride, SceneSpec, StateRef, Story, StoryDocument, StoryError, TargetSpec,
};
use crate::target::TargetKind;
use crate::timeline::MovementId;

/// Last successful compile of a project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CompileRecord {
    pub revision: u64,
    /// Hex SHA-256 of the canonical script bytes.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Project {
    pub id: String,
    pub revision: u64,
    pub story: StoryDocument,
    /// Dataset id → document text.
    #[serde(default)]
    pub datasets: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compiled: Option<CompileRecord>,
}

impl Project {
    pub fn new(id: String, story: StoryDocument) -> Self {
        Project { id, revision: 1, story, datasets: BTreeMap::new(), compiled: None }
    }

    /// Persisted bytes. Equal projects give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = serde_json::to_vec_pretty(self).expect("project serializes");
        b.push(b'\n');
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    fn has_all_datasets(&self) -> bool {
        self.story.data.iter().all(|d| self.datasets.contains_key(&d.id))
    }
}

/// Canonical script and storyboard for one revision.
#[derive(Debug, Clone)]
struct Artifacts {
    revision: u64,
    script: Arc<Vec<u8>>,
    digest: String,
    storyboard: Arc<String>,
}

struct Slot {
    write: tokio::sync::Mutex<()>,
    committed: RwLock<Arc<Project>>,
    artifacts: Mutex<Option<Artifacts>>,
}

impl Slot {
    fn new(p: Project) -> Arc<Self> {
        Arc::new(Slot {
            write: tokio::sync::Mutex::new(()),
            committed: RwLock::new(Arc::new(p)),
            artifacts: Mutex::new(None),
        })
    }

    fn current(&self) -> Arc<Project> {
        self.committed.read().expect("lock poisoned").clone()
    }
}

pub struct AppState {
    dir: PathBuf,
    table: DefaultShotTable,
    projects: RwLock<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    /// Loads every `*.json` project in `dir`, creating the directory if
    /// needed.
    pub fn open(dir: &Path, table: DefaultShotTable) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut projects = HashMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let bytes = std::fs::read(&path)?;
            let p = Project::from_bytes(&bytes).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
            })?;
            projects.insert(p.id.clone(), Slot::new(p));
        }
        Ok(AppState { dir: dir.to_path_buf(), table, projects: RwLock::new(projects) })
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.projects
            .read()
            .expect("lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown project '{id}'")))
    }

    fn persist(&self, p: &Project) -> Result<(), ApiError> {
        let path = self.dir.join(format!("{}.json", p.id));
        let tmp = self.dir.join(format!(".{}.json.tmp", p.id));
        std::fs::write(&tmp, p.to_bytes())
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("saving project: {e}")))
    }

    /// Applies `f` to a copy of the project if `base` is current, checks the
    /// result, bumps the revision and commits.
    async fn mutate<F>(&self, id: &str, base: u64, f: F) -> Result<Arc<Project>, ApiError>
    where
        F: FnOnce(&mut Project) -> Result<(), ApiError>,
    {
        let slot = self.slot(id)?;
        let _guard = slot.write.lock().await;
        let cur = slot.current();
        if cur.revision != base {
            return Err(ApiError::stale(base, cur.revision));
        }
        let mut next = (*cur).clone();
        f(&mut next)?;
        self.check(&next)?;
        next.revision += 1;
        self.persist(&next)?;
        let next = Arc::new(next);
        *slot.committed.write().expect("lock poisoned") = next.clone();
        Ok(next)
    }

    /// Schema check always; full compile once every dataset is present.
    fn check(&self, p: &Project) -> Result<(), ApiError> {
        let story = Story::from_document(p.story.clone()).map_err(ApiError::story)?;
        if p.has_all_datasets() {
            compile_story(&story, &p.datasets, &self.table).map_err(ApiError::story)?;
        }
        Ok(())
    }

    fn artifacts(&self, slot: &Slot, p: &Project) -> Result<Artifacts, ApiError> {
        if let Some(a) = slot.artifacts.lock().expect("lock poisoned").as_ref() {
            if a.revision == p.revision {
                return Ok(a.clone());
            }
        }
        let story = Story::from_document(p.story.clone()).map_err(ApiError::story)?;
        let (resolved, compiled) = compile_story(&story, &p.datasets, &self.table).map_err(ApiError::story)?;
        let script = export_script(&compiled.script);
        let a = Artifacts {
            revision: p.revision,
            digest: hex::encode(Sha256::digest(&script)),
            script: Arc::new(script),
            storyboard: Arc::new(storyboard(&resolved, &compiled)),
        };
        let mut cache = slot.artifacts.lock().expect("lock poisoned");
        if cache.as_ref().is_none_or(|c| c.revision < a.revision) {
            *cache = Some(a.clone());
        }
        Ok(a)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    violations: Vec<String>,
    revision: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), violations: Vec::new(), revision: None }
    }

    fn bad(message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError { violations: vec![message.clone()], ..Self::new(StatusCode::BAD_REQUEST, message) }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn stale(base: u64, current: u64) -> Self {
        ApiError {
            revision: Some(current),
            ..Self::new(StatusCode::CONFLICT, format!("stale revision {base}; current is {current}"))
        }
    }

    fn story(e: StoryError) -> Self {
        match e {
            StoryError::Timeline(crate::timeline::TimelineError::Invalid(vs)) => ApiError {
                violations: vs.iter().map(ToString::to_string).collect(),
                ..Self::new(StatusCode::BAD_REQUEST, "timeline violations")
            },
            other => Self::bad(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message, "violations": self.violations });
        if let Some(r) = self.revision {
            body["revision"] = json!(r);
        }
        (self.status, Json(body)).into_response()
    }
}

/// JSON body extractor whose rejections use the service's error shape.
pub struct Body<T>(T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, ApiError> {
        let bytes = axum::body::Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::bad(e.to_string()))?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        serde_path_to_error::deserialize(de).map(Body).map_err(|e| {
            let path = e.path().to_string();
            ApiError::bad(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
        })
    }
}

type Shared = Arc<AppState>;

fn with_revision(p: &Project, mut body: Value) -> Response {
    body["revision"] = json!(p.revision);
    let mut r = Json(body).into_response();
    r.headers_mut().insert("x-revision", HeaderValue::from(p.revision));
    r
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/defaults", get(defaults))
        .route("/projects", post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/story", put(put_story))
        .route("/projects/{id}/datasets/{dataset}", put(put_dataset))
        .route("/projects/{id}/targets/lasso", post(lasso))
        .route("/projects/{id}/targets/pick", post(pick))
        .route("/projects/{id}/movements", post(append_movement))
        .route("/projects/{id}/movements/{mid}", patch(patch_movement))
        .route("/projects/{id}/snapshots", post(save_snapshot))
        .route("/projects/{id}/snapshots/{name}/reset", post(reset_snapshot))
        .route("/projects/{id}/compile", post(compile_project))
        .route("/projects/{id}/script", get(get_script))
        .route("/projects/{id}/storyboard.svg", get(get_storyboard))
        .with_state(state)
}

/// Binds `0.0.0.0:port` and serves until the process ends.
pub async fn serve(port: u16, dir: &Path, table: DefaultShotTable) -> io::Result<()> {
    let state = Arc::new(AppState::open(dir, table)?);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct DefaultsQuery {
    purpose: String,
    target_kind: String,
}

async fn defaults(State(s): State<Shared>, Query(q): Query<DefaultsQuery>) -> Result<Response, ApiError> {
    let purpose: NarrativePurpose = q.purpose.parse().map_err(ApiError::bad)?;
    let kind = TargetKind::parse(&q.target_kind)
        .ok_or_else(|| ApiError::bad(format!("unknown target kind '{}'", q.target_kind)))?;
    let (shot, params) = s.table.lookup(purpose, kind).map_err(|e| ApiError::bad(e.to_string()))?;
    Ok(Json(json!({ "purpose": purpose, "targetKind": kind, "shot": shot, "params": params })).into_response())
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    story: Option<StoryDocument>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

async fn create_project(State(s): State<Shared>, Body(b): Body<CreateBody>) -> Result<Response, ApiError> {
    let story = b.story.unwrap_or_default();
    Story::from_document(story.clone()).map_err(ApiError::story)?;
    let p = {
        let mut projects = s.projects.write().expect("lock poisoned");
        let id = match b.id {
            Some(id) if !valid_id(&id) => return Err(ApiError::bad(format!("invalid project id '{id}'"))),
            Some(id) if projects.contains_key(&id) => {
                return Err(ApiError::new(StatusCode::CONFLICT, format!("project '{id}' exists")))
            }
            Some(id) => id,
            None => (1..).map(|n| format!("p{n}")).find(|id| !projects.contains_key(id)).expect("unbounded"),
        };
        let p = Project::new(id.clone(), story);
        projects.insert(id, Slot::new(p.clone()));
        p
    };
    s.persist(&p)?;
    let mut r = with_revision(&p, json!({ "id": p.id }));
    *r.status_mut() = StatusCode::CREATED;
    Ok(r)
}

async fn get_project(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let p = s.slot(&id)?.current();
    Ok(with_revision(&p, serde_json::to_value(&*p).expect("project serializes")))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct StoryBody {
    revision: u64,
    story: StoryDocument,
}

async fn put_story(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Body(b): Body<StoryBody>,
) -> Result<Response, ApiError> {
    let p = s
        .mutate(&id, b.revision, |p| {
            p.story = b.story;
            Ok(())
        })
        .await?;
    Ok(with_revision(&p, json!({})))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DatasetBody {
    revision: u64,
    text: String,
}

async fn put_dataset(
    State(s): State<Shared>,
    UrlPath((id, dataset)): UrlPath<(String, String)>,
    Body(b): Body<DatasetBody>,
) -> Result<Response, ApiError> {
    if !valid_id(&dataset) {
        return Err(ApiError::bad(format!("invalid dataset id '{dataset}'")));
    }
    let p = s
        .mutate(&id, b.revision, |p| {
            if !p.story.data.iter().any(|d| d.id == dataset) {
                p.story.data.push(DataRef { id: dataset.clone(), path: None, format: None, csv: None });
            }
            p.datasets.insert(dataset.clone(), b.text);
            let story = Story::from_document(p.story.clone()).map_err(ApiError::story)?;
            let mut one = BTreeMap::new();
            one.insert(dataset.clone(), p.datasets[&dataset].clone());
            let only = Story { document: StoryDocument { data: story.document.data.iter().filter(|d| d.id == dataset).cloned().collect(), ..Default::default() }, ..story };
            load_datasets(&only, &one).map_err(ApiError::story)?;
            Ok(())
        })
        .await?;
    Ok(with_revision(&p, json!({ "dataset": dataset })))
}

fn features_of(p: &Project, dataset: &Option<String>) -> Result<Vec<Feature>, ApiError> {
    let story = Story::from_document(p.story.clone()).map_err(ApiError::story)?;
    let loaded = load_datasets(&story, &p.datasets).map_err(ApiError::story)?;
    match dataset {
        Some(d) => loaded.get(d).cloned().ok_or_else(|| ApiError::not_found(format!("unknown dataset '{d}'"))),
        None => Ok(story.document.data.iter().flat_map(|d| loaded[&d.id].clone()).collect()),
    }
}

fn geo_points(ring: &[[f64; 2]]) -> Result<Vec<GeoPoint>, ApiError> {
    ring.iter()
        .map(|c| GeoPoint::new(c[0], c[1]).map_err(|e| ApiError::bad(e.to_string())))
        .collect()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct LassoBody {
    ring: Vec<[f64; 2]>,
    #[serde(default)]
    dataset: Option<String>,
}

async fn lasso(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Body(b): Body<LassoBody>,
) -> Result<Response, ApiError> {
    let p = s.slot(&id)?.current();
    let poly = GeoPolygon::new(geo_points(&b.ring)?).map_err(|e| ApiError::bad(e.to_string()))?;
    let features = features_of(&p, &b.dataset)?;
    let target = select_by_lasso(&features, &poly);
    let spec = TargetSpec { lasso: Some(b.ring), dataset: b.dataset, ..Default::default() };
    Ok(with_revision(
        &p,
        json!({ "kind": target.kind(), "label": target.label(), "target": target, "spec": spec }),
    ))
}

fn default_radius() -> f64 {
    10.0
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PickBody {
    point: [f64; 2],
    state: CameraState,
    viewport: Viewport,
    #[serde(default = "default_radius")]
    radius_px: f64,
    #[serde(default)]
    dataset: Option<String>,
}

async fn pick(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Body(b): Body<PickBody>,
) -> Result<Response, ApiError> {
    let p = s.slot(&id)?.current();
    let point = geo_points(&[b.point])?[0];
    let story = Story::from_document(p.story.clone()).map_err(ApiError::story)?;
    let loaded = load_datasets(&story, &p.datasets).map_err(ApiError::story)?;
    let ids: Vec<&String> = match &b.dataset {
        Some(d) if loaded.contains_key(d) => vec![d],
        Some(d) => return Err(ApiError::not_found(format!("unknown dataset '{d}'"))),
        None => story.document.data.iter().map(|d| &d.id).collect(),
    };
    // Nearest across datasets; the first dataset wins a tie.
    let mut best = None;
    for ds in ids {
        let fs = &loaded[ds];
        match select_nearest(fs, point, b.radius_px, &b.state, b.viewport) {
            Ok(t) => {
                let f = fs.iter().find(|f| f.target() == t).expect("target came from this dataset");
                let d = screen_gap(f, point, &b.state, b.viewport);
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                    best = Some((d, ds.clone(), f.clone()));
                }
            }
            Err(DataError::NothingAtPoint) => {}
            Err(e) => return Err(ApiError::bad(e.to_string())),
        }
    }
    let (_, dataset, f) = best.ok_or_else(|| ApiError::not_found(DataError::NothingAtPoint.to_string()))?;
    let target = f.target();
    let spec = TargetSpec { feature_id: Some(f.id.clone()), dataset: Some(dataset), ..Default::default() };
    Ok(with_revision(
        &p,
        json!({ "kind": target.kind(), "label": target.label(), "target": target, "spec": spec }),
    ))
}

/// Distance used only to rank picks across datasets.
fn screen_gap(f: &Feature, point: GeoPoint, state: &CameraState, vp: Viewport) -> f64 {
    let proj = crate::camera::ScreenProjector::new(state, vp);
    let Some(c) = proj.to_screen(crate::geo::project(point)) else { return f64::INFINITY };
    f.geometry
        .vertices()
        .into_iter()
        .filter_map(|v| proj.to_screen(crate::geo::project(v)))
        .map(|s| (s.0 - c.0).hypot(s.1 - c.1))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AppendBody {
    revision: u64,
    design: DesignSpec,
    #[serde(default)]
    second: Option<DesignSpec>,
    #[serde(default)]
    layout: LayoutName,
    #[serde(default)]
    inset: Option<f64>,
    #[serde(default)]
    pause: Option<f64>,
}

async fn append_movement(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Body(b): Body<AppendBody>,
) -> Result<Response, ApiError> {
    let mut mid = 0;
    let p = s
        .mutate(&id, b.revision, |p| {
            let designs = std::iter::once(b.design).chain(b.second).collect();
            p.story.scenes.push(SceneSpec { id: None, layout: b.layout, inset: b.inset, pause: b.pause, designs });
            mid = p.story.scenes.len() as u64;
            Ok(())
        })
        .await?;
    let mut r = with_revision(&p, json!({ "id": MovementId(mid) }));
    *r.status_mut() = StatusCode::CREATED;
    Ok(r)
}

/// Twin-canvas edit of one movement: any subset of the fields.
#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PatchBody {
    revision: u64,
    #[serde(default)]
    duration: Option<f64>,
    #[serde(default)]
    params: Option<ParamsOverride>,
    #[serde(default)]
    initial: Option<StateRef>,
    #[serde(default, rename = "final")]
    final_state: Option<StateRef>,
    #[serde(default)]
    annotation: Option<String>,
}

async fn patch_movement(
    State(s): State<Shared>,
    UrlPath((id, mid)): UrlPath<(String, String)>,
    Body(b): Body<PatchBody>,
) -> Result<Response, ApiError> {
    let MovementId(k) = mid.parse().map_err(|_| ApiError::not_found(format!("unknown movement '{mid}'")))?;
    if let Some(d) = b.duration {
        if !d.is_finite() || d <= 0.0 {
            return Err(ApiError::bad(format!("duration must be positive, got {d}")));
        }
    }
    let p = s
        .mutate(&id, b.revision, |p| {
            let scene = (k as usize)
                .checked_sub(1)
                .and_then(|i| p.story.scenes.get_mut(i))
                .ok_or_else(|| ApiError::not_found(format!("unknown movement '{mid}'")))?;
            let d = &mut scene.designs[0];
            if let Some(v) = b.duration {
                d.duration = Some(v);
            }
            if let Some(o) = b.params {
                d.params = merge(d.params, o);
            }
            if b.initial.is_some() {
                d.initial = b.initial;
            }
            if b.final_state.is_some() {
                d.final_state = b.final_state;
            }
            if b.annotation.is_some() {
                d.annotation = b.annotation;
            }
            Ok(())
        })
        .await?;
    Ok(with_revision(&p, json!({ "id": mid })))
}

fn merge(a: ParamsOverride, b: ParamsOverride) -> ParamsOverride {
    ParamsOverride {
        intensity: b.intensity.or(a.intensity),
        duration: b.duration.or(a.duration),
        margin_frac: b.margin_frac.or(a.margin_frac),
        sweep: b.sweep.or(a.sweep),
        direction: b.direction.or(a.direction),
        align_bearing_to_path: b.align_bearing_to_path.or(a.align_bearing_to_path),
        hold: b.hold.or(a.hold),
        easing: b.easing.or(a.easing),
        window_meters: b.window_meters.or(a.window_meters),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SnapshotBody {
    revision: u64,
    name: String,
    state: CameraState,
}

async fn save_snapshot(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Body(b): Body<SnapshotBody>,
) -> Result<Response, ApiError> {
    if b.name.is_empty() {
        return Err(ApiError::bad("snapshot name must not be empty"));
    }
    let name = b.name.clone();
    let p = s
        .mutate(&id, b.revision, |p| {
            p.story.snapshots.insert(b.name, b.state);
            Ok(())
        })
        .await?;
    Ok(with_revision(&p, json!({ "name": name })))
}

/// Returns the saved state; the project itself is unchanged.
async fn reset_snapshot(
    State(s): State<Shared>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    let p = s.slot(&id)?.current();
    let state = p
        .story
        .snapshots
        .get(&name)
        .ok_or_else(|| ApiError::not_found(format!("unknown snapshot '{name}'")))?;
    Ok(with_revision(&p, json!({ "name": name, "state": state })))
}

async fn compile_project(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = s.slot(&id)?;
    let _guard = slot.write.lock().await;
    let p = slot.current();
    let a = s.artifacts(&slot, &p)?;
    let record = CompileRecord { revision: p.revision, digest: a.digest.clone() };
    if p.compiled.as_ref() != Some(&record) {
        let mut next = (*p).clone();
        next.compiled = Some(record);
        s.persist(&next)?;
        *slot.committed.write().expect("lock poisoned") = Arc::new(next);
    }
    let script: Value = serde_json::from_slice(&a.script).expect("canonical script is JSON");
    Ok(with_revision(
        &p,
        json!({ "digest": a.digest, "duration": script["duration"], "movements": script["movements"] }),
    ))
}

fn artifact_response(p: &Project, a: &Artifacts, content_type: &'static str, body: Vec<u8>) -> Response {
    let mut r = body.into_response();
    let h = r.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    h.insert("x-revision", HeaderValue::from(p.revision));
    h.insert("x-digest", HeaderValue::from_str(&a.digest).expect("hex is ASCII"));
    r
}

async fn get_script(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = s.slot(&id)?;
    let p = slot.current();
    let a = s.artifacts(&slot, &p)?;
    Ok(artifact_response(&p, &a, "application/json", a.script.to_vec()))
}

async fn get_storyboard(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = s.slot(&id)?;
    let p = slot.current();
    let a = s.artifacts(&slot, &p)?;
    Ok(artifact_response(&p, &a, "image/svg+xml", a.storyboard.as_bytes().to_vec()))
}
