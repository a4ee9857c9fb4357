//! HTTP API over the story engine: datasets, generation, editing, rendering
//! and share links, persisted under one data directory.

pub mod error;
pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use factweaver::document::{self, GenerationParams, RenderMode, StoryDocument};
use factweaver::logic::CorrelationCausality;
use factweaver::reward::RewardWeights;
use factweaver::search::{self, Goal, SearchConfig};
use factweaver::table::{load_csv, CsvOptions};
use factweaver::visualize::ChartType;
use factweaver::{DataTable, FactRecord};

pub use error::{ApiError, ErrorBody};
pub use store::{DatasetHandle, FieldSummary, ShareSnapshot, Store};

pub const MAX_UPLOAD_BYTES: usize = 50 * 1024 * 1024;
pub const WEIGHT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_TIME_LIMIT_MS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub max_upload_bytes: usize,
    /// Prefix for share URLs, e.g. "https://stories.example.org".
    pub public_base_url: String,
    pub search: SearchConfig,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            max_upload_bytes: MAX_UPLOAD_BYTES,
            public_base_url: String::new(),
            search: SearchConfig::default(),
        }
    }
}

pub struct AppState {
    config: ServiceConfig,
    store: Store,
    tables: Mutex<HashMap<String, Arc<DataTable>>>,
    story_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    jobs: Mutex<HashMap<String, Arc<AtomicBool>>>,
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

impl AppState {
    fn table(&self, dataset_id: &str) -> ApiResult<Arc<DataTable>> {
        if let Some(t) = self.tables.lock().unwrap().get(dataset_id) {
            return Ok(t.clone());
        }
        let bytes = self
            .store
            .dataset_csv(dataset_id)?
            .ok_or_else(|| ApiError::not_found("dataset", dataset_id))?;
        let table = Arc::new(load_csv(&bytes, &CsvOptions::default())?);
        self.tables.lock().unwrap().insert(dataset_id.to_string(), table.clone());
        Ok(table)
    }

    fn story(&self, id: &str) -> ApiResult<StoryDocument> {
        self.store.story(id)?.ok_or_else(|| ApiError::not_found("story", id))
    }

    fn story_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.story_locks.lock().unwrap().entry(id.to_string()).or_default().clone()
    }
}

pub fn router(config: ServiceConfig) -> std::io::Result<Router> {
    let store = Store::open(&config.data_dir)?;
    let limit = config.max_upload_bytes;
    let state = Arc::new(AppState {
        config,
        store,
        tables: Mutex::new(HashMap::new()),
        story_locks: Mutex::new(HashMap::new()),
        jobs: Mutex::new(HashMap::new()),
    });
    Ok(Router::new()
        .route("/datasets", post(create_dataset))
        .route("/datasets/{id}", get(get_dataset))
        .route("/datasets/{id}/stories", post(generate))
        .route("/jobs/{id}", delete(cancel_job))
        .route("/stories/{id}", get(get_story).patch(edit_fact))
        .route("/stories/{id}/facts", post(add_fact))
        .route("/stories/{id}/facts/{index}", delete(remove_fact))
        .route("/stories/{id}/order", post(reorder))
        .route("/stories/{id}/render", get(render))
        .route("/stories/{id}/share", post(share))
        .route("/shared/{token}", get(shared))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state))
}

pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let app = router(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app).await
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::new(e.status(), "bad_request", e.body_text()))
}

fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

async fn create_dataset(State(st): State<Shared>, body: Result<Bytes, BytesRejection>) -> ApiResult<Response> {
    let too_large = || {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("uploads are limited to {} bytes", st.config.max_upload_bytes),
        )
    };
    let bytes = match body {
        Ok(b) if b.len() > st.config.max_upload_bytes => return Err(too_large()),
        Ok(b) => b,
        Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => return Err(too_large()),
        Err(e) => return Err(ApiError::bad_request(e.body_text())),
    };
    let table = load_csv(&bytes, &CsvOptions::default())?;
    let handle = DatasetHandle {
        id: new_id(),
        schema: table.schema().iter().map(FieldSummary::from).collect(),
        row_count: table.row_count(),
        created_at: chrono::Utc::now().to_rfc3339(),
    };
    st.store.put_dataset(&handle, &bytes)?;
    st.tables.lock().unwrap().insert(handle.id.clone(), Arc::new(table));
    Ok((StatusCode::CREATED, Json(handle)).into_response())
}

async fn get_dataset(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<DatasetHandle>> {
    st.store
        .dataset(&id)?
        .map(Json)
        .ok_or_else(|| ApiError::not_found("dataset", &id))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateRequest {
    pub length: Option<usize>,
    pub weights: Option<RewardWeights>,
    pub chart_diversity: f64,
    pub time_limit_ms: Option<u64>,
    pub iterations: Option<usize>,
    pub seed: u64,
    pub min_information_bits: Option<f64>,
    /// Client-chosen id under which the job can be cancelled.
    pub job_id: Option<String>,
}

pub const DEFAULT_LENGTH: usize = 6;

async fn generate(
    State(st): State<Shared>,
    Path(dataset_id): Path<String>,
    body: Result<Json<GenerateRequest>, JsonRejection>,
) -> ApiResult<Json<StoryDocument>> {
    let req = json_body(body)?;
    let table = st.table(&dataset_id)?;
    let w = req.weights.unwrap_or_default();
    let (weights, _) = RewardWeights::renormalized(w.diversity, w.logicality, w.integrity, WEIGHT_TOLERANCE)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    if !(0.0..=1.0).contains(&req.chart_diversity) {
        return Err(ApiError::bad_request("chart_diversity must lie in [0, 1]"));
    }
    let goal = Goal {
        max_length: req.length.unwrap_or(DEFAULT_LENGTH),
        min_information_bits: req.min_information_bits,
        iteration_budget: req.iterations,
        time_budget_ms: match (req.iterations, req.time_limit_ms) {
            (None, None) => Some(DEFAULT_TIME_LIMIT_MS),
            (_, t) => t,
        },
    };
    goal.validate()?;

    let cancel = Arc::new(AtomicBool::new(false));
    if let Some(job) = &req.job_id {
        st.jobs.lock().unwrap().insert(job.clone(), cancel.clone());
    }
    let config = st.config.search.clone();
    let seed = req.seed;
    let (t, g, flag) = (table.clone(), goal.clone(), cancel.clone());
    let outcome = tokio::task::spawn_blocking(move || {
        search::run_search(&t, &g, &weights, &config, seed, &CorrelationCausality::default(), Some(&flag))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()));
    if let Some(job) = &req.job_id {
        st.jobs.lock().unwrap().remove(job);
    }
    let outcome = outcome??;
    tracing::info!(dataset = %dataset_id, reward = outcome.story.reward, "story generated");
    let params = GenerationParams {
        goal,
        weights,
        chart_diversity: req.chart_diversity,
        seed,
    };
    let doc = StoryDocument::from_story(new_id(), &dataset_id, &outcome.story, params, &table)?;
    st.store.put_story(&doc)?;
    Ok(Json(doc))
}

async fn cancel_job(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    match st.jobs.lock().unwrap().get(&id) {
        Some(flag) => {
            flag.store(true, Ordering::Relaxed);
            Ok(StatusCode::NO_CONTENT)
        }
        None => Err(ApiError::not_found("job", &id)),
    }
}

async fn get_story(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<StoryDocument>> {
    st.story(&id).map(Json)
}

/// Load, check the revision, apply and persist under the story's lock.
async fn mutate(
    st: &AppState,
    id: &str,
    revision: Option<u64>,
    apply: impl FnOnce(&mut StoryDocument, &DataTable) -> ApiResult<()>,
) -> ApiResult<Json<StoryDocument>> {
    let lock = st.story_lock(id);
    let _guard = lock.lock().await;
    let mut doc = st.story(id)?;
    if let Some(r) = revision {
        if r != doc.revision {
            return Err(ApiError::conflict(
                "stale_revision",
                format!("story is at revision {}, request was based on {r}", doc.revision),
            ));
        }
    }
    let table = st.table(&doc.dataset_id)?;
    apply(&mut doc, &table)?;
    st.store.put_story(&doc)?;
    Ok(Json(doc))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EditRequest {
    #[serde(default)]
    pub revision: Option<u64>,
    pub index: usize,
    pub fact: FactRecord,
    #[serde(default)]
    pub chart: Option<ChartType>,
}

async fn edit_fact(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<EditRequest>, JsonRejection>,
) -> ApiResult<Json<StoryDocument>> {
    let req = json_body(body)?;
    mutate(&st, &id, req.revision, |doc, t| {
        Ok(doc.edit_fact(req.index, &req.fact, req.chart, t)?)
    })
    .await
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AddRequest {
    #[serde(default)]
    pub revision: Option<u64>,
    pub fact: FactRecord,
    #[serde(default)]
    pub position: Option<usize>,
    #[serde(default)]
    pub chart: Option<ChartType>,
}

async fn add_fact(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<AddRequest>, JsonRejection>,
) -> ApiResult<Json<StoryDocument>> {
    let req = json_body(body)?;
    mutate(&st, &id, req.revision, |doc, t| {
        Ok(doc.add_fact(&req.fact, req.position, req.chart, t)?)
    })
    .await
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct RevisionQuery {
    pub revision: Option<u64>,
}

async fn remove_fact(
    State(st): State<Shared>,
    Path((id, index)): Path<(String, usize)>,
    Query(q): Query<RevisionQuery>,
) -> ApiResult<Json<StoryDocument>> {
    mutate(&st, &id, q.revision, |doc, t| Ok(doc.remove_fact(index, t)?)).await
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderRequest {
    #[serde(default)]
    pub revision: Option<u64>,
    pub order: Vec<usize>,
}

async fn reorder(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<OrderRequest>, JsonRejection>,
) -> ApiResult<Json<StoryDocument>> {
    let req = json_body(body)?;
    mutate(&st, &id, req.revision, |doc, t| Ok(doc.reorder(&req.order, t)?)).await
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ModeQuery {
    pub mode: Option<String>,
}

fn parse_mode(mode: Option<&str>) -> ApiResult<RenderMode> {
    let m = mode.unwrap_or("storyline");
    RenderMode::parse(m).ok_or_else(|| ApiError::bad_request(format!("unknown mode '{m}'")))
}

fn rendered(doc: &StoryDocument, mode: RenderMode) -> ApiResult<Response> {
    let body = document::render(doc, mode).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, mode.content_type())], body).into_response())
}

async fn render(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<ModeQuery>,
) -> ApiResult<Response> {
    let mode = parse_mode(q.mode.as_deref())?;
    rendered(&st.story(&id)?, mode)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ShareRequest {
    #[serde(default)]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareLink {
    pub token: String,
    pub url: String,
    pub embed: String,
    pub revision: u64,
}

/// Token for a (story, revision, mode) snapshot.
pub fn share_token(story_id: &str, revision: u64, mode: RenderMode) -> String {
    let digest = Sha256::digest(format!("{story_id}:{revision}:{mode:?}").as_bytes());
    digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

async fn share(
    State(st): State<Shared>,
    Path(id): Path<String>,
    body: Option<Json<ShareRequest>>,
) -> ApiResult<Json<ShareLink>> {
    let mode = parse_mode(body.and_then(|Json(b)| b.mode).as_deref())?;
    let doc = st.story(&id)?;
    let token = share_token(&doc.id, doc.revision, mode);
    st.store.put_share(&ShareSnapshot {
        token: token.clone(),
        mode,
        document: doc.clone(),
    })?;
    let url = format!("{}/shared/{token}", st.config.public_base_url);
    let (w, h) = (document::PANEL.width, document::PANEL.height);
    Ok(Json(ShareLink {
        embed: format!(r#"<iframe src="{url}" width="{w:.0}" height="{h:.0}" style="border:0" loading="lazy"></iframe>"#),
        url,
        token,
        revision: doc.revision,
    }))
}

async fn shared(State(st): State<Shared>, Path(token): Path<String>) -> ApiResult<Response> {
    let snap = st
        .store
        .share(&token)?
        .ok_or_else(|| ApiError::not_found("share", &token))?;
    rendered(&snap.document, snap.mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_stable_per_revision() {
        let a = share_token("s", 1, RenderMode::Factsheet);
        assert_eq!(a, share_token("s", 1, RenderMode::Factsheet));
        assert_ne!(a, share_token("s", 2, RenderMode::Factsheet));
        assert_ne!(a, share_token("s", 1, RenderMode::Swiper));
        assert_eq!(a.len(), 32);
    }

    #[test]
    fn modes() {
        assert_eq!(parse_mode(None).unwrap(), RenderMode::Storyline);
        assert_eq!(parse_mode(Some("swiper")).unwrap(), RenderMode::Swiper);
        assert_eq!(parse_mode(Some("poster")).unwrap_err().status, StatusCode::BAD_REQUEST);
    }
}
