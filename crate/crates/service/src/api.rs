//! The HTTP/JSON API.
//!
//! Every mutating call names a session; each session owns a private copy of
//! the base knowledge base, created on first use. Calls without a session work
//! on the base and may not mutate it. Generated documents are stored under an
//! id derived from plan, mode and digest, so repeating a request returns the
//! same id.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Query as UrlQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use techdoc_core::emit::{AnnotatedDocument, Format, Span};
use techdoc_core::interact::{self, MenuContext, MenuOption, QueryError};
use techdoc_core::kb::{Assertion, Kb, KbDocument, KbError, StateDelta};
use techdoc_core::pipeline::{generate, Generation, GenerationRequest, Mode, PipelineError};
use techdoc_core::plan::{applicable_plans, has_errors, validate, Diagnostic, Plan, PlanError};
use techdoc_core::realize::{Language, Resources};
use techdoc_core::simulate::{simulate, simulate_live, Trace};
use tower_http::services::ServeDir;

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Conflict(Vec<Diagnostic>),
    Unprocessable(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            ApiError::Conflict(d) => {
                (StatusCode::CONFLICT, json!({ "error": "draft plan fails validation", "diagnostics": d }))
            }
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": m })),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        match e {
            KbError::UnknownConcept(_) | KbError::UnknownInstance(_) | KbError::UnknownPlan(_) | KbError::UnknownRole(_) => {
                ApiError::NotFound(e.to_string())
            }
            _ => ApiError::BadRequest(e.to_string()),
        }
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Kb(k) => k.into(),
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::UnknownPlan(_) => ApiError::NotFound(e.to_string()),
            PipelineError::UnknownMode(_) | PipelineError::NoLanguages => ApiError::BadRequest(e.to_string()),
            PipelineError::Plan(p) => p.into(),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::NotAPronoun(_) | QueryError::NoAntecedent(_) => ApiError::Unprocessable(e.to_string()),
            _ => ApiError::NotFound(e.to_string()),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub struct AppState {
    base: Arc<RwLock<Kb>>,
    resources: &'static Resources,
    sessions: Mutex<BTreeMap<String, Arc<RwLock<Kb>>>>,
    documents: Mutex<BTreeMap<String, Arc<Generation>>>,
    /// Where saved session workspaces are written, if anywhere.
    workspace_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(kb: Kb, resources: &'static Resources) -> Self {
        AppState {
            base: Arc::new(RwLock::new(kb)),
            resources,
            sessions: Mutex::default(),
            documents: Mutex::default(),
            workspace_dir: None,
        }
    }

    pub fn with_workspace_dir(mut self, dir: PathBuf) -> Self {
        self.workspace_dir = Some(dir);
        self
    }

    /// The knowledge base a request works on. Sessions are created on demand
    /// as copies of the base.
    fn workspace(&self, session: Option<&str>) -> Arc<RwLock<Kb>> {
        match session {
            None => self.base.clone(),
            Some(s) => {
                let mut sessions = self.sessions.lock().unwrap();
                sessions
                    .entry(s.to_string())
                    .or_insert_with(|| Arc::new(RwLock::new(self.base.read().unwrap().clone())))
                    .clone()
            }
        }
    }

    fn session(&self, session: Option<&str>) -> Result<Arc<RwLock<Kb>>, ApiError> {
        match session {
            Some(_) => Ok(self.workspace(session)),
            None => Err(ApiError::BadRequest("this call changes the knowledge base and needs a session".into())),
        }
    }

    fn document(&self, id: &str) -> Result<Arc<Generation>, ApiError> {
        self.documents.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("unknown document `{id}`")))
    }

    /// Stores a generation, merging languages into an earlier one with the same id.
    fn store(&self, id: &str, generation: Generation) -> Arc<Generation> {
        let mut docs = self.documents.lock().unwrap();
        let merged = match docs.get(id) {
            Some(old) => {
                let mut g = (**old).clone();
                for (l, d) in generation.documents {
                    g.documents.entry(l).or_insert(d);
                }
                g
            }
            None => generation,
        };
        let arc = Arc::new(merged);
        docs.insert(id.to_string(), arc.clone());
        arc
    }
}

pub fn document_id(plan: &str, mode: Mode, digest: &str) -> String {
    let mode = serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    format!("{plan}.{mode}.{}", &digest[..digest.len().min(16)])
}

pub fn router(state: Arc<AppState>, assets: PathBuf) -> Router {
    Router::new()
        .route("/plans", get(plans))
        .route("/menu", get(menu))
        .route("/draft-plan", post(draft_plan))
        .route("/generate", post(generate_docs))
        .route("/simulate", post(simulate_plan))
        .route("/tell", post(tell))
        .route("/save", post(save))
        .route("/documents/{id}", get(get_document))
        .route("/query/antecedent", get(query_antecedent))
        .route("/query/align", get(query_align))
        .route("/query/location", get(query_location))
        .nest_service("/assets", ServeDir::new(assets))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
pub struct SessionParam {
    pub session: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct PlansParams {
    pub device: Option<String>,
    pub session: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct PlanSummary {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
}

async fn plans(State(st): State<Arc<AppState>>, UrlQuery(p): UrlQuery<PlansParams>) -> ApiResult<Vec<PlanSummary>> {
    let ws = st.workspace(p.session.as_deref());
    let kb = ws.read().unwrap();
    let ids: Vec<String> = match &p.device {
        Some(d) => applicable_plans(&kb, d)?,
        None => kb.plans().map(|p| p.id.clone()).collect(),
    };
    let out = ids
        .into_iter()
        .filter_map(|id| kb.plan(&id).ok())
        .map(|plan| PlanSummary {
            id: plan.id.clone(),
            device: plan.target_device.clone(),
            process: plan.title.as_ref().map(|t| t.process.clone()),
        })
        .collect();
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
pub struct MenuParams {
    pub context: String,
    pub device: Option<String>,
    pub process: Option<String>,
    pub role: Option<String>,
    pub session: Option<String>,
}

impl MenuParams {
    fn context(&self) -> Result<MenuContext, ApiError> {
        let need = |v: &Option<String>, name: &str| {
            v.clone().ok_or_else(|| ApiError::BadRequest(format!("context `{}` needs `{name}`", self.context)))
        };
        match self.context.as_str() {
            "device" => Ok(MenuContext::Device { device: need(&self.device, "device")? }),
            "process" => Ok(MenuContext::Process),
            "participant" => {
                Ok(MenuContext::Participant { process: need(&self.process, "process")?, role: need(&self.role, "role")? })
            }
            other => Err(ApiError::BadRequest(format!("unknown menu context `{other}`"))),
        }
    }
}

async fn menu(State(st): State<Arc<AppState>>, UrlQuery(p): UrlQuery<MenuParams>) -> ApiResult<Vec<MenuOption>> {
    let ctx = p.context()?;
    let ws = st.workspace(p.session.as_deref());
    let kb = ws.read().unwrap();
    if let MenuContext::Participant { process, role } = &ctx {
        kb.concept(process)?;
        kb.role(role)?;
    }
    Ok(Json(interact::menu(&kb, &ctx)?))
}

#[derive(Debug, Deserialize)]
pub struct DraftRequest {
    pub session: String,
    pub plan: Plan,
}

#[derive(Debug, Serialize)]
pub struct DraftResponse {
    pub plan: String,
    pub session: String,
    /// Warnings; errors reject the draft.
    pub diagnostics: Vec<Diagnostic>,
}

async fn draft_plan(State(st): State<Arc<AppState>>, Json(req): Json<DraftRequest>) -> ApiResult<DraftResponse> {
    let ws = st.workspace(Some(&req.session));
    let mut kb = ws.write().unwrap();
    let diagnostics = validate(&kb, &req.plan);
    if has_errors(&diagnostics) {
        return Err(ApiError::Conflict(diagnostics));
    }
    let plan = req.plan.id.clone();
    kb.upsert_plan(req.plan);
    Ok(Json(DraftResponse { plan, session: req.session, diagnostics }))
}

fn default_languages() -> Vec<Language> {
    Language::ALL.to_vec()
}

#[derive(Debug, Deserialize)]
pub struct GenerateRequest {
    pub plan: String,
    #[serde(default = "default_languages")]
    pub languages: Vec<Language>,
    pub format: Option<Format>,
    #[serde(default)]
    pub mode: Mode,
    pub session: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RenderedDocument {
    pub format: Format,
    pub body: String,
}

#[derive(Debug, Serialize)]
pub struct GenerateResponse {
    pub doc: String,
    pub plan: String,
    pub mode: Mode,
    pub digest: String,
    pub documents: BTreeMap<Language, AnnotatedDocument>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub rendered: BTreeMap<Language, RenderedDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

async fn generate_docs(State(st): State<Arc<AppState>>, Json(req): Json<GenerateRequest>) -> ApiResult<GenerateResponse> {
    let ws = st.workspace(req.session.as_deref());
    let generation = {
        let kb = ws.read().unwrap();
        generate(&kb, GenerationRequest { plan: &req.plan, languages: &req.languages, mode: req.mode }, st.resources)?
    };
    let id = document_id(&generation.plan, generation.mode, &generation.digest);
    let trace = generation.trace.clone();
    let requested: Vec<Language> = generation.documents.keys().copied().collect();
    let stored = st.store(&id, generation);
    let documents: BTreeMap<Language, AnnotatedDocument> =
        requested.iter().filter_map(|l| stored.documents.get(l).map(|d| (*l, d.clone()))).collect();
    let rendered = match req.format {
        Some(f) => requested
            .iter()
            .filter_map(|l| stored.emit(*l, f).map(|d| (*l, RenderedDocument { format: f, body: d.body })))
            .collect(),
        None => BTreeMap::new(),
    };
    Ok(Json(GenerateResponse {
        doc: id,
        plan: stored.plan.clone(),
        mode: stored.mode,
        digest: stored.digest.clone(),
        documents,
        rendered,
        trace,
    }))
}

#[derive(Debug, Deserialize)]
pub struct SimulateRequest {
    pub plan: String,
    pub session: Option<String>,
    /// Facts told before simulating; needs a session.
    #[serde(default)]
    pub tell: Vec<Assertion>,
    /// Keep the simulated effects in the session instead of a scratch copy.
    #[serde(default)]
    pub live: bool,
}

async fn simulate_plan(State(st): State<Arc<AppState>>, Json(req): Json<SimulateRequest>) -> ApiResult<Trace> {
    if !req.tell.is_empty() || req.live {
        let ws = st.session(req.session.as_deref())?;
        let mut kb = ws.write().unwrap();
        kb.tell_all(&req.tell)?;
        let trace = if req.live { simulate_live(&req.plan, &mut kb)? } else { simulate(&req.plan, &kb)? };
        return Ok(Json(trace));
    }
    let ws = st.workspace(req.session.as_deref());
    let kb = ws.read().unwrap();
    Ok(Json(simulate(&req.plan, &kb)?))
}

#[derive(Debug, Deserialize)]
pub struct TellRequest {
    pub session: String,
    pub assertions: Vec<Assertion>,
}

async fn tell(State(st): State<Arc<AppState>>, Json(req): Json<TellRequest>) -> ApiResult<StateDelta> {
    let ws = st.workspace(Some(&req.session));
    let mut kb = ws.write().unwrap();
    Ok(Json(kb.tell_all(&req.assertions)?))
}

#[derive(Debug, Serialize)]
pub struct SaveResponse {
    pub session: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub kb: KbDocument,
}

/// The session's knowledge base as an ordinary KB document, written to the
/// workspace directory when one is configured.
async fn save(State(st): State<Arc<AppState>>, Json(p): Json<SessionParam>) -> ApiResult<SaveResponse> {
    let session = p.session.ok_or_else(|| ApiError::BadRequest("missing `session`".into()))?;
    if session.is_empty() || !session.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(ApiError::BadRequest("session ids may only use letters, digits, `-` and `_`".into()));
    }
    let ws = st.workspace(Some(&session));
    let doc = ws.read().unwrap().snapshot();
    let path = match &st.workspace_dir {
        Some(dir) => {
            let path = dir.join(format!("{session}.json"));
            std::fs::write(&path, doc.to_json()).map_err(|e| ApiError::Internal(e.to_string()))?;
            Some(path.display().to_string())
        }
        None => None,
    };
    Ok(Json(SaveResponse { session, path, kb: doc }))
}

async fn get_document(
    State(st): State<Arc<AppState>>,
    axum::extract::Path(id): axum::extract::Path<String>,
) -> ApiResult<BTreeMap<Language, AnnotatedDocument>> {
    Ok(Json(st.document(&id)?.documents.clone()))
}

#[derive(Debug, Deserialize)]
pub struct SpanParams {
    pub doc: String,
    pub span: String,
    /// Defaults to English.
    pub lang: Option<String>,
}

impl SpanParams {
    fn resolve(&self, st: &AppState) -> Result<(Arc<Generation>, Language, Span), ApiError> {
        let generation = st.document(&self.doc)?;
        let language = match &self.lang {
            Some(l) => l.parse().map_err(|e: techdoc_core::realize::RealizeError| ApiError::BadRequest(e.to_string()))?,
            None => Language::En,
        };
        let span = Span::parse(&self.span)
            .ok_or_else(|| ApiError::BadRequest(format!("malformed span `{}` (expected sentence:start-end)", self.span)))?;
        if !generation.documents.contains_key(&language) {
            return Err(ApiError::NotFound(format!("document `{}` has no {language} version", self.doc)));
        }
        Ok((generation, language, span))
    }
}

async fn query_antecedent(
    State(st): State<Arc<AppState>>,
    UrlQuery(p): UrlQuery<SpanParams>,
) -> ApiResult<interact::AntecedentAnswer> {
    let (g, lang, span) = p.resolve(&st)?;
    Ok(Json(interact::antecedent(&g.documents[&lang], &span)?))
}

async fn query_align(State(st): State<Arc<AppState>>, UrlQuery(p): UrlQuery<SpanParams>) -> ApiResult<interact::AlignAnswer> {
    let (g, lang, span) = p.resolve(&st)?;
    Ok(Json(interact::align_span(&g.alignment(), &g.documents, lang, &span)?))
}

#[derive(Debug, Deserialize)]
pub struct LocationParams {
    pub instance: String,
    pub session: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LocationResponse {
    #[serde(flatten)]
    pub answer: interact::LocationAnswer,
    /// Where the image is served.
    pub url: String,
}

async fn query_location(
    State(st): State<Arc<AppState>>,
    UrlQuery(p): UrlQuery<LocationParams>,
) -> ApiResult<LocationResponse> {
    let ws = st.workspace(p.session.as_deref());
    let answer = interact::location(&ws.read().unwrap(), &p.instance)?;
    let url = format!("/{}", answer.image.trim_start_matches('/'));
    Ok(Json(LocationResponse { answer, url }))
}
