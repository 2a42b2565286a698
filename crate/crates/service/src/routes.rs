use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use erpsel_core::demo::{demo_project, mixed_project};
use erpsel_core::macbeth::{check_consistency, derive_scale, CardinalScale, ConsistencyReport, JudgmentMatrix, PairJudgment};
use erpsel_core::model::{CandidateId, MatrixId};
use erpsel_core::project::{
    cached_plan, cached_scale, gap_table, parse_project_value, plan_for, ranking, screening, validate_project, weights,
    PlanRecord, ProjectFile, Violation,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::{Entry, ProjectStore};

pub type AppState = Arc<ProjectStore>;

/// JSON body extractor whose errors name the offending field. An empty body
/// reads as `null`, so `Option<T>` bodies may be omitted.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", e.body_text()))?;
        let text: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) { b"null" } else { &bytes };
        let de = &mut serde_json::Deserializer::from_slice(text);
        serde_path_to_error::deserialize(de).map(JsonBody).map_err(|e| {
            let path = e.path().to_string();
            let err = ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", e.inner().to_string());
            if path == "." {
                err
            } else {
                err.at(path)
            }
        })
    }
}

fn project_from(value: serde_json::Value, prefix: &str) -> Result<ProjectFile, ApiError> {
    parse_project_value(value).map_err(|e| {
        let mut err = ApiError::from(e);
        err.path = Some(match err.path.take() {
            Some(p) => format!("{prefix}.{p}"),
            None => prefix.to_owned(),
        });
        err
    })
}

#[derive(Serialize)]
pub struct ProjectEnvelope {
    pub id: String,
    pub version: u64,
    pub project: ProjectFile,
}

fn envelope(id: String, e: Entry) -> ProjectEnvelope {
    ProjectEnvelope { id, version: e.version, project: e.project }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CreateBody {
    #[serde(default)]
    pub project: Option<serde_json::Value>,
    /// `"demo"` or `"measured"`: start from a worked example.
    #[serde(default)]
    pub template: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
}

pub async fn create_project(
    State(store): State<AppState>,
    JsonBody(body): JsonBody<Option<CreateBody>>,
) -> Result<impl IntoResponse, ApiError> {
    let body = body.unwrap_or_default();
    let mut project = match (body.project, body.template.as_deref()) {
        (Some(_), Some(_)) => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", "give either project or template"))
        }
        (Some(v), None) => project_from(v, "project")?,
        (None, Some("demo")) => demo_project(),
        (None, Some("measured")) => mixed_project(),
        (None, Some(other)) => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", format!("unknown template `{other}`"))
                .at("template"))
        }
        (None, None) => ProjectFile::new(),
    };
    if let Some(n) = body.name {
        project.name = n;
    }
    let (id, entry) = store.create(project).await?;
    Ok((StatusCode::CREATED, Json(envelope(id, entry))))
}

#[derive(Serialize)]
pub struct Summary {
    id: String,
    version: u64,
    name: String,
    stage: String,
}

pub async fn list_projects(State(store): State<AppState>) -> Result<Json<Vec<Summary>>, ApiError> {
    let mut out = Vec::new();
    for id in store.ids().await {
        let e = store.get(&id).await?;
        let e = e.read().await;
        out.push(Summary { id, version: e.version, name: e.project.name.clone(), stage: e.project.stage.to_string() });
    }
    Ok(Json(out))
}

pub async fn get_project(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<ProjectEnvelope>, ApiError> {
    let e = store.get(&id).await?.read().await.clone();
    Ok(Json(envelope(id, e)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutBody {
    pub version: u64,
    pub project: serde_json::Value,
}

fn check_version(expected: Option<u64>, current: u64) -> Result<(), ApiError> {
    match expected {
        Some(v) if v != current => Err(ApiError::new(
            StatusCode::CONFLICT,
            "version-conflict",
            format!("edit is based on version {v} but the project is at version {current}"),
        )
        .at("version")),
        _ => Ok(()),
    }
}

/// Applies `edited` as the next version of `id`, atomically.
fn commit(store: &ProjectStore, id: &str, entry: &mut Entry, mut edited: ProjectFile) -> Result<(), ApiError> {
    let violations = validate_project(&edited);
    if !violations.is_empty() {
        return Err(ApiError::invalid(violations));
    }
    edited.refresh_staleness();
    let next = Entry { version: entry.version + 1, project: edited };
    store.persist(id, &next)?;
    *entry = next;
    Ok(())
}

pub async fn put_project(
    State(store): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<PutBody>,
) -> Result<Json<ProjectEnvelope>, ApiError> {
    let project = project_from(body.project, "project")?;
    let handle = store.get(&id).await?;
    let mut entry = handle.write().await;
    check_version(Some(body.version), entry.version)?;
    commit(&store, &id, &mut entry, project)?;
    Ok(Json(envelope(id, entry.clone())))
}

pub async fn validate(JsonBody(value): JsonBody<serde_json::Value>) -> Result<Json<Vec<Violation>>, ApiError> {
    let p = project_from(value, "project")?;
    Ok(Json(validate_project(&p)))
}

#[derive(Serialize)]
pub struct MatrixView {
    pub id: MatrixId,
    pub version: u64,
    pub matrix: JudgmentMatrix,
    pub report: ConsistencyReport,
    pub scale: Option<CardinalScale>,
}

fn matrix_view(id: MatrixId, version: u64, matrix: JudgmentMatrix) -> Result<MatrixView, ApiError> {
    let bad = |e: erpsel_core::macbeth::MacbethError| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-judgments", e.to_string()).at(format!("matrices.{id}"))
    };
    let report = check_consistency(&matrix).map_err(bad)?;
    let scale = if report.consistent { derive_scale(&matrix).ok() } else { None };
    Ok(MatrixView { id, version, matrix, report, scale })
}

pub async fn get_matrix(
    State(store): State<AppState>,
    Path((id, mid)): Path<(String, String)>,
) -> Result<Json<MatrixView>, ApiError> {
    let handle = store.get(&id).await?;
    let entry = handle.read().await;
    let m = entry.project.matrices.get(&MatrixId::new(mid.as_str())).ok_or_else(|| ApiError::not_found("matrix", &mid))?;
    Ok(Json(matrix_view(MatrixId::new(mid), entry.version, m.clone())?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentsBody {
    #[serde(default)]
    pub version: Option<u64>,
    pub judgments: Vec<PairJudgment>,
}

/// Replaces a matrix's judgments exactly as given. Inconsistent judgments are
/// stored too; the response says which ones to revise.
pub async fn put_judgments(
    State(store): State<AppState>,
    Path((id, mid)): Path<(String, String)>,
    JsonBody(body): JsonBody<JudgmentsBody>,
) -> Result<Json<MatrixView>, ApiError> {
    let handle = store.get(&id).await?;
    let mut entry = handle.write().await;
    check_version(body.version, entry.version)?;
    let key = MatrixId::new(mid.as_str());
    let mut edited = entry.project.clone();
    let m = edited.matrices.get_mut(&key).ok_or_else(|| ApiError::not_found("matrix", &mid))?;
    m.judgments = body.judgments;
    let view = matrix_view(key.clone(), entry.version + 1, m.clone())?;
    if view.scale.is_some() {
        cached_scale(&mut edited, &key)?;
    }
    commit(&store, &id, &mut entry, edited)?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeBody {
    #[serde(default)]
    pub budget: Option<f64>,
}

#[derive(Serialize)]
pub struct OptimizeView {
    pub candidate: CandidateId,
    pub budget: f64,
    #[serde(flatten)]
    pub record: PlanRecord,
}

/// Solves a candidate's adaptation plan. A budget in the body is a what-if:
/// the result is not stored.
pub async fn optimize(
    State(store): State<AppState>,
    Path((id, cid)): Path<(String, String)>,
    JsonBody(body): JsonBody<Option<OptimizeBody>>,
) -> Result<Json<OptimizeView>, ApiError> {
    let candidate = CandidateId::new(cid.as_str());
    let handle = store.get(&id).await?;
    match body.and_then(|b| b.budget) {
        Some(budget) => {
            let entry = handle.read().await;
            let record = plan_for(&entry.project, &candidate, Some(budget))?;
            Ok(Json(OptimizeView { candidate, budget, record }))
        }
        None => {
            let mut entry = handle.write().await;
            let mut project = entry.project.clone();
            let record = cached_plan(&mut project, &candidate)?;
            let budget = project.adaptation.get(&candidate).map_or(0.0, |i| i.budget);
            if project != entry.project {
                let next = Entry { version: entry.version, project };
                store.persist(&id, &next)?;
                *entry = next;
            }
            Ok(Json(OptimizeView { candidate, budget, record }))
        }
    }
}

fn budget_param(q: &HashMap<String, String>) -> Result<Option<f64>, ApiError> {
    match q.get("budget") {
        None => Ok(None),
        Some(s) => s.parse::<f64>().map(Some).map_err(|_| {
            ApiError::new(StatusCode::BAD_REQUEST, "malformed-query", format!("budget `{s}` is not a number")).at("budget")
        }),
    }
}

/// Current ranking; `?budget=` recomputes with that adaptation budget for
/// every candidate. Nothing is stored either way.
pub async fn get_ranking(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<impl IntoResponse, ApiError> {
    let budget = budget_param(&q)?;
    let handle = store.get(&id).await?;
    let entry = handle.read().await;
    Ok(Json(ranking(&entry.project, budget)?))
}

pub async fn get_weights(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let handle = store.get(&id).await?;
    let entry = handle.read().await;
    Ok(Json(weights(&entry.project)?))
}

pub async fn get_screening(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let handle = store.get(&id).await?;
    let entry = handle.read().await;
    let s = screening(&entry.project);
    let survivors: Vec<_> = s.survivors.iter().map(|c| c.id.clone()).collect();
    Ok(Json(serde_json::json!({ "survivors": survivors, "exclusions": s.exclusions })))
}

pub async fn get_gap(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let handle = store.get(&id).await?;
    let entry = handle.read().await;
    Ok(Json(gap_table(&entry.project)?))
}

pub async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such route")
}
