//! HTTP facade over validation, AHP weighting and allocation search.
//!
//! Every endpoint takes and returns JSON. The service keeps no state between
//! requests; a search runs on the blocking pool and is abandoned with a 504
//! once the configured wall-time cap expires.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use scall_core::ahp::{self, AhpError, PairwiseComparisonMatrix, TradeoffVector, DEFAULT_CR_THRESHOLD};
use scall_core::model::{self, ArchitectureModel, Issue, IssueCode, ModelDocument, ValidationReport};
use scall_core::report::{Method, ReportView};
use scall_core::search::{self, ExhaustiveConfig, GaConfig, SearchError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub exhaustive_cap: u128,
    pub request_timeout: Duration,
    pub cr_threshold: f64,
    /// Directory served under `/` when set.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            exhaustive_cap: search::DEFAULT_EXHAUSTIVE_CAP,
            request_timeout: Duration::from_secs(30),
            cr_threshold: DEFAULT_CR_THRESHOLD,
            static_dir: None,
        }
    }
}

/// Error body: `{error, message, detail?}`; inconsistent judgments also carry
/// `cr` at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cr: Option<f64>,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self { status: status.as_u16(), error: error.into(), message: message.into(), detail: None, cr: None }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "MALFORMED_BODY", message)
    }

    fn invalid_model(report: &ValidationReport) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_MODEL", "the model failed validation")
            .with_detail(serde_json::to_value(report).unwrap_or(Value::Null))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<AhpError> for ApiError {
    fn from(e: AhpError) -> Self {
        match e {
            AhpError::Inconsistent { cr, threshold } => {
                let mut err = ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "INCONSISTENT",
                    format!("inconsistent judgments (CR = {cr:.3}); revise the pairwise comparisons"),
                )
                .with_detail(json!({ "cr": cr, "threshold": threshold }));
                err.cr = Some(cr);
                err
            }
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_COMPARISON", other.to_string()),
        }
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let status = match e {
            SearchError::NoFeasibleAllocation { .. } => StatusCode::CONFLICT,
            SearchError::SpaceTooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            SearchError::InvalidConfig(_) => StatusCode::BAD_REQUEST,
        };
        let detail = match &e {
            SearchError::NoFeasibleAllocation { evaluated, least_violation } => {
                Some(json!({ "evaluated": evaluated, "leastViolation": least_violation }))
            }
            SearchError::SpaceTooLarge { space, cap } => Some(json!({ "space": space.to_string(), "cap": cap.to_string() })),
            SearchError::InvalidConfig(_) => None,
        };
        let mut err = ApiError::new(status, e.code(), e.to_string());
        err.detail = detail;
        err
    }
}

fn parse_json(body: &[u8]) -> Result<Value, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(format!("body is not JSON: {e}")))
}

/// Decodes and validates a model; schema problems come back as a report.
fn check_model(value: Value) -> Result<ArchitectureModel, ValidationReport> {
    let doc: ModelDocument = serde_json::from_value(value).map_err(|e| ValidationReport {
        issues: vec![Issue { code: IssueCode::Schema, path: String::new(), message: e.to_string() }],
    })?;
    model::validate_model(&doc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    pub report: ValidationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub components: usize,
    pub units: usize,
    pub resources: usize,
    /// `m^n` as a decimal string; it can exceed 64 bits.
    pub space: String,
}

async fn validate(body: Bytes) -> Result<Json<ValidateResponse>, ApiError> {
    let value = parse_json(&body)?;
    Ok(Json(match check_model(value) {
        Ok(m) => ValidateResponse {
            valid: true,
            report: ValidationReport::default(),
            summary: Some(ModelSummary { components: m.n(), units: m.m(), resources: m.l(), space: m.space_size().to_string() }),
        },
        Err(report) => ValidateResponse { valid: false, report, summary: None },
    }))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct AhpRequest {
    #[serde(default, deserialize_with = "model::deserialize_comparison")]
    comparison: Option<Vec<Vec<f64>>>,
    threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AhpResponse {
    /// Priorities of every criterion, communication last.
    pub weights: Vec<f64>,
    pub fc: f64,
    pub lambda_max: f64,
    pub cr: f64,
}

async fn ahp_weights(State(cfg): State<Arc<ServiceConfig>>, body: Bytes) -> Result<Json<AhpResponse>, ApiError> {
    let req: AhpRequest = serde_json::from_value(parse_json(&body)?).map_err(|e| ApiError::malformed(e.to_string()))?;
    let rows = req.comparison.ok_or_else(|| ApiError::malformed("missing \"comparison\" matrix"))?;
    let matrix = PairwiseComparisonMatrix::new(rows)?;
    let outcome = ahp::derive_tradeoff_with(&matrix, req.threshold.unwrap_or(cfg.cr_threshold))?;
    Ok(Json(AhpResponse {
        weights: outcome.tradeoff.as_criteria(),
        fc: outcome.tradeoff.communication_weight(),
        lambda_max: outcome.lambda_max,
        cr: outcome.consistency_ratio,
    }))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AllocateRequest {
    pub model: Value,
    pub method: Method,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Number of GA re-runs to combine.
    #[serde(default)]
    pub alternatives: Option<usize>,
    #[serde(default)]
    pub ga_config: Option<GaConfig>,
    /// Alternatives kept by exhaustive search.
    #[serde(default)]
    pub top_k: Option<usize>,
    /// Use equal weights instead of the model's judgments.
    #[serde(default)]
    pub uniform_weights: bool,
}

fn weights_for(model: &ArchitectureModel, uniform: bool, threshold: f64) -> Result<TradeoffVector, ApiError> {
    match (model.comparison(), uniform) {
        (_, true) => Ok(TradeoffVector::uniform(model.l())),
        (Some(c), false) => Ok(ahp::derive_tradeoff_with(c, threshold)?.tradeoff),
        (None, false) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "MISSING_COMPARISON",
            "the model has no pairwise comparison; add one or set uniformWeights",
        )),
    }
}

/// Runs one allocation request to completion.
pub fn run_allocation(req: AllocateRequest, cfg: &ServiceConfig) -> Result<ReportView, ApiError> {
    if req.alternatives == Some(0) || req.top_k == Some(0) {
        return Err(ApiError::malformed("alternatives and topK must be positive"));
    }
    let model = check_model(req.model).map_err(|r| ApiError::invalid_model(&r))?;
    let f = weights_for(&model, req.uniform_weights, cfg.cr_threshold)?;
    match req.method {
        Method::Exhaustive => {
            let top_k = req.top_k.or(req.alternatives).unwrap_or(1);
            let rep = search::exhaustive_search(&model, &f, &ExhaustiveConfig { top_k, cap: cfg.exhaustive_cap })?;
            Ok(ReportView::new(&model, &rep))
        }
        Method::Ga => {
            let mut ga = req.ga_config.unwrap_or_default();
            if let Some(seed) = req.seed {
                ga.seed = seed;
            }
            match req.alternatives {
                Some(count) => {
                    let reps = search::alternatives(&model, &f, &ga, count)?;
                    Ok(ReportView::from_reruns(&model, &reps))
                }
                None => Ok(ReportView::new(&model, &search::ga_search(&model, &f, &ga)?)),
            }
        }
    }
}

async fn allocate(State(cfg): State<Arc<ServiceConfig>>, body: Bytes) -> Result<Json<ReportView>, ApiError> {
    let req: AllocateRequest = serde_json::from_value(parse_json(&body)?).map_err(|e| ApiError::malformed(e.to_string()))?;
    let limit = cfg.request_timeout;
    let job = tokio::task::spawn_blocking(move || run_allocation(req, &cfg));
    match tokio::time::timeout(limit, job).await {
        Ok(Ok(result)) => result.map(Json),
        Ok(Err(join)) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", join.to_string())),
        Err(_) => Err(ApiError::new(
            StatusCode::GATEWAY_TIMEOUT,
            "TIMEOUT",
            format!("search exceeded the {:.0} s request cap", limit.as_secs_f64()),
        )),
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(cfg: ServiceConfig) -> Router {
    let static_dir = cfg.static_dir.clone();
    let api = Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/validate", post(validate))
        .route("/api/v1/ahp", post(ahp_weights))
        .route("/api/v1/allocate", post(allocate))
        .with_state(Arc::new(cfg));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

pub async fn serve(addr: SocketAddr, cfg: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(cfg)).await
}
