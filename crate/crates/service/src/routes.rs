use std::str::FromStr;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::response::Response;
use axum::routing::{get, post};
use axum::{Json, Router};
use safescope_core::funnel::{parse_stages, run_funnel};
use safescope_core::heuristics::{
    Answer, AnswerParseError, AnswerRecord, ClassificationTag, HeuristicStep, Question,
};
use safescope_core::spec_model::{Monitor, WarningLamp};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{json_text, ApiError, AppState};

const DEFAULT_PAGE_SIZE: usize = 50;
const MAX_PAGE_SIZE: usize = 500;

pub(crate) fn api() -> Router<AppState> {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/monitors", get(monitors))
        .route("/api/v1/questions", get(questions))
        .route("/api/v1/answers", post(answer))
        .route("/api/v1/funnel", get(funnel))
        .route("/api/v1/report", get(report))
}

fn to_body<T: Serialize>(revision: u64, value: &T) -> Result<Response, ApiError> {
    let body = serde_json::to_string(value).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(json_text(revision, body))
}

async fn health(State(app): State<AppState>) -> Result<Response, ApiError> {
    let rev = app.snapshot().revision();
    to_body(rev, &json!({ "status": "ok", "revision": rev }))
}

#[derive(Debug, Deserialize)]
struct MonitorQuery {
    tag: Option<String>,
    lamp: Option<String>,
    page: Option<String>,
    page_size: Option<String>,
}

#[derive(Serialize)]
struct MonitorItem<'a> {
    monitor: &'a Monitor,
    tags: Vec<ClassificationTag>,
}

#[derive(Serialize)]
struct MonitorPage<'a> {
    revision: u64,
    page: usize,
    page_size: usize,
    total: usize,
    items: Vec<MonitorItem<'a>>,
}

fn parse_list<T: FromStr>(raw: &Option<String>, what: &str) -> Result<Vec<T>, ApiError> {
    raw.iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.is_empty())
        .map(|s| T::from_str(s).map_err(|_| ApiError::BadRequest(format!("unknown {what} `{s}`"))))
        .collect()
}

fn parse_number(
    raw: &Option<String>,
    what: &str,
    default: usize,
    max: usize,
) -> Result<usize, ApiError> {
    match raw.as_deref() {
        None => Ok(default),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if (1..=max).contains(&n) => Ok(n),
            _ => Err(ApiError::BadRequest(format!(
                "{what} must be between 1 and {max}, got `{s}`"
            ))),
        },
    }
}

/// Monitors by id; `tag` and `lamp` take comma-separated values and all of
/// them must match. Pages are 1-based.
async fn monitors(
    State(app): State<AppState>,
    Query(q): Query<MonitorQuery>,
) -> Result<Response, ApiError> {
    let tags: Vec<ClassificationTag> = parse_list(&q.tag, "tag")?;
    let lamps: Vec<WarningLamp> = parse_list(&q.lamp, "lamp")?;
    let page = parse_number(&q.page, "page", 1, usize::MAX)?;
    let page_size = parse_number(&q.page_size, "page_size", DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE)?;

    let snap = app.snapshot();
    let state = snap.project().state();
    let mut sorted: Vec<&Monitor> = state.spec().monitors.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let matching: Vec<MonitorItem> = sorted
        .into_iter()
        .map(|m| {
            let mut t: Vec<ClassificationTag> = state
                .classifications()
                .get(&m.id)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default();
            if snap.residual_members.contains(&m.id) {
                t.push(ClassificationTag::NeedsAdiRequirement);
            }
            MonitorItem {
                monitor: m,
                tags: t,
            }
        })
        .filter(|item| tags.iter().all(|t| item.tags.contains(t)))
        .filter(|item| lamps.iter().all(|l| item.monitor.lamp == *l))
        .collect();
    let total = matching.len();
    let items = matching
        .into_iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .collect();
    to_body(
        snap.revision(),
        &MonitorPage {
            revision: snap.revision(),
            page,
            page_size,
            total,
            items,
        },
    )
}

#[derive(Debug, Deserialize)]
struct QuestionQuery {
    status: Option<String>,
    step: Option<String>,
    target: Option<String>,
}

#[derive(Serialize)]
struct QuestionItem<'a> {
    #[serde(flatten)]
    question: &'a Question,
    /// Description of the target monitor, for display.
    #[serde(skip_serializing_if = "Option::is_none")]
    monitor_description: Option<&'a str>,
    /// The target monitor survives the funnel and needs an ADI requirement.
    residual: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    answer: Option<&'a Answer>,
}

#[derive(Serialize)]
struct QuestionList<'a> {
    revision: u64,
    total: usize,
    items: Vec<QuestionItem<'a>>,
}

/// Questions in step then target order. `status` is `pending` (default),
/// `answered` or `all`.
async fn questions(
    State(app): State<AppState>,
    Query(q): Query<QuestionQuery>,
) -> Result<Response, ApiError> {
    let status = q.status.as_deref().unwrap_or("pending");
    if !matches!(status, "pending" | "answered" | "all") {
        return Err(ApiError::BadRequest(format!("unknown status `{status}`")));
    }
    let steps: Vec<HeuristicStep> = parse_list(&q.step, "step")?;

    let snap = app.snapshot();
    let state = snap.project().state();
    let items: Vec<QuestionItem> = state
        .questions()
        .iter()
        .filter(|question| steps.is_empty() || steps.contains(&question.step))
        .filter(|question| q.target.as_deref().is_none_or(|t| question.target == t))
        .map(|question| QuestionItem {
            question,
            monitor_description: state
                .spec()
                .monitor(&question.target)
                .map(|m| m.description.as_str()),
            residual: snap.residual_members.contains(&question.target),
            answer: state.answer(&question.id),
        })
        .filter(|item| match status {
            "pending" => item.answer.is_none(),
            "answered" => item.answer.is_some(),
            _ => true,
        })
        .collect();
    to_body(
        snap.revision(),
        &QuestionList {
            revision: snap.revision(),
            total: items.len(),
            items,
        },
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    answer: AnswerRecord,
    revision: u64,
}

/// Appends one answer made against `revision`.
async fn answer(
    State(app): State<AppState>,
    body: Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let req: AnswerRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))?;
    let answer = Answer::try_from(req.answer).map_err(|e: AnswerParseError| ApiError::from(e))?;

    let _writer = app.inner.writer.lock().await;
    let mut project = app.snapshot().project().clone();
    let (project, result) = tokio::task::spawn_blocking(move || {
        let result = project.append_answer_at(&answer, req.revision);
        (project, result)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    let new_revision = result?;
    app.publish(project)?;
    Ok(Json(json!({ "new_revision": new_revision })))
}

#[derive(Debug, Deserialize)]
struct FunnelQuery {
    /// Alternative stage configuration, in the `stages.json` format.
    stages: Option<String>,
}

async fn funnel(
    State(app): State<AppState>,
    Query(q): Query<FunnelQuery>,
) -> Result<Response, ApiError> {
    let snap = app.snapshot();
    match q.stages {
        None => to_body(snap.revision(), snap.funnel()),
        Some(text) => {
            let stages = parse_stages(&text).map_err(|e| ApiError::BadRequest(e.to_string()))?;
            let report = run_funnel(snap.project().state(), &stages)
                .map_err(|e| ApiError::BadRequest(e.to_string()))?;
            to_body(snap.revision(), &report)
        }
    }
}

/// The JSON report, byte-identical to `safescope report --format json`.
async fn report(State(app): State<AppState>) -> Result<Response, ApiError> {
    let snap = app.snapshot();
    Ok(json_text(snap.revision(), snap.report_json()?.to_owned()))
}
