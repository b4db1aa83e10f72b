//! HTTP/JSON API over one safescope project.
//!
//! Readers share an immutable [`Snapshot`] of the project at one revision.
//! Writers are serialized through a single mutex and publish a fresh
//! snapshot once the answer is in the journal. A mutation must name the
//! revision it was made against; a stale one is rejected with 409 and
//! nothing is written.

mod error;
mod routes;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use axum::http::{header, HeaderName, HeaderValue};
use axum::response::{IntoResponse, Response};
use axum::Router;
use safescope_core::funnel::{run_funnel, FunnelReport};
use safescope_core::project::{Project, ProjectError};
use safescope_core::report::{render_json, AnalysisOptions, ReportError};
use tokio::sync::Mutex;
use tower_http::cors::CorsLayer;

pub use error::ApiError;

/// Response header carrying the revision a body reflects.
pub const REVISION_HEADER: HeaderName = HeaderName::from_static("x-safescope-revision");

/// The project at one revision, with the default funnel precomputed.
pub struct Snapshot {
    project: Project,
    funnel: FunnelReport,
    residual_members: BTreeSet<String>,
    options: AnalysisOptions,
    report_json: OnceLock<Result<String, String>>,
}

impl Snapshot {
    fn new(project: Project, options: AnalysisOptions) -> Result<Self, ProjectError> {
        let funnel = run_funnel(project.state(), project.stages()).map_err(ReportError::from)?;
        let residual_members = funnel
            .residual
            .iter()
            .flat_map(|u| funnel.members_of(u))
            .collect();
        Ok(Self {
            project,
            funnel,
            residual_members,
            options,
            report_json: OnceLock::new(),
        })
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn revision(&self) -> u64 {
        self.project.revision()
    }

    pub fn funnel(&self) -> &FunnelReport {
        &self.funnel
    }

    /// The JSON report, rendered once per snapshot.
    pub fn report_json(&self) -> Result<&str, ApiError> {
        self.report_json
            .get_or_init(|| {
                self.project
                    .report(&self.options)
                    .map(|r| render_json(&r))
                    .map_err(|e| e.to_string())
            })
            .as_deref()
            .map_err(|e| ApiError::Internal(e.clone()))
    }
}

/// Shared service state.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    options: AnalysisOptions,
}

impl AppState {
    /// Opens the project at `root`.
    pub fn open(root: impl Into<PathBuf>, options: AnalysisOptions) -> Result<Self, ProjectError> {
        let project = Project::open(root)?;
        project.refresh_cache()?;
        let snapshot = Snapshot::new(project, options.clone())?;
        Ok(Self {
            inner: Arc::new(Inner {
                current: RwLock::new(Arc::new(snapshot)),
                writer: Mutex::new(()),
                options,
            }),
        })
    }

    /// The current snapshot. It stays valid while later writes proceed.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.inner
            .current
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    fn publish(&self, project: Project) -> Result<(), ProjectError> {
        let snapshot = Arc::new(Snapshot::new(project, self.inner.options.clone())?);
        *self
            .inner
            .current
            .write()
            .unwrap_or_else(|e| e.into_inner()) = snapshot;
        Ok(())
    }
}

/// All routes under `/api/v1/`, with CORS open to any origin.
pub fn router(state: AppState) -> Router {
    routes::api()
        .with_state(state)
        .layer(CorsLayer::permissive().expose_headers([REVISION_HEADER]))
}

/// A JSON body served as-is, tagged with its revision.
pub(crate) fn json_text(revision: u64, body: String) -> Response {
    (
        [
            (
                header::CONTENT_TYPE,
                HeaderValue::from_static("application/json"),
            ),
            (REVISION_HEADER, HeaderValue::from(revision)),
        ],
        body,
    )
        .into_response()
}
