//! The subsystem report handed to the vehicle architect.
//!
//! One [`SubsystemReport`] structure feeds both renderings: JSON for tools
//! and the service, Markdown for people. Reports carry no wall-clock time,
//! so the same inputs always render to the same bytes.

mod markdown;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::funnel::{run_funnel, FunnelError, FunnelReport, FunnelStageSpec};
use crate::heuristics::{
    completeness, Answer, ClassificationTag, Completeness, HeuristicStep, TriageState,
};
use crate::propagation::{
    build_graph, candidates_for, min_config_with, trace_all, FallbackCandidate, MinConfigOptions,
    MinConfigResult, PropagationError, PropagationTrace, TraceSet,
};
use crate::requirements::{
    availability_groups, estimate_frequency, generate_requirements, AvailabilityGroup,
    FrequencyError, FrequencyEstimate, RequirementError, RequirementSet,
    DEFAULT_BENCHMARK_RATE_PER_HOUR,
};
use crate::spec_model::{FieldFailureRecord, Monitor};

pub use markdown::render_markdown;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub subsystem_id: String,
    pub spec_source: String,
    pub tool_version: String,
    pub revision: u64,
    pub completeness: Completeness,
}

/// Everything known about one monitor that survived the funnel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorFinding {
    pub monitor: Monitor,
    pub tags: Vec<ClassificationTag>,
    /// Representative of the monitor's symmetry class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_class: Option<String>,
    pub answers: BTreeMap<HeuristicStep, Answer>,
    pub detected_trace: PropagationTrace,
    pub undetected_trace: PropagationTrace,
    pub fallback_candidates: Vec<FallbackCandidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionList {
    pub stage_id: String,
    pub stage_name: String,
    pub monitors: Vec<String>,
}

/// Unanswered questions of one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenItems {
    pub step: HeuristicStep,
    pub count: usize,
    pub question_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReportWarning {
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemReport {
    pub schema_version: u32,
    pub header: ReportHeader,
    /// Subsystems of the platform, so every referenced id resolves.
    pub platform_subsystems: Vec<String>,
    pub funnel: FunnelReport,
    /// Monitors surviving the funnel, by id.
    pub findings: Vec<MonitorFinding>,
    pub exclusions: Vec<ExclusionList>,
    pub availability_signals: Vec<AvailabilityGroup>,
    pub min_config: MinConfigResult,
    pub requirements: RequirementSet,
    pub frequencies: Vec<FrequencyEstimate>,
    pub open_items: Vec<OpenItems>,
    pub warnings: Vec<ReportWarning>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("{input} is from revision {found}, state is at revision {expected}")]
    RevisionMismatch {
        input: &'static str,
        expected: u64,
        found: u64,
    },
    #[error(transparent)]
    Funnel(#[from] FunnelError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Requirements(#[from] RequirementError),
    #[error(transparent)]
    Frequency(#[from] FrequencyError),
}

/// Assembles the report. All revisioned inputs must come from the state's
/// current revision.
pub fn build_report(
    state: &TriageState,
    funnel: &FunnelReport,
    traces: &TraceSet,
    min_config: &MinConfigResult,
    requirements: &RequirementSet,
    frequencies: &[FrequencyEstimate],
) -> Result<SubsystemReport, ReportError> {
    let expected = state.revision();
    for (input, found) in [
        ("funnel", funnel.revision),
        ("traces", traces.revision),
        ("min_config", min_config.revision),
        ("requirements", requirements.revision),
    ] {
        if found != expected {
            return Err(ReportError::RevisionMismatch {
                input,
                expected,
                found,
            });
        }
    }

    let spec = state.spec();
    let graph = build_graph(state.platform());
    let residual_units: std::collections::BTreeSet<&str> =
        funnel.residual.iter().map(String::as_str).collect();

    let mut findings = Vec::new();
    for unit in funnel.survivors() {
        let needs_requirement = residual_units.contains(unit.as_str());
        for id in funnel.members_of(&unit) {
            let Some(m) = spec.monitor(&id) else { continue };
            let pair = traces
                .get(&id)
                .ok_or_else(|| PropagationError::UnknownMonitor(id.clone()))?;
            let mut tags: Vec<ClassificationTag> = state
                .classifications()
                .get(&id)
                .map(|t| t.iter().copied().collect())
                .unwrap_or_default();
            if needs_requirement {
                tags.push(ClassificationTag::NeedsAdiRequirement);
                tags.sort();
            }
            let red = tags.contains(&ClassificationTag::RedImmediate);
            findings.push(MonitorFinding {
                monitor: m.clone(),
                tags,
                symmetry_class: funnel.class_of(&id).map(|c| c.representative.clone()),
                answers: state
                    .answers_for(&id)
                    .into_iter()
                    .map(|(s, a)| (s, a.clone()))
                    .collect(),
                detected_trace: pair.detected.clone(),
                undetected_trace: pair.undetected.clone(),
                fallback_candidates: if red {
                    candidates_for(&graph, &spec.subsystem_id, m)
                } else {
                    Vec::new()
                },
            });
        }
    }
    findings.sort_by(|a, b| a.monitor.id.cmp(&b.monitor.id));

    let exclusions = funnel
        .stages
        .iter()
        .filter(|s| !s.excluded.is_empty())
        .map(|s| ExclusionList {
            stage_id: s.id.clone(),
            stage_name: s.name.clone(),
            monitors: s.excluded.clone(),
        })
        .collect();

    let mut open: BTreeMap<HeuristicStep, Vec<String>> = BTreeMap::new();
    for q in state.open_questions() {
        open.entry(q.step).or_default().push(q.id.clone());
    }
    let open_items = open
        .into_iter()
        .map(|(step, question_ids)| OpenItems {
            step,
            count: question_ids.len(),
            question_ids,
        })
        .collect();

    let mut warnings: Vec<ReportWarning> = state
        .answer_warnings()
        .into_iter()
        .map(|w| ReportWarning {
            subject: w.question_id,
            message: w.message,
        })
        .collect();
    for f in frequencies {
        if spec.dtc(&f.dtc_code).is_none() {
            warnings.push(ReportWarning {
                subject: f.dtc_code.clone(),
                message: "field data names a DTC that the spec does not define".into(),
            });
        }
    }
    warnings.sort();

    let mut platform_subsystems: Vec<String> = state
        .platform()
        .subsystems
        .iter()
        .map(|s| s.id.clone())
        .collect();
    platform_subsystems.sort();

    Ok(SubsystemReport {
        schema_version: SCHEMA_VERSION,
        header: ReportHeader {
            subsystem_id: spec.subsystem_id.clone(),
            spec_source: spec.source_meta.clone(),
            tool_version: TOOL_VERSION.to_owned(),
            revision: expected,
            completeness: completeness(state),
        },
        platform_subsystems,
        funnel: funnel.clone(),
        findings,
        exclusions,
        availability_signals: availability_groups(state, funnel),
        min_config: min_config.clone(),
        requirements: requirements.clone(),
        frequencies: frequencies.to_vec(),
        open_items,
        warnings,
    })
}

/// Knobs of the end-to-end analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub benchmark_rate_per_hour: f64,
    pub min_config: MinConfigOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            benchmark_rate_per_hour: DEFAULT_BENCHMARK_RATE_PER_HOUR,
            min_config: MinConfigOptions::default(),
        }
    }
}

/// Runs funnel, traces, minimum configuration, requirements and frequency
/// estimation on one snapshot and builds the report.
pub fn analyze(
    state: &TriageState,
    stages: &[FunnelStageSpec],
    field_data: &[FieldFailureRecord],
    options: &AnalysisOptions,
) -> Result<SubsystemReport, ReportError> {
    let funnel = run_funnel(state, stages)?;
    let graph = build_graph(state.platform());
    let surviving: Vec<String> = funnel
        .survivors()
        .iter()
        .flat_map(|u| funnel.members_of(u))
        .collect();
    let traces = trace_all(state, &graph, surviving.iter().map(String::as_str))?;
    let min_config = min_config_with(
        &state.spec().subsystem_id,
        state,
        &graph,
        &options.min_config,
    )?;
    let requirements = generate_requirements(state, Some(&funnel))?;
    let frequencies = estimate_frequency(field_data, options.benchmark_rate_per_hour)?;
    build_report(
        state,
        &funnel,
        &traces,
        &min_config,
        &requirements,
        &frequencies,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Json,
    Markdown,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(RenderFormat::Json),
            "markdown" | "md" => Ok(RenderFormat::Markdown),
            other => Err(format!(
                "unknown format `{other}` (expected json or markdown)"
            )),
        }
    }
}

impl fmt::Display for RenderFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderFormat::Json => "json",
            RenderFormat::Markdown => "markdown",
        })
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn render_json(report: &SubsystemReport) -> String {
    let mut s = serde_json::to_string_pretty(report).unwrap_or_default();
    s.push('\n');
    s
}

pub fn render(report: &SubsystemReport, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => render_json(report),
        RenderFormat::Markdown => render_markdown(report),
    }
}
