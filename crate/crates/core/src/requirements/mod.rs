//! Requirements on the ADI derived from the triage, and failure-rate
//! estimation from field data.
//!
//! Requirement texts come from fixed English templates. Changing a template
//! changes the golden files under `tests/golden`.

mod frequency;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::funnel::{FunnelReport, StagePredicate};
use crate::heuristics::{
    AnswerValue, ClassificationTag, DataNeed, HeuristicStep, Question, TriageState,
};
use crate::spec_model::{InterfaceDescriptor, Monitor};

pub use frequency::{
    estimate_frequency, frequencies_csv, FrequencyError, FrequencyEstimate,
    DEFAULT_BENCHMARK_RATE_PER_HOUR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RequirementKind {
    /// From S5D answers: how the ADI detects a failure.
    Detection,
    /// From S1A answers: an interface replacing a driver input.
    Interface,
    /// From vehicle-level monitors: availability the subsystem must report.
    AvailabilitySignal,
    /// From the funnel residual: failures the ADI must handle.
    ResidualHandling,
}

impl RequirementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RequirementKind::Detection => "DETECTION",
            RequirementKind::Interface => "INTERFACE",
            RequirementKind::AvailabilitySignal => "AVAILABILITY_SIGNAL",
            RequirementKind::ResidualHandling => "RESIDUAL_HANDLING",
        }
    }
}

impl fmt::Display for RequirementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceKind {
    Monitor,
    Class,
    Question,
    Functions,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Monitor => "MONITOR",
            SourceKind::Class => "CLASS",
            SourceKind::Question => "QUESTION",
            SourceKind::Functions => "FUNCTIONS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSource {
    pub kind: SourceKind,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdiRequirement {
    /// `REQ-<source kind>-<source id>`.
    pub id: String,
    pub kind: RequirementKind,
    pub source: RequirementSource,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_need: Option<DataNeed>,
    /// Monitors the requirement traces back to, sorted.
    pub monitors: Vec<String>,
}

/// Requirements for one triage revision, ordered by kind then id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSet {
    pub revision: u64,
    pub requirements: Vec<AdiRequirement>,
}

impl RequirementSet {
    pub fn count(&self, kind: RequirementKind) -> usize {
        self.requirements.iter().filter(|r| r.kind == kind).count()
    }

    pub fn markdown_table(&self) -> String {
        let mut out = String::from("| id | kind | requirement |\n|---|---|---|\n");
        for r in &self.requirements {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                escape_cell(&r.id),
                r.kind,
                escape_cell(&r.text)
            );
        }
        out
    }
}

pub(crate) fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequirementError {
    #[error("the funnel has not been run")]
    FunnelNotRun,
    #[error("funnel is from revision {funnel}, state is at revision {state}")]
    RevisionMismatch { funnel: u64, state: u64 },
}

fn requirement_id(kind: SourceKind, id: &str) -> String {
    format!("REQ-{}-{}", kind.as_str(), id)
}

fn describe_monitor(m: Option<&Monitor>, id: &str) -> String {
    match m {
        Some(m) if !m.description.is_empty() => format!("{} ({id})", m.description),
        _ => id.to_owned(),
    }
}

fn interface_text(monitor: &str, iface: &InterfaceDescriptor) -> String {
    let mut s = format!(
        "The ADI shall provide `{}` as a {} interface",
        iface.id,
        iface.kind.as_str()
    );
    if let Some(hz) = iface.signal_frequency_hz {
        let _ = write!(s, " at {hz} Hz");
    }
    if let Some(g) = iface.granularity.as_deref().filter(|g| !g.is_empty()) {
        let _ = write!(s, " with granularity {g}");
    }
    let _ = write!(s, ", replacing the driver input watched by {monitor}.");
    if !iface.description.is_empty() {
        let _ = write!(s, " Content: {}.", iface.description.trim_end_matches('.'));
    }
    s
}

/// Derives the requirement set from the state and its funnel.
pub fn generate_requirements(
    state: &TriageState,
    funnel: Option<&FunnelReport>,
) -> Result<RequirementSet, RequirementError> {
    let funnel = funnel.ok_or(RequirementError::FunnelNotRun)?;
    if funnel.revision != state.revision() {
        return Err(RequirementError::RevisionMismatch {
            funnel: funnel.revision,
            state: state.revision(),
        });
    }
    let spec = state.spec();
    let mut out = Vec::new();

    for (qid, answer) in state.answers() {
        let Some(q) = state.question(qid) else {
            continue;
        };
        let monitor = spec.monitor(&q.target);
        match (&q.step, &answer.value) {
            (HeuristicStep::S1A, AnswerValue::InterfaceSpec(iface)) => out.push(AdiRequirement {
                id: requirement_id(SourceKind::Question, qid),
                kind: RequirementKind::Interface,
                source: source(SourceKind::Question, qid),
                text: interface_text(&describe_monitor(monitor, &q.target), iface),
                data_need: None,
                monitors: vec![q.target.clone()],
            }),
            (HeuristicStep::S5D, AnswerValue::DataNeed(need)) => out.push(AdiRequirement {
                id: requirement_id(SourceKind::Question, qid),
                kind: RequirementKind::Detection,
                source: source(SourceKind::Question, qid),
                text: format!(
                    "The ADI shall detect the failure watched by {} using `{}` read as {}.",
                    describe_monitor(monitor, &q.target),
                    need.data_item,
                    need.format.as_str()
                ),
                data_need: Some(need.clone()),
                monitors: vec![q.target.clone()],
            }),
            _ => {}
        }
    }

    out.extend(availability_requirements(state, funnel));

    for unit in &funnel.residual {
        let members = funnel.members_of(unit);
        let is_class = funnel.classes.iter().any(|c| &c.representative == unit);
        let kind = if is_class {
            SourceKind::Class
        } else {
            SourceKind::Monitor
        };
        let monitor = spec.monitor(unit);
        let mut text = format!(
            "The ADI shall bring the vehicle to a safe state when the subsystem reports the failure watched by {}",
            describe_monitor(monitor, unit)
        );
        if members.len() > 1 {
            let _ = write!(
                text,
                " or any of its {} positional repeats",
                members.len() - 1
            );
        }
        text.push('.');
        if let Some(reaction) = monitor
            .map(|m| m.system_reaction.as_str())
            .filter(|r| !r.is_empty())
        {
            let _ = write!(
                text,
                " Subsystem reaction: {}.",
                reaction.trim_end_matches('.')
            );
        }
        let data_need = state
            .answer(&Question::make_id(HeuristicStep::S5D, unit))
            .and_then(|a| match &a.value {
                AnswerValue::DataNeed(d) => Some(d.clone()),
                _ => None,
            });
        out.push(AdiRequirement {
            id: requirement_id(kind, unit),
            kind: RequirementKind::ResidualHandling,
            source: source(kind, unit),
            text,
            data_need,
            monitors: members,
        });
    }

    out.sort_by(|a, b| (a.kind, &a.id).cmp(&(b.kind, &b.id)));
    Ok(RequirementSet {
        revision: state.revision(),
        requirements: out,
    })
}

fn source(kind: SourceKind, id: &str) -> RequirementSource {
    RequirementSource {
        kind,
        id: id.to_owned(),
    }
}

/// A group of vehicle-level monitors sharing the same affected functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityGroup {
    /// Sorted function ids; empty when the monitors name none.
    pub functions: Vec<String>,
    pub monitors: Vec<String>,
}

/// Monitors dropped by a stage excluding `VEHICLE_LEVEL`, grouped by their
/// sorted affected functions.
pub fn availability_groups(state: &TriageState, funnel: &FunnelReport) -> Vec<AvailabilityGroup> {
    let mut groups: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
    for (spec, result) in funnel.stage_config.iter().zip(&funnel.stages) {
        let StagePredicate::ExcludeTag { tags } = &spec.predicate else {
            continue;
        };
        if !tags.contains(&ClassificationTag::VehicleLevel) {
            continue;
        }
        for id in &result.excluded {
            let Some(m) = state.spec().monitor(id) else {
                continue;
            };
            let vehicle_level = state
                .classifications()
                .get(id)
                .is_some_and(|t| t.contains(&ClassificationTag::VehicleLevel));
            if !vehicle_level {
                continue;
            }
            let mut functions = m.affected_functions.clone();
            functions.sort();
            functions.dedup();
            groups.entry(functions).or_default().push(id.clone());
        }
    }
    groups
        .into_iter()
        .map(|(functions, mut monitors)| {
            monitors.sort();
            AvailabilityGroup {
                functions,
                monitors,
            }
        })
        .collect()
}

fn availability_requirements(state: &TriageState, funnel: &FunnelReport) -> Vec<AdiRequirement> {
    availability_groups(state, funnel)
        .into_iter()
        .map(|g| {
            let key = if g.functions.is_empty() {
                "none".to_owned()
            } else {
                g.functions.join("+")
            };
            let what = if g.functions.is_empty() {
                "its functions".to_owned()
            } else {
                g.functions.join(", ")
            };
            AdiRequirement {
                id: requirement_id(SourceKind::Functions, &key),
                kind: RequirementKind::AvailabilitySignal,
                source: source(SourceKind::Functions, &key),
                text: format!(
                    "The subsystem shall transmit to the ADI the availability of {what} while any of {} monitor(s) for externally caused failures is active.",
                    g.monitors.len()
                ),
                data_need: None,
                monitors: g.monitors,
            }
        })
        .collect()
}
