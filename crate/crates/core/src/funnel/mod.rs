//! Staged reduction of the monitor population to the safety-relevant
//! residue.
//!
//! A funnel is an ordered list of stages. Tag stages drop (or keep) monitors
//! by classification, the symmetry stage folds per-wheel repetitions into
//! classes, and the startup split separates what can be checked before the
//! drive from the residual monitors that need handling by the ADI.

mod symmetry;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::heuristics::{ClassificationTag, Classifications, TagSet, TriageState};
use crate::spec_model::{DiagnosticSpec, Monitor};

pub use symmetry::{
    normalize_positions, symmetry_reduce, symmetry_signature, SymmetryClass, POSITION_PLACEHOLDER,
};

/// What a stage does to its input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StagePredicate {
    /// Drop monitors carrying any of the tags.
    ExcludeTag {
        tags: Vec<ClassificationTag>,
    },
    /// Keep only monitors carrying at least one of the tags.
    IncludeTag {
        tags: Vec<ClassificationTag>,
    },
    SymmetryReduce,
    /// Partition survivors into startup-checkable and residual.
    SplitStartup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelStageSpec {
    pub id: String,
    pub name: String,
    #[serde(flatten)]
    pub predicate: StagePredicate,
}

impl FunnelStageSpec {
    pub fn new(id: &str, name: &str, predicate: StagePredicate) -> Self {
        Self {
            id: id.to_owned(),
            name: name.to_owned(),
            predicate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunnelError {
    #[error("invalid stage order: {0}")]
    InvalidStageOrder(String),
    #[error("invalid stage configuration: {0}")]
    Config(String),
}

/// The default linearization: vehicle-level exclusion, then the
/// lamp/trailer/driver exclusion, then symmetry, then the startup split.
pub fn default_stages() -> Vec<FunnelStageSpec> {
    vec![
        FunnelStageSpec::new(
            "vehicle_level",
            "Exclude failures originating outside the subsystem",
            StagePredicate::ExcludeTag {
                tags: vec![ClassificationTag::VehicleLevel],
            },
        ),
        FunnelStageSpec::new(
            "immediate_harm",
            "Exclude deferrable, trailer-only and driver-interface monitors",
            StagePredicate::ExcludeTag {
                tags: vec![
                    ClassificationTag::YellowDeferrable,
                    ClassificationTag::TrailerExcluded,
                    ClassificationTag::DriverInterface,
                ],
            },
        ),
        FunnelStageSpec::new(
            "symmetry",
            "Fold per-wheel repetitions",
            StagePredicate::SymmetryReduce,
        ),
        FunnelStageSpec::new(
            "startup_split",
            "Split off startup-checkable monitors",
            StagePredicate::SplitStartup,
        ),
    ]
}

/// Parses a JSON array of stage specs and checks its order.
pub fn parse_stages(text: &str) -> Result<Vec<FunnelStageSpec>, FunnelError> {
    let stages: Vec<FunnelStageSpec> =
        serde_json::from_str(text).map_err(|e| FunnelError::Config(e.to_string()))?;
    check_stages(&stages)?;
    Ok(stages)
}

/// Symmetry and split stages occur at most once; the split comes last;
/// stage ids are unique.
pub fn check_stages(stages: &[FunnelStageSpec]) -> Result<(), FunnelError> {
    let mut ids = std::collections::HashSet::new();
    for s in stages {
        if !ids.insert(s.id.as_str()) {
            return Err(FunnelError::InvalidStageOrder(format!(
                "duplicate stage id `{}`",
                s.id
            )));
        }
    }
    let count = |p: fn(&StagePredicate) -> bool| stages.iter().filter(|s| p(&s.predicate)).count();
    if count(|p| matches!(p, StagePredicate::SymmetryReduce)) > 1 {
        return Err(FunnelError::InvalidStageOrder(
            "SYMMETRY_REDUCE appears more than once".into(),
        ));
    }
    if count(|p| matches!(p, StagePredicate::SplitStartup)) > 1 {
        return Err(FunnelError::InvalidStageOrder(
            "SPLIT_STARTUP appears more than once".into(),
        ));
    }
    if let Some(pos) = stages
        .iter()
        .position(|s| s.predicate == StagePredicate::SplitStartup)
    {
        if pos + 1 != stages.len() {
            return Err(FunnelError::InvalidStageOrder(
                "SPLIT_STARTUP must be the last stage".into(),
            ));
        }
    }
    Ok(())
}

/// Counts and membership after one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageResult {
    pub id: String,
    pub name: String,
    pub input_count: usize,
    pub output_count: usize,
    /// Surviving monitor ids, or class representatives once symmetry ran.
    pub surviving: Vec<String>,
    /// Monitor ids dropped by this stage, classes expanded to their members.
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartupSplit {
    pub startup_count: usize,
    pub residual_count: usize,
    pub startup: Vec<String>,
    pub residual: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelReport {
    /// Triage revision the funnel was computed from.
    pub revision: u64,
    pub stage_config: Vec<FunnelStageSpec>,
    pub input_count: usize,
    pub stages: Vec<StageResult>,
    /// Classes produced by the symmetry stage; empty when it did not run.
    pub classes: Vec<SymmetryClass>,
    pub startup_split: Option<StartupSplit>,
    /// Units left at the end that are not startup-checkable.
    pub residual: Vec<String>,
}

impl FunnelReport {
    /// Count after the last stage; the input count for an empty stage list.
    pub fn final_count(&self) -> usize {
        self.stages
            .last()
            .map_or(self.input_count, |s| s.output_count)
    }

    /// Units alive after the last stage.
    pub fn survivors(&self) -> Vec<String> {
        match self.stages.last() {
            Some(s) => s.surviving.clone(),
            None => Vec::new(),
        }
    }

    /// Member monitor ids of a unit: its symmetry class if one was formed,
    /// otherwise the monitor itself.
    pub fn members_of(&self, unit: &str) -> Vec<String> {
        match self
            .classes
            .binary_search_by(|c| c.representative.as_str().cmp(unit))
        {
            Ok(i) => self.classes[i].members.clone(),
            Err(_) => vec![unit.to_owned()],
        }
    }

    /// The symmetry class containing `monitor_id`, if symmetry ran.
    pub fn class_of(&self, monitor_id: &str) -> Option<&SymmetryClass> {
        self.classes.iter().find(|c| {
            c.members
                .binary_search_by(|m| m.as_str().cmp(monitor_id))
                .is_ok()
        })
    }

    /// Monitor ids excluded by any stage, with the stage id.
    pub fn exclusions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.stages
            .iter()
            .flat_map(|s| s.excluded.iter().map(move |m| (s.id.as_str(), m.as_str())))
    }

    /// Two-column Markdown table of unit counts.
    pub fn markdown_table(&self) -> String {
        let mut out = String::from("| stage | count |\n|---|---|\n");
        let _ = writeln!(out, "| input | {} |", self.input_count);
        for (spec, s) in self.stage_config.iter().zip(&self.stages) {
            if spec.predicate != StagePredicate::SplitStartup {
                let _ = writeln!(out, "| {} | {} |", escape_cell(&s.id), s.output_count);
            }
        }
        if let Some(split) = &self.startup_split {
            let _ = writeln!(out, "| startup | {} |", split.startup_count);
            let _ = writeln!(out, "| residual | {} |", split.residual_count);
        }
        out
    }
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

/// A unit flowing through the funnel: a monitor, or a symmetry class
/// standing in for its members.
struct Unit<'a> {
    representative: &'a Monitor,
    members: Vec<&'a str>,
}

/// Runs the stages over the state's monitors.
pub fn run_funnel(
    state: &TriageState,
    stages: &[FunnelStageSpec],
) -> Result<FunnelReport, FunnelError> {
    run_funnel_on(
        state.spec(),
        state.classifications(),
        stages,
        state.revision(),
    )
}

/// [`run_funnel`] over explicit inputs.
pub fn run_funnel_on(
    spec: &DiagnosticSpec,
    classifications: &Classifications,
    stages: &[FunnelStageSpec],
    revision: u64,
) -> Result<FunnelReport, FunnelError> {
    check_stages(stages)?;
    let empty = TagSet::new();
    let tags_of = |m: &Monitor| classifications.get(&m.id).unwrap_or(&empty);

    let mut sorted: Vec<&Monitor> = spec.monitors.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut units: Vec<Unit> = sorted
        .into_iter()
        .map(|m| Unit {
            representative: m,
            members: vec![m.id.as_str()],
        })
        .collect();

    let input_count = units.len();
    let mut results = Vec::with_capacity(stages.len());
    let mut classes = Vec::new();
    let mut startup_split = None;

    for stage in stages {
        let before = units.len();
        let mut excluded: Vec<String> = Vec::new();
        match &stage.predicate {
            StagePredicate::ExcludeTag { tags } | StagePredicate::IncludeTag { tags } => {
                let include = matches!(stage.predicate, StagePredicate::IncludeTag { .. });
                let (keep, drop): (Vec<Unit>, Vec<Unit>) = units.into_iter().partition(|u| {
                    let hit = tags.iter().any(|t| tags_of(u.representative).contains(t));
                    hit == include
                });
                excluded = drop
                    .iter()
                    .flat_map(|u| u.members.iter().map(|m| (*m).to_owned()))
                    .collect();
                units = keep;
            }
            StagePredicate::SymmetryReduce => {
                let by_id: BTreeMap<&str, &Monitor> =
                    spec.monitors.iter().map(|m| (m.id.as_str(), m)).collect();
                classes = symmetry_reduce(
                    units
                        .iter()
                        .flat_map(|u| u.members.iter().map(|id| by_id[id])),
                );
                units = classes
                    .iter()
                    .map(|c| Unit {
                        representative: by_id[c.representative.as_str()],
                        members: c
                            .members
                            .iter()
                            .map(|id| by_id[id.as_str()].id.as_str())
                            .collect(),
                    })
                    .collect();
            }
            StagePredicate::SplitStartup => {
                let (startup, residual): (Vec<&Unit>, Vec<&Unit>) = units.iter().partition(|u| {
                    tags_of(u.representative).contains(&ClassificationTag::StartupCheckable)
                });
                let ids = |v: Vec<&Unit>| {
                    v.into_iter()
                        .map(|u| u.representative.id.clone())
                        .collect::<Vec<_>>()
                };
                let (startup, residual) = (ids(startup), ids(residual));
                startup_split = Some(StartupSplit {
                    startup_count: startup.len(),
                    residual_count: residual.len(),
                    startup,
                    residual,
                });
            }
        }
        excluded.sort();
        results.push(StageResult {
            id: stage.id.clone(),
            name: stage.name.clone(),
            input_count: before,
            output_count: units.len(),
            surviving: units.iter().map(|u| u.representative.id.clone()).collect(),
            excluded,
        });
    }

    let residual = match &startup_split {
        Some(split) => split.residual.clone(),
        None => units.iter().map(|u| u.representative.id.clone()).collect(),
    };
    Ok(FunnelReport {
        revision,
        stage_config: stages.to_vec(),
        input_count,
        stages: results,
        classes,
        startup_split,
        residual,
    })
}
