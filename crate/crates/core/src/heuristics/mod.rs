//! The triage heuristics: deterministic classification rules plus the
//! expert questionnaire for the sub-steps that need human judgment.

mod answer;
mod questions;
mod state;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::spec_model::{
    DetectionPhase, DiagnosticSpec, FailureOrigin, PlatformModel, WarningLamp,
};

pub use answer::{
    Answer, AnswerKind, AnswerParseError, AnswerRecord, AnswerValue, DataFormat, DataNeed,
    DurationLimits,
};
pub use questions::{generate_questions, Question, TargetKind};
pub use state::{completeness, AnswerWarning, Completeness, TriageError, TriageState};

/// The steps and sub-steps of the heuristic method, in method order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HeuristicStep {
    S1,
    S1A,
    S1B,
    S1C,
    S2,
    S2A,
    S2B,
    S2C,
    S3,
    S4,
    S4A,
    S4B,
    S5,
    S5A,
    S5B,
    S5C,
    S5D,
    S6,
    S6A,
    S7,
    S8,
    S8A,
    S8B,
    S9,
    S10,
}

impl HeuristicStep {
    pub const ALL: [HeuristicStep; 25] = [
        HeuristicStep::S1,
        HeuristicStep::S1A,
        HeuristicStep::S1B,
        HeuristicStep::S1C,
        HeuristicStep::S2,
        HeuristicStep::S2A,
        HeuristicStep::S2B,
        HeuristicStep::S2C,
        HeuristicStep::S3,
        HeuristicStep::S4,
        HeuristicStep::S4A,
        HeuristicStep::S4B,
        HeuristicStep::S5,
        HeuristicStep::S5A,
        HeuristicStep::S5B,
        HeuristicStep::S5C,
        HeuristicStep::S5D,
        HeuristicStep::S6,
        HeuristicStep::S6A,
        HeuristicStep::S7,
        HeuristicStep::S8,
        HeuristicStep::S8A,
        HeuristicStep::S8B,
        HeuristicStep::S9,
        HeuristicStep::S10,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicStep::S1 => "S1",
            HeuristicStep::S1A => "S1A",
            HeuristicStep::S1B => "S1B",
            HeuristicStep::S1C => "S1C",
            HeuristicStep::S2 => "S2",
            HeuristicStep::S2A => "S2A",
            HeuristicStep::S2B => "S2B",
            HeuristicStep::S2C => "S2C",
            HeuristicStep::S3 => "S3",
            HeuristicStep::S4 => "S4",
            HeuristicStep::S4A => "S4A",
            HeuristicStep::S4B => "S4B",
            HeuristicStep::S5 => "S5",
            HeuristicStep::S5A => "S5A",
            HeuristicStep::S5B => "S5B",
            HeuristicStep::S5C => "S5C",
            HeuristicStep::S5D => "S5D",
            HeuristicStep::S6 => "S6",
            HeuristicStep::S6A => "S6A",
            HeuristicStep::S7 => "S7",
            HeuristicStep::S8 => "S8",
            HeuristicStep::S8A => "S8A",
            HeuristicStep::S8B => "S8B",
            HeuristicStep::S9 => "S9",
            HeuristicStep::S10 => "S10",
        }
    }
}

impl fmt::Display for HeuristicStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeuristicStep {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeuristicStep::ALL
            .into_iter()
            .find(|step| step.as_str() == s)
            .ok_or(())
    }
}

/// Tags assigned to monitors by the automatic rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassificationTag {
    /// Monitors a part the driver physically operates.
    DriverInterface,
    /// Detects a fault originating outside the subsystem.
    VehicleLevel,
    /// Sets the yellow lamp; checkable before automated driving starts.
    YellowDeferrable,
    /// Sets the red lamp; relevant within the current drive cycle.
    RedImmediate,
    /// Trailer monitor that does not influence the tractor.
    TrailerExcluded,
    StartupCheckable,
    /// Survives the funnel and needs an ADI requirement.
    NeedsAdiRequirement,
}

impl ClassificationTag {
    pub const ALL: [ClassificationTag; 7] = [
        ClassificationTag::DriverInterface,
        ClassificationTag::VehicleLevel,
        ClassificationTag::YellowDeferrable,
        ClassificationTag::RedImmediate,
        ClassificationTag::TrailerExcluded,
        ClassificationTag::StartupCheckable,
        ClassificationTag::NeedsAdiRequirement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassificationTag::DriverInterface => "DRIVER_INTERFACE",
            ClassificationTag::VehicleLevel => "VEHICLE_LEVEL",
            ClassificationTag::YellowDeferrable => "YELLOW_DEFERRABLE",
            ClassificationTag::RedImmediate => "RED_IMMEDIATE",
            ClassificationTag::TrailerExcluded => "TRAILER_EXCLUDED",
            ClassificationTag::StartupCheckable => "STARTUP_CHECKABLE",
            ClassificationTag::NeedsAdiRequirement => "NEEDS_ADI_REQUIREMENT",
        }
    }
}

impl fmt::Display for ClassificationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassificationTag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassificationTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or(())
    }
}

pub type TagSet = BTreeSet<ClassificationTag>;

/// Monitor id to the tags the automatic rules assigned.
pub type Classifications = BTreeMap<String, TagSet>;

/// Applies the automatic classification rules to every monitor.
///
/// The rules are independent of each other:
/// * `DRIVER_INTERFACE` when the monitor's part has `driver_interaction`;
/// * `VEHICLE_LEVEL` when the fault originates outside the subsystem;
/// * `RED_IMMEDIATE` / `YELLOW_DEFERRABLE` from the lamp;
/// * `TRAILER_EXCLUDED` for trailer monitors that do not affect the tractor;
/// * `STARTUP_CHECKABLE` when the monitor runs at startup.
pub fn auto_classify(spec: &DiagnosticSpec, platform: &PlatformModel) -> Classifications {
    let subsystem = platform.subsystem(&spec.subsystem_id);
    spec.monitors
        .iter()
        .map(|m| {
            let mut tags = TagSet::new();
            let driver_part = m
                .part_id
                .as_deref()
                .and_then(|p| subsystem.and_then(|s| s.part(p)))
                .is_some_and(|p| p.driver_interaction);
            if driver_part {
                tags.insert(ClassificationTag::DriverInterface);
            }
            if m.failure_origin == FailureOrigin::External {
                tags.insert(ClassificationTag::VehicleLevel);
            }
            match m.lamp {
                WarningLamp::Red => {
                    tags.insert(ClassificationTag::RedImmediate);
                }
                WarningLamp::Yellow => {
                    tags.insert(ClassificationTag::YellowDeferrable);
                }
                WarningLamp::None => {}
            }
            if m.trailer_related && !m.affects_tractor {
                tags.insert(ClassificationTag::TrailerExcluded);
            }
            if m.detection_phase == DetectionPhase::Startup {
                tags.insert(ClassificationTag::StartupCheckable);
            }
            (m.id.clone(), tags)
        })
        .collect()
}
