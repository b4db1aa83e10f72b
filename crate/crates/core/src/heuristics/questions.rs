//! Questionnaire generation.
//!
//! Each judgment-requiring sub-step has one fixed English template. The
//! question id is `<step>:<target>`, so the question set is reproducible from
//! the spec, the platform and the classifications alone.

use serde::{Deserialize, Serialize};

use super::answer::AnswerKind;
use super::{ClassificationTag, Classifications, HeuristicStep};
use crate::spec_model::{DiagnosticSpec, Monitor, PlatformModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetKind {
    Monitor,
    Subsystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub step: HeuristicStep,
    pub target: String,
    pub target_kind: TargetKind,
    pub prompt: String,
    pub answer_kind: AnswerKind,
}

impl Question {
    pub fn make_id(step: HeuristicStep, target: &str) -> String {
        format!("{step}:{target}")
    }
}

/// Steps asked once per monitor, with their answer kinds.
const PER_MONITOR: [(HeuristicStep, AnswerKind); 7] = [
    (HeuristicStep::S2A, AnswerKind::Boolean),
    (HeuristicStep::S2B, AnswerKind::DurationLimits),
    (HeuristicStep::S2C, AnswerKind::Text),
    (HeuristicStep::S5A, AnswerKind::Text),
    (HeuristicStep::S5B, AnswerKind::Text),
    (HeuristicStep::S5C, AnswerKind::Boolean),
    (HeuristicStep::S5D, AnswerKind::DataNeed),
];

const PER_DRIVER_MONITOR: [(HeuristicStep, AnswerKind); 3] = [
    (HeuristicStep::S1A, AnswerKind::InterfaceSpec),
    (HeuristicStep::S1B, AnswerKind::Text),
    (HeuristicStep::S1C, AnswerKind::Text),
];

const PER_SUBSYSTEM: [(HeuristicStep, AnswerKind); 4] = [
    (HeuristicStep::S6, AnswerKind::Text),
    (HeuristicStep::S6A, AnswerKind::Text),
    (HeuristicStep::S8A, AnswerKind::Text),
    (HeuristicStep::S8B, AnswerKind::Text),
];

fn monitor_prompt(
    step: HeuristicStep,
    m: &Monitor,
    platform: &PlatformModel,
    subsystem_id: &str,
) -> String {
    let head = format!("Monitor {} ({})", m.id, m.description);
    let functions = if m.affected_functions.is_empty() {
        "its functions".to_owned()
    } else {
        m.affected_functions.join(", ")
    };
    match step {
        HeuristicStep::S1A => format!(
            "{head} watches a driver-operated part ({}). Which interface should deliver the same input from the ADI? Give its kind, signal rate and granularity.",
            m.part_id.as_deref().unwrap_or("unknown part")
        ),
        HeuristicStep::S1B => format!(
            "{head}: what known limitations exist in providing that interface electronically, e.g. legacy expectations on input rate or network load?"
        ),
        HeuristicStep::S1C => format!("{head}: would electronic control improve or reduce the performance of the subsystem, and how?"),
        HeuristicStep::S2A => format!("{head}: was the design of this monitor based on how the driver perceives the vehicle? (yes/no)"),
        HeuristicStep::S2B => format!(
            "{head}: must the time to reach the failsafe mode change when no driver is present? Give the acceptable limits in milliseconds."
        ),
        HeuristicStep::S2C => format!("{head}: summarize how this failure can influence functions at vehicle level."),
        HeuristicStep::S4A => format!(
            "{head} sets the yellow lamp. Can the subsystem reach a degraded mode using redundancy inside the subsystem? Answer yes or no and describe the mode."
        ),
        HeuristicStep::S4B => {
            let candidates: Vec<String> = platform
                .fallback_edges
                .iter()
                .filter(|e| e.primary_provider == subsystem_id && m.affected_functions.contains(&e.function))
                .map(|e| format!("@{} for {} ({:.0}%)", e.fallback_provider, e.function, e.coverage * 100.0))
                .collect();
            let known = if candidates.is_empty() {
                "none recorded".to_owned()
            } else {
                candidates.join(", ")
            };
            format!(
                "{head} sets the red lamp. Which other subsystems can fulfil part of {functions}? Known fallbacks: {known}. Refer to subsystems as @ID."
            )
        }
        HeuristicStep::S5A => format!("{head}: which information is needed to diagnose this failure?"),
        HeuristicStep::S5B => format!("{head}: how could a driver currently notice this failure, e.g. sounds or jerks?"),
        HeuristicStep::S5C => format!("{head}: was the criticality of this monitor decided with driver detectability in mind? (yes/no)"),
        HeuristicStep::S5D => format!(
            "{head}: how could the ADI detect this failure instead? Name the data item and its format (network signal, ECU memory, other)."
        ),
        _ => head,
    }
}

fn subsystem_prompt(step: HeuristicStep, subsystem_id: &str, platform: &PlatformModel) -> String {
    match step {
        HeuristicStep::S6 => format!(
            "Subsystem {subsystem_id}: which safety checks does the driver perform today, for example latent-fault checks before driving?"
        ),
        HeuristicStep::S6A => format!(
            "Subsystem {subsystem_id}: how can those checks be performed electronically? Only at the start of the drive cycle, or regularly while driving?"
        ),
        HeuristicStep::S8A => {
            let variants: Vec<&str> = platform
                .subsystem(subsystem_id)
                .map(|s| s.variants.iter().map(|v| v.id.as_str()).collect())
                .unwrap_or_default();
            format!(
                "Subsystem {subsystem_id}: which minimum configuration is needed without a driver? Known variants: {}.",
                variants.join(", ")
            )
        }
        HeuristicStep::S8B => format!(
            "Subsystem {subsystem_id}: which other subsystems must be present in the vehicle if that minimum configuration is chosen?"
        ),
        _ => format!("Subsystem {subsystem_id}"),
    }
}

/// Generates the questionnaire, ordered by step then target id.
///
/// A spec without monitors yields no questions.
pub fn generate_questions(
    spec: &DiagnosticSpec,
    platform: &PlatformModel,
    classifications: &Classifications,
) -> Vec<Question> {
    let mut out = Vec::new();
    if spec.monitors.is_empty() {
        return out;
    }
    let subsystem_id = spec.subsystem_id.as_str();
    let mut push_monitor = |step: HeuristicStep, kind: AnswerKind, m: &Monitor| {
        out.push(Question {
            id: Question::make_id(step, &m.id),
            step,
            target: m.id.clone(),
            target_kind: TargetKind::Monitor,
            prompt: monitor_prompt(step, m, platform, subsystem_id),
            answer_kind: kind,
        });
    };

    for m in &spec.monitors {
        let tags = classifications.get(&m.id);
        let has = |t: ClassificationTag| tags.is_some_and(|s| s.contains(&t));
        if has(ClassificationTag::DriverInterface) {
            for (step, kind) in PER_DRIVER_MONITOR {
                push_monitor(step, kind, m);
            }
        }
        for (step, kind) in PER_MONITOR {
            push_monitor(step, kind, m);
        }
        if has(ClassificationTag::YellowDeferrable) {
            push_monitor(HeuristicStep::S4A, AnswerKind::Text, m);
        }
        if has(ClassificationTag::RedImmediate) {
            push_monitor(HeuristicStep::S4B, AnswerKind::Text, m);
        }
    }
    for (step, kind) in PER_SUBSYSTEM {
        out.push(Question {
            id: Question::make_id(step, subsystem_id),
            step,
            target: subsystem_id.to_owned(),
            target_kind: TargetKind::Subsystem,
            prompt: subsystem_prompt(step, subsystem_id, platform),
            answer_kind: kind,
        });
    }

    out.sort_by(|a, b| a.step.cmp(&b.step).then_with(|| a.target.cmp(&b.target)));
    out
}
