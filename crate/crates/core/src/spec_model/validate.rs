//! Cross-reference checks between a diagnostic specification and the
//! platform model.

use serde::{Deserialize, Serialize};

use super::{DiagnosticSpec, PlatformModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Finding {
    /// The monitor names a part the subsystem does not have.
    UnknownPart { monitor_id: String, part_id: String },
    /// The monitor affects a function the subsystem neither provides nor consumes.
    UndeclaredFunction {
        monitor_id: String,
        function: String,
    },
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finding::UnknownPart {
                monitor_id,
                part_id,
            } => {
                write!(
                    f,
                    "monitor {monitor_id}: part `{part_id}` not found in subsystem"
                )
            }
            Finding::UndeclaredFunction {
                monitor_id,
                function,
            } => {
                write!(
                    f,
                    "monitor {monitor_id}: function `{function}` not declared by subsystem"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub monitors_checked: usize,
    pub unknown_parts: usize,
    pub undeclared_functions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub summary: ValidationSummary,
}

impl ValidationReport {
    /// True iff spec and platform are fully cross-consistent.
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("subsystem `{0}` is not part of the platform")]
    SubsystemNotInPlatform(String),
}

pub fn validate(
    spec: &DiagnosticSpec,
    platform: &PlatformModel,
) -> Result<ValidationReport, ValidationError> {
    let subsystem = platform
        .subsystem(&spec.subsystem_id)
        .ok_or_else(|| ValidationError::SubsystemNotInPlatform(spec.subsystem_id.clone()))?;

    let mut report = ValidationReport::default();
    for m in &spec.monitors {
        if let Some(part) = &m.part_id {
            if subsystem.part(part).is_none() {
                report.findings.push(Finding::UnknownPart {
                    monitor_id: m.id.clone(),
                    part_id: part.clone(),
                });
                report.summary.unknown_parts += 1;
            }
        }
        for function in &m.affected_functions {
            if !subsystem.provides(function) && !subsystem.consumes(function) {
                report.findings.push(Finding::UndeclaredFunction {
                    monitor_id: m.id.clone(),
                    function: function.clone(),
                });
                report.summary.undeclared_functions += 1;
            }
        }
    }
    report.summary.monitors_checked = spec.monitors.len();
    Ok(report)
}
