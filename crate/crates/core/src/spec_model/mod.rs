//! Diagnostic specifications, platform models and field data.
//!
//! A [`DiagnosticSpec`] is the list of monitors a subsystem's software runs,
//! together with the DTCs those monitors can set. The [`PlatformModel`]
//! describes the subsystems of the vehicle platform, the functions they
//! provide and consume, and which subsystems can partially stand in for
//! another one. Both are immutable once parsed.

mod csv_spec;
mod field_data;
mod location;
mod platform;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use csv_spec::{parse_spec, write_spec, SpecError, SPEC_HEADER};
pub use field_data::{parse_field_data, FieldDataError, FieldFailureRecord, FIELD_DATA_HEADER};
pub use location::{LocationTag, ParseLocationError};
pub use platform::{
    check_platform, parse_platform, FallbackEdge, InterfaceDescriptor, InterfaceKind, Part,
    PlatformError, PlatformModel, SubsystemDescriptor, VariantDescriptor,
};
pub use validate::{validate, Finding, ValidationError, ValidationReport, ValidationSummary};

/// Warning lamp set when a monitor triggers.
///
/// Red means the vehicle is unsafe and must stop immediately. Yellow means a
/// severe failure that does not require an immediate stop.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WarningLamp {
    Red,
    Yellow,
    #[default]
    None,
}

impl WarningLamp {
    pub const ALL: [WarningLamp; 3] = [WarningLamp::Red, WarningLamp::Yellow, WarningLamp::None];

    pub fn as_str(self) -> &'static str {
        match self {
            WarningLamp::Red => "RED",
            WarningLamp::Yellow => "YELLOW",
            WarningLamp::None => "NONE",
        }
    }

    /// True for a lamp that demands an immediate stop.
    pub fn requires_immediate_stop(self) -> bool {
        self == WarningLamp::Red
    }
}

impl fmt::Display for WarningLamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WarningLamp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WarningLamp::ALL
            .into_iter()
            .find(|lamp| lamp.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

/// Where the fault a monitor detects originates.
///
/// `External` covers faults outside the subsystem, e.g. missing CAN signals
/// from other ECUs or power supply problems.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureOrigin {
    #[default]
    Internal,
    External,
}

impl FailureOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureOrigin::Internal => "INTERNAL",
            FailureOrigin::External => "EXTERNAL",
        }
    }
}

impl FromStr for FailureOrigin {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INTERNAL" => Ok(FailureOrigin::Internal),
            "EXTERNAL" => Ok(FailureOrigin::External),
            _ => Err(()),
        }
    }
}

/// When in the drive cycle a monitor can detect its fault.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DetectionPhase {
    Startup,
    Continuous,
    #[default]
    Unknown,
}

impl DetectionPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectionPhase::Startup => "STARTUP",
            DetectionPhase::Continuous => "CONTINUOUS",
            DetectionPhase::Unknown => "UNKNOWN",
        }
    }
}

impl FromStr for DetectionPhase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "STARTUP" => Ok(DetectionPhase::Startup),
            "CONTINUOUS" => Ok(DetectionPhase::Continuous),
            "UNKNOWN" => Ok(DetectionPhase::Unknown),
            _ => Err(()),
        }
    }
}

/// One row of a diagnostic specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub id: String,
    pub description: String,
    pub trigger_condition: String,
    pub healing_condition: String,
    pub system_reaction: String,
    pub dtc_codes: Vec<String>,
    pub lamp: WarningLamp,
    pub affected_functions: Vec<String>,
    pub part_id: Option<String>,
    pub location: Option<LocationTag>,
    pub failure_origin: FailureOrigin,
    pub trailer_related: bool,
    /// Only meaningful for trailer monitors; always true otherwise.
    pub affects_tractor: bool,
    pub detection_phase: DetectionPhase,
}

/// A diagnostic trouble code and the freeze-frame data recorded with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dtc {
    pub code: String,
    pub description: String,
    pub snapshot_fields: Vec<String>,
}

/// A parsed diagnostic specification for one subsystem.
///
/// Monitors keep their file order. DTCs are sorted by code and contain every
/// code referenced by any monitor. The monitor to DTC mapping is many to many
/// and may be empty on either side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSpec {
    pub subsystem_id: String,
    pub monitors: Vec<Monitor>,
    pub dtcs: Vec<Dtc>,
    pub source_meta: String,
}

impl DiagnosticSpec {
    /// An empty spec for `subsystem_id`.
    pub fn empty(subsystem_id: impl Into<String>) -> Self {
        Self {
            subsystem_id: subsystem_id.into(),
            monitors: Vec::new(),
            dtcs: Vec::new(),
            source_meta: String::new(),
        }
    }

    pub fn monitor(&self, id: &str) -> Option<&Monitor> {
        self.monitors.iter().find(|m| m.id == id)
    }

    pub fn dtc(&self, code: &str) -> Option<&Dtc> {
        self.dtcs
            .binary_search_by(|d| d.code.as_str().cmp(code))
            .ok()
            .map(|i| &self.dtcs[i])
    }
}
