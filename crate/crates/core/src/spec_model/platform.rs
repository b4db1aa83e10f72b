//! Platform model: the subsystems of a vehicle platform and how they
//! depend on each other through provided and consumed functions.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

/// A physical part of a subsystem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub id: String,
    #[serde(default)]
    pub description: String,
    /// The part is physically operated by the driver (pedals, levers).
    #[serde(default)]
    pub driver_interaction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantDescriptor {
    pub id: String,
    #[serde(default)]
    pub features: Vec<String>,
    /// Selects the monitors present in this variant. A tag matches a monitor
    /// when it is `*` or equals the monitor's part id, location or one of its
    /// affected functions.
    #[serde(default)]
    pub applicable_monitor_tags: Vec<String>,
    /// Subsystems that must be present when this variant is chosen.
    #[serde(default)]
    pub dependencies: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InterfaceKind {
    NetworkSignal,
    Analog,
    Mechanical,
}

impl InterfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InterfaceKind::NetworkSignal => "NETWORK_SIGNAL",
            InterfaceKind::Analog => "ANALOG",
            InterfaceKind::Mechanical => "MECHANICAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceDescriptor {
    pub id: String,
    pub kind: InterfaceKind,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemDescriptor {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub parts: Vec<Part>,
    #[serde(default)]
    pub functions_provided: Vec<String>,
    #[serde(default)]
    pub functions_consumed: Vec<String>,
    pub variants: Vec<VariantDescriptor>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceDescriptor>,
}

impl SubsystemDescriptor {
    pub fn part(&self, id: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn provides(&self, function: &str) -> bool {
        self.functions_provided.iter().any(|f| f == function)
    }

    pub fn consumes(&self, function: &str) -> bool {
        self.functions_consumed.iter().any(|f| f == function)
    }

    /// The variant ordered first by id.
    pub fn first_variant(&self) -> Option<&VariantDescriptor> {
        self.variants.iter().min_by(|a, b| a.id.cmp(&b.id))
    }
}

/// A subsystem that can take over part of a function when its primary
/// provider fails, e.g. the parking brake for the service brakes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FallbackEdge {
    pub function: String,
    pub primary_provider: String,
    pub fallback_provider: String,
    /// Fraction of the function the fallback can fulfil, in `[0, 1]`.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformModel {
    pub subsystems: Vec<SubsystemDescriptor>,
    #[serde(default)]
    pub fallback_edges: Vec<FallbackEdge>,
    /// Functions supplied from outside the platform (the driver, the ADI).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_sources: Vec<String>,
}

impl PlatformModel {
    pub fn subsystem(&self, id: &str) -> Option<&SubsystemDescriptor> {
        self.subsystems.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlatformError {
    #[error("schema violation at `{path}`: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("dangling {kind} reference `{id}`")]
    DanglingReference { kind: String, id: String },
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> PlatformError {
    PlatformError::SchemaViolation {
        path: path.into(),
        reason: reason.into(),
    }
}

fn dangling(kind: &str, id: &str) -> PlatformError {
    PlatformError::DanglingReference {
        kind: kind.to_owned(),
        id: id.to_owned(),
    }
}

/// Parses and checks a platform model JSON document.
pub fn parse_platform(text: &str) -> Result<PlatformModel, PlatformError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let model: PlatformModel = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    check_platform(&model)?;
    Ok(model)
}

/// Checks the structural invariants of a platform model.
pub fn check_platform(model: &PlatformModel) -> Result<(), PlatformError> {
    let mut subsystem_ids = HashSet::new();
    for (i, s) in model.subsystems.iter().enumerate() {
        if s.id.is_empty() {
            return Err(schema(format!("subsystems[{i}].id"), "empty id"));
        }
        if !subsystem_ids.insert(s.id.as_str()) {
            return Err(schema(
                format!("subsystems[{i}].id"),
                format!("duplicate subsystem `{}`", s.id),
            ));
        }
        if s.variants.is_empty() {
            return Err(schema(
                format!("subsystems[{i}].variants"),
                "at least one variant required",
            ));
        }
        let mut variants = HashSet::new();
        for (j, v) in s.variants.iter().enumerate() {
            if !variants.insert(v.id.as_str()) {
                return Err(schema(
                    format!("subsystems[{i}].variants[{j}].id"),
                    format!("duplicate variant `{}`", v.id),
                ));
            }
        }
        let mut parts = HashSet::new();
        for (j, p) in s.parts.iter().enumerate() {
            if !parts.insert(p.id.as_str()) {
                return Err(schema(
                    format!("subsystems[{i}].parts[{j}].id"),
                    format!("duplicate part `{}`", p.id),
                ));
            }
        }
    }

    for s in &model.subsystems {
        for v in &s.variants {
            if let Some(dep) = v
                .dependencies
                .iter()
                .find(|d| !subsystem_ids.contains(d.as_str()))
            {
                return Err(dangling("subsystem", dep));
            }
        }
    }

    let provided: BTreeSet<&str> = model
        .subsystems
        .iter()
        .flat_map(|s| s.functions_provided.iter().map(String::as_str))
        .chain(model.external_sources.iter().map(String::as_str))
        .collect();
    for s in &model.subsystems {
        if let Some(f) = s
            .functions_consumed
            .iter()
            .find(|f| !provided.contains(f.as_str()))
        {
            return Err(dangling("function", f));
        }
    }

    for (i, edge) in model.fallback_edges.iter().enumerate() {
        let path = format!("fallback_edges[{i}]");
        if !(0.0..=1.0).contains(&edge.coverage) {
            return Err(schema(
                format!("{path}.coverage"),
                "coverage must lie in [0, 1]",
            ));
        }
        if edge.primary_provider == edge.fallback_provider {
            return Err(schema(path, "primary and fallback provider must differ"));
        }
        let primary = model
            .subsystem(&edge.primary_provider)
            .ok_or_else(|| dangling("subsystem", &edge.primary_provider))?;
        if model.subsystem(&edge.fallback_provider).is_none() {
            return Err(dangling("subsystem", &edge.fallback_provider));
        }
        if !primary.provides(&edge.function) {
            return Err(dangling("function", &edge.function));
        }
    }
    Ok(())
}
