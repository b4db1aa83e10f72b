//! Failure propagation across the platform and minimum-configuration
//! analysis.

mod graph;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::heuristics::{ClassificationTag, TriageState};
use crate::spec_model::{Monitor, PlatformModel, VariantDescriptor};

pub use graph::{build_graph, DependencyGraph, FunctionEdge};
pub use trace::{
    direct_consumers, propagate, trace_monitor, AffectedSubsystem, Containment, PropagationTrace,
    Reaction,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PropagationError {
    #[error("unknown monitor `{0}`")]
    UnknownMonitor(String),
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),
    #[error("monitor `{0}` does not set the red lamp")]
    NotRedMonitor(String),
    #[error("subsystem `{subsystem}` has no variant `{variant}`")]
    UnknownVariant { subsystem: String, variant: String },
}

/// Traces a monitor of the state's spec, seeded at the spec's subsystem.
pub fn trace(
    monitor_id: &str,
    state: &TriageState,
    detected: bool,
    graph: &DependencyGraph,
) -> Result<PropagationTrace, PropagationError> {
    let m = state
        .spec()
        .monitor(monitor_id)
        .ok_or_else(|| PropagationError::UnknownMonitor(monitor_id.to_owned()))?;
    Ok(trace_monitor(
        graph,
        &state.spec().subsystem_id,
        m,
        detected,
    ))
}

/// Detected and undetected traces of one monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePair {
    pub monitor_id: String,
    pub detected: PropagationTrace,
    pub undetected: PropagationTrace,
}

/// Traces for a set of monitors, tagged with the revision they came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSet {
    pub revision: u64,
    /// Sorted by monitor id.
    pub traces: Vec<TracePair>,
}

impl TraceSet {
    pub fn get(&self, monitor_id: &str) -> Option<&TracePair> {
        self.traces
            .binary_search_by(|t| t.monitor_id.as_str().cmp(monitor_id))
            .ok()
            .map(|i| &self.traces[i])
    }
}

/// Traces both cases for every listed monitor.
pub fn trace_all<'a>(
    state: &TriageState,
    graph: &DependencyGraph,
    monitor_ids: impl IntoIterator<Item = &'a str>,
) -> Result<TraceSet, PropagationError> {
    let mut traces = Vec::new();
    for id in monitor_ids {
        traces.push(TracePair {
            monitor_id: id.to_owned(),
            detected: trace(id, state, true, graph)?,
            undetected: trace(id, state, false, graph)?,
        });
    }
    traces.sort_by(|a, b| a.monitor_id.cmp(&b.monitor_id));
    traces.dedup_by(|a, b| a.monitor_id == b.monitor_id);
    Ok(TraceSet {
        revision: state.revision(),
        traces,
    })
}

/// A subsystem that can take over part of a failed function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackCandidate {
    pub fallback_subsystem: String,
    pub function: String,
    pub coverage: f64,
}

/// Fallback edges for a red-lamp monitor's functions, best coverage first.
pub fn fallback_candidates(
    monitor_id: &str,
    state: &TriageState,
    graph: &DependencyGraph,
) -> Result<Vec<FallbackCandidate>, PropagationError> {
    let m = state
        .spec()
        .monitor(monitor_id)
        .ok_or_else(|| PropagationError::UnknownMonitor(monitor_id.to_owned()))?;
    let red = state
        .classifications()
        .get(monitor_id)
        .is_some_and(|t| t.contains(&ClassificationTag::RedImmediate));
    if !red {
        return Err(PropagationError::NotRedMonitor(monitor_id.to_owned()));
    }
    Ok(candidates_for(graph, &state.spec().subsystem_id, m))
}

pub(crate) fn candidates_for(
    graph: &DependencyGraph,
    subsystem_id: &str,
    m: &Monitor,
) -> Vec<FallbackCandidate> {
    let mut out: Vec<FallbackCandidate> = graph
        .fallback_edges
        .iter()
        .filter(|e| {
            e.primary_provider == subsystem_id && m.affected_functions.contains(&e.function)
        })
        .map(|e| FallbackCandidate {
            fallback_subsystem: e.fallback_provider.clone(),
            function: e.function.clone(),
            coverage: e.coverage,
        })
        .collect();
    out.sort_by(|a, b| {
        b.coverage
            .total_cmp(&a.coverage)
            .then_with(|| a.fallback_subsystem.cmp(&b.fallback_subsystem))
            .then_with(|| a.function.cmp(&b.function))
    });
    out
}

/// Score of one variant; lower is better, compared field by field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantScore {
    pub variant_id: String,
    pub monitor_count: usize,
    pub external_impact_count: usize,
    pub induced_dependencies: Vec<String>,
}

impl VariantScore {
    /// The ranking key: external impact, dependency count, then id.
    pub fn key(&self) -> (usize, usize, &str) {
        (
            self.external_impact_count,
            self.induced_dependencies.len(),
            &self.variant_id,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinConfigResult {
    pub revision: u64,
    pub subsystem_id: String,
    pub chosen_variant: String,
    pub external_impact_count: usize,
    pub induced_dependencies: Vec<String>,
    /// All variants, best first.
    pub ranking: Vec<VariantScore>,
}

/// Variant used for each dependency when computing dependency closures.
/// Subsystems without a binding use their first variant by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinConfigOptions {
    #[serde(default)]
    pub variant_bindings: BTreeMap<String, String>,
}

/// True when a variant tag selects the monitor.
pub fn variant_applies(variant: &VariantDescriptor, m: &Monitor) -> bool {
    variant.applicable_monitor_tags.iter().any(|tag| {
        tag == "*"
            || m.part_id.as_deref() == Some(tag.as_str())
            || m.location.as_ref().is_some_and(|l| l.as_str() == tag)
            || m.affected_functions.contains(tag)
    })
}

/// Transitive dependencies of `variant`, excluding `subsystem_id`, sorted.
pub fn dependency_closure(
    platform: &PlatformModel,
    subsystem_id: &str,
    variant: &VariantDescriptor,
    options: &MinConfigOptions,
) -> Result<Vec<String>, PropagationError> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<String> = variant.dependencies.clone();
    while let Some(dep) = stack.pop() {
        if dep == subsystem_id || !seen.insert(dep.clone()) {
            continue;
        }
        let s = platform
            .subsystem(&dep)
            .ok_or_else(|| PropagationError::UnknownSubsystem(dep.clone()))?;
        let bound = match options.variant_bindings.get(&dep) {
            Some(v) => s.variants.iter().find(|x| &x.id == v).ok_or_else(|| {
                PropagationError::UnknownVariant {
                    subsystem: dep.clone(),
                    variant: v.clone(),
                }
            })?,
            None => match s.first_variant() {
                Some(v) => v,
                None => continue,
            },
        };
        stack.extend(bound.dependencies.iter().cloned());
    }
    Ok(seen.into_iter().collect())
}

/// Ranks the variants of `subsystem_id` and picks the best.
pub fn min_config(
    subsystem_id: &str,
    state: &TriageState,
    graph: &DependencyGraph,
) -> Result<MinConfigResult, PropagationError> {
    min_config_with(subsystem_id, state, graph, &MinConfigOptions::default())
}

pub fn min_config_with(
    subsystem_id: &str,
    state: &TriageState,
    graph: &DependencyGraph,
    options: &MinConfigOptions,
) -> Result<MinConfigResult, PropagationError> {
    let platform = state.platform();
    let subsystem = platform
        .subsystem(subsystem_id)
        .ok_or_else(|| PropagationError::UnknownSubsystem(subsystem_id.to_owned()))?;
    let spec = state.spec();
    let monitors: &[Monitor] = if spec.subsystem_id == subsystem_id {
        &spec.monitors
    } else {
        &[]
    };

    // External impact per monitor does not depend on the variant.
    let impact: BTreeMap<&str, bool> = monitors
        .iter()
        .map(|m| {
            let vehicle_level = state
                .classifications()
                .get(&m.id)
                .is_some_and(|t| t.contains(&ClassificationTag::VehicleLevel));
            let spreads =
                trace_monitor(graph, subsystem_id, m, false).containment == Containment::Propagates;
            (m.id.as_str(), vehicle_level || spreads)
        })
        .collect();

    let mut ranking = Vec::with_capacity(subsystem.variants.len());
    for v in &subsystem.variants {
        let selected: Vec<&Monitor> = monitors.iter().filter(|m| variant_applies(v, m)).collect();
        ranking.push(VariantScore {
            variant_id: v.id.clone(),
            monitor_count: selected.len(),
            external_impact_count: selected.iter().filter(|m| impact[m.id.as_str()]).count(),
            induced_dependencies: dependency_closure(platform, subsystem_id, v, options)?,
        });
    }
    ranking.sort_by(|a, b| a.key().cmp(&b.key()));
    let best = &ranking[0];
    Ok(MinConfigResult {
        revision: state.revision(),
        subsystem_id: subsystem_id.to_owned(),
        chosen_variant: best.variant_id.clone(),
        external_impact_count: best.external_impact_count,
        induced_dependencies: best.induced_dependencies.clone(),
        ranking,
    })
}
