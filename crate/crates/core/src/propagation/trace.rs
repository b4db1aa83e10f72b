//! Failure propagation over function edges.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::DependencyGraph;
use crate::spec_model::Monitor;

/// How far a failure travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Containment {
    /// The reaction disables or degrades every seed function; only direct
    /// consumers are affected.
    ContainedByReaction,
    Propagates,
    /// Nobody consumes the seed functions.
    NoConsumers,
}

impl Containment {
    pub fn as_str(self) -> &'static str {
        match self {
            Containment::ContainedByReaction => "CONTAINED_BY_REACTION",
            Containment::Propagates => "PROPAGATES",
            Containment::NoConsumers => "NO_CONSUMERS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffectedSubsystem {
    pub subsystem_id: String,
    /// Function through which the subsystem was first reached.
    pub via_function: String,
    pub hops: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationTrace {
    pub monitor_id: String,
    pub detected: bool,
    /// In BFS order; hops never decrease along the list.
    pub affected_subsystems: Vec<AffectedSubsystem>,
    pub containment: Containment,
    /// Targets of `notify` phrases in the reaction, when detected.
    pub notified: Vec<String>,
}

/// The structured part of a system reaction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reaction {
    /// Lower-cased function names.
    pub disabled: BTreeSet<String>,
    pub degraded: BTreeSet<String>,
    pub notified: Vec<String>,
}

impl Reaction {
    /// Scans for `disable <function>`, `degrade <function>` and
    /// `notify <subsystem>`; verbs are case-insensitive and everything else
    /// is ignored.
    pub fn parse(text: &str) -> Self {
        let tokens: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || matches!(c, ';' | ',' | '.'))
            .filter(|t| !t.is_empty())
            .collect();
        let mut r = Reaction::default();
        for pair in tokens.windows(2) {
            let arg = pair[1];
            match pair[0].to_ascii_lowercase().as_str() {
                "disable" => {
                    r.disabled.insert(arg.to_lowercase());
                }
                "degrade" => {
                    r.degraded.insert(arg.to_lowercase());
                }
                "notify" if !r.notified.iter().any(|n| n == arg) => {
                    r.notified.push(arg.to_owned());
                }
                _ => {}
            }
        }
        r
    }

    /// True when the reaction disables or degrades `function`.
    pub fn handles(&self, function: &str) -> bool {
        let f = function.to_lowercase();
        self.disabled.contains(&f) || self.degraded.contains(&f)
    }

    /// True when every seed function is handled (and there is at least one).
    pub fn contains_all(&self, seeds: &[String]) -> bool {
        !seeds.is_empty() && seeds.iter().all(|f| self.handles(f))
    }
}

/// Subsystems consuming one of `seeds` directly from `origin`, at hop 1.
pub fn direct_consumers(
    graph: &DependencyGraph,
    origin: &str,
    seeds: &[String],
) -> Vec<AffectedSubsystem> {
    let seeds: BTreeSet<&str> = seeds.iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    graph
        .edges_from(origin)
        .filter(|e| seeds.contains(e.function.as_str()))
        .filter(|e| seen.insert(e.consumer.clone()))
        .map(|e| AffectedSubsystem {
            subsystem_id: e.consumer.clone(),
            via_function: e.function.clone(),
            hops: 1,
        })
        .collect()
}

/// Worst-case breadth-first propagation from `origin`'s `seeds`: every
/// subsystem reached has all the functions it provides tainted. The origin
/// itself is never listed but is expanded again if a cycle leads back to it.
pub fn propagate(
    graph: &DependencyGraph,
    origin: &str,
    seeds: &[String],
) -> Vec<AffectedSubsystem> {
    let mut tainted: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    tainted.insert(origin, seeds.iter().map(String::as_str).collect());
    let mut queue = VecDeque::from([(origin, 0u32)]);
    let mut affected: Vec<AffectedSubsystem> = Vec::new();
    let mut listed = BTreeSet::new();
    let mut origin_fully_tainted = false;

    while let Some((node, hops)) = queue.pop_front() {
        let node_taint = tainted.get(node).cloned().unwrap_or_default();
        for e in graph.edges_from(node) {
            if !node_taint.contains(e.function.as_str()) {
                continue;
            }
            let consumer = e.consumer.as_str();
            if consumer == origin {
                if !origin_fully_tainted {
                    origin_fully_tainted = true;
                    let all: BTreeSet<&str> = graph
                        .provided_by(origin)
                        .iter()
                        .map(String::as_str)
                        .collect();
                    let entry = tainted.entry(origin).or_default();
                    if !all.is_subset(entry) {
                        entry.extend(all);
                        queue.push_back((origin, hops + 1));
                    }
                }
                continue;
            }
            if listed.insert(consumer) {
                affected.push(AffectedSubsystem {
                    subsystem_id: consumer.to_owned(),
                    via_function: e.function.clone(),
                    hops: hops + 1,
                });
                tainted.insert(
                    consumer,
                    graph
                        .provided_by(consumer)
                        .iter()
                        .map(String::as_str)
                        .collect(),
                );
                queue.push_back((consumer, hops + 1));
            }
        }
    }
    affected
}

/// Traces a monitor's failure from `origin`.
///
/// A detected failure whose reaction handles every affected function stops
/// at the direct consumers. Anything else propagates transitively.
pub fn trace_monitor(
    graph: &DependencyGraph,
    origin: &str,
    monitor: &Monitor,
    detected: bool,
) -> PropagationTrace {
    let reaction = Reaction::parse(&monitor.system_reaction);
    let seeds = &monitor.affected_functions;
    let (affected, containment) = if detected && reaction.contains_all(seeds) {
        (
            direct_consumers(graph, origin, seeds),
            Containment::ContainedByReaction,
        )
    } else {
        let affected = propagate(graph, origin, seeds);
        let c = if affected.is_empty() {
            Containment::NoConsumers
        } else {
            Containment::Propagates
        };
        (affected, c)
    };
    PropagationTrace {
        monitor_id: monitor.id.clone(),
        detected,
        affected_subsystems: affected,
        containment,
        notified: if detected {
            reaction.notified
        } else {
            Vec::new()
        },
    }
}
