//! Function-level dependency graph between subsystems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::spec_model::{FallbackEdge, PlatformModel};

/// `provider` supplies `function` to `consumer`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionEdge {
    pub provider: String,
    pub consumer: String,
    pub function: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    /// Subsystem ids, sorted.
    pub nodes: Vec<String>,
    /// Sorted and free of duplicates and self loops.
    pub function_edges: Vec<FunctionEdge>,
    pub fallback_edges: Vec<FallbackEdge>,
    /// Functions each subsystem provides, sorted.
    pub provides: BTreeMap<String, Vec<String>>,
}

/// One edge per (provider, consumer, function) where the provider lists the
/// function as provided and the consumer as consumed.
pub fn build_graph(platform: &PlatformModel) -> DependencyGraph {
    let mut nodes: Vec<String> = platform.subsystems.iter().map(|s| s.id.clone()).collect();
    nodes.sort();

    let mut provides: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for s in &platform.subsystems {
        let set: BTreeSet<String> = s.functions_provided.iter().cloned().collect();
        provides.insert(s.id.clone(), set.into_iter().collect());
    }

    let mut edges = BTreeSet::new();
    for provider in &platform.subsystems {
        for consumer in &platform.subsystems {
            if provider.id == consumer.id {
                continue;
            }
            for f in &provider.functions_provided {
                if consumer.consumes(f) {
                    edges.insert(FunctionEdge {
                        provider: provider.id.clone(),
                        consumer: consumer.id.clone(),
                        function: f.clone(),
                    });
                }
            }
        }
    }

    let mut fallback_edges = platform.fallback_edges.clone();
    fallback_edges.sort_by(|a, b| {
        (&a.primary_provider, &a.function, &a.fallback_provider).cmp(&(
            &b.primary_provider,
            &b.function,
            &b.fallback_provider,
        ))
    });

    DependencyGraph {
        nodes,
        function_edges: edges.into_iter().collect(),
        fallback_edges,
        provides,
    }
}

impl DependencyGraph {
    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).is_ok()
    }

    /// Edges leaving `provider`, in sorted order.
    pub fn edges_from<'a>(
        &'a self,
        provider: &'a str,
    ) -> impl Iterator<Item = &'a FunctionEdge> + 'a {
        let start = self
            .function_edges
            .partition_point(|e| e.provider.as_str() < provider);
        self.function_edges[start..]
            .iter()
            .take_while(move |e| e.provider == provider)
    }

    pub fn provided_by(&self, subsystem: &str) -> &[String] {
        self.provides.get(subsystem).map_or(&[], Vec::as_slice)
    }

    /// Graphviz rendering. Function edges are solid, fallback edges dashed.
    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph platform {\n    rankdir=LR;\n");
        for n in &self.nodes {
            let _ = writeln!(out, "    {};", q(n));
        }
        for e in &self.function_edges {
            let _ = writeln!(
                out,
                "    {} -> {} [label={}];",
                q(&e.provider),
                q(&e.consumer),
                q(&e.function)
            );
        }
        for e in &self.fallback_edges {
            let label = format!("{} fallback {:.2}", e.function, e.coverage);
            let _ = writeln!(
                out,
                "    {} -> {} [label={}, style=dashed];",
                q(&e.primary_provider),
                q(&e.fallback_provider),
                q(&label)
            );
        }
        out.push_str("}\n");
        out
    }
}
