//! Independent oracles and random generators shared by the integration
//! tests and the acceptance suite. Nothing here calls the code under test
//! for the answer it checks; each oracle recomputes it from the raw inputs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use safescope_core::spec_model::{
    parse_platform, parse_spec, DetectionPhase, DiagnosticSpec, FailureOrigin, Monitor,
    PlatformModel, WarningLamp,
};

pub const SPEC_HEADER: &str = "monitor_id,description,trigger_condition,healing_condition,system_reaction,dtc_codes,lamp,affected_functions,part_id,location,failure_origin,trailer_related,affects_tractor,detection_phase";

/// Stage counts as plain numbers: input, after each exclusion, after
/// folding, then startup and residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveFunnel {
    pub input: usize,
    pub vehicle_level: usize,
    pub immediate_harm: usize,
    pub symmetry: usize,
    pub startup: usize,
    pub residual: usize,
}

fn is_driver_part(platform: &PlatformModel, subsystem: &str, m: &Monitor) -> bool {
    let Some(part) = m.part_id.as_deref() else {
        return false;
    };
    platform
        .subsystems
        .iter()
        .filter(|s| s.id == subsystem)
        .flat_map(|s| s.parts.iter())
        .any(|p| p.id == part && p.driver_interaction)
}

/// Replaces whole alphanumeric tokens equal to `loc` with `?`.
fn strip_location(text: &str, loc: &str) -> String {
    let mut out = String::new();
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if !token.is_empty() {
            out.push_str(if token == loc { "?" } else { token });
            token.clear();
        }
    };
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            token.push(c);
        } else {
            flush(&mut token, &mut out);
            out.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

/// Position-free identity of a monitor, built from its raw fields.
pub fn naive_symmetry_key(m: &Monitor) -> String {
    let loc = m
        .location
        .as_ref()
        .map(|l| l.as_str().to_owned())
        .unwrap_or_default();
    let strip = |s: &str| {
        if loc.is_empty() {
            s.to_owned()
        } else {
            strip_location(s, &loc)
        }
    };
    format!(
        "{:?}",
        (
            strip(&m.id),
            strip(&m.description),
            strip(&m.trigger_condition),
            (
                &m.healing_condition,
                &m.system_reaction,
                &m.dtc_codes,
                m.lamp,
                &m.affected_functions,
                &m.part_id,
                m.failure_origin,
                m.trailer_related,
                m.affects_tractor,
                m.detection_phase
            ),
        )
    )
}

/// The default pipeline as set filters over raw monitor fields.
pub fn naive_funnel(spec: &DiagnosticSpec, platform: &PlatformModel) -> NaiveFunnel {
    let all: Vec<&Monitor> = spec.monitors.iter().collect();
    let s1: Vec<&Monitor> = all
        .iter()
        .copied()
        .filter(|m| m.failure_origin != FailureOrigin::External)
        .collect();
    let s2: Vec<&Monitor> = s1
        .iter()
        .copied()
        .filter(|m| m.lamp != WarningLamp::Yellow)
        .filter(|m| !(m.trailer_related && !m.affects_tractor))
        .filter(|m| !is_driver_part(platform, &spec.subsystem_id, m))
        .collect();
    let mut classes: BTreeMap<String, Vec<&Monitor>> = BTreeMap::new();
    for m in &s2 {
        classes.entry(naive_symmetry_key(m)).or_default().push(m);
    }
    let startup = classes
        .values()
        .filter(|members| {
            let rep = members.iter().min_by(|a, b| a.id.cmp(&b.id)).unwrap();
            rep.detection_phase == DetectionPhase::Startup
        })
        .count();
    NaiveFunnel {
        input: all.len(),
        vehicle_level: s1.len(),
        immediate_harm: s2.len(),
        symmetry: classes.len(),
        startup,
        residual: classes.len() - startup,
    }
}

/// Subsystems reached by an undetected failure of `seeds` at `origin`,
/// computed as a fixed point over the platform's provide/consume lists.
pub fn closure_oracle(
    platform: &PlatformModel,
    origin: &str,
    seeds: &[String],
) -> BTreeSet<String> {
    let provided = |id: &str| -> BTreeSet<String> {
        platform
            .subsystems
            .iter()
            .filter(|s| s.id == id)
            .flat_map(|s| s.functions_provided.iter().cloned())
            .collect()
    };
    let mut tainted: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    tainted.insert(origin.to_owned(), seeds.iter().cloned().collect());
    let mut reached: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut changed = false;
        for consumer in &platform.subsystems {
            for f in &consumer.functions_consumed {
                let fed = tainted.iter().any(|(provider, fs)| {
                    provider != &consumer.id && fs.contains(f) && provided(provider).contains(f)
                });
                if fed && reached.insert(consumer.id.clone()) {
                    tainted.insert(consumer.id.clone(), provided(&consumer.id));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    reached.remove(origin);
    reached
}

/// A random platform with at most `max_nodes` subsystems and at most
/// `max_edges` function edges, as JSON.
pub fn random_platform_json(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> String {
    let n = rng.random_range(1..=max_nodes);
    let nf = rng.random_range(1..=6);
    let mut provides: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut consumes: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut providers: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for (f, p) in providers.iter_mut().enumerate() {
        let k = rng.random_range(0..=2.min(n));
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        for &i in ids.iter().take(k) {
            provides[i].push(format!("f{f}"));
            p.push(i);
        }
    }
    let mut edges = 0;
    for _ in 0..rng.random_range(0..=12) {
        let f = rng.random_range(0..nf);
        let c = rng.random_range(0..n);
        let name = format!("f{f}");
        if providers[f].is_empty() || consumes[c].contains(&name) {
            continue;
        }
        let added = providers[f].iter().filter(|&&p| p != c).count();
        if edges + added > max_edges {
            continue;
        }
        edges += added;
        consumes[c].push(name);
    }
    let mut out = String::from("{ \"subsystems\": [");
    for i in 0..n {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{ \"id\": \"S{i}\", \"functions_provided\": {}, \"functions_consumed\": {}, \"variants\": [ {{ \"id\": \"V\" }} ] }}",
            serde_json::to_string(&provides[i]).unwrap(),
            serde_json::to_string(&consumes[i]).unwrap()
        );
    }
    out.push_str("] }");
    out
}

/// A random monitor for subsystem `origin`: seeds are drawn from what the
/// origin provides, and the reaction handles a random subset of them.
pub fn random_monitor(rng: &mut impl Rng, platform: &PlatformModel, origin: &str) -> Monitor {
    let provided = platform
        .subsystem(origin)
        .map(|s| s.functions_provided.clone())
        .unwrap_or_default();
    let seeds: Vec<String> = provided
        .iter()
        .filter(|_| rng.random_bool(0.6))
        .cloned()
        .collect();
    let mut reaction = Vec::new();
    for f in &seeds {
        match rng.random_range(0..3) {
            0 => reaction.push(format!("disable {f}")),
            1 => reaction.push(format!("degrade {f}")),
            _ => {}
        }
    }
    let csv = format!(
        "#@subsystem {origin}\n{SPEC_HEADER}\nM1,random,,,{},,RED,{},,,,,,\n",
        reaction.join("; "),
        seeds.join(";")
    );
    parse_spec(&csv).unwrap().monitors.remove(0)
}

pub fn parse_random_platform(json: &str) -> PlatformModel {
    parse_platform(json).unwrap_or_else(|e| panic!("generated platform rejected: {e}\n{json}"))
}

/// A random spec CSV with positional repeats, for symmetry properties.
pub fn random_spec_csv(rng: &mut impl Rng, max_monitors: usize) -> String {
    const LOCS: [&str; 7] = ["FL", "FR", "R1L", "R1R", "R2L", "R2R", ""];
    const LAMPS: [&str; 3] = ["RED", "YELLOW", "NONE"];
    let mut out = format!("#@subsystem EBS\n{SPEC_HEADER}\n");
    let mut used = BTreeSet::new();
    let n = rng.random_range(0..=max_monitors);
    for _ in 0..n {
        let base = rng.random_range(0..6);
        let loc = LOCS[rng.random_range(0..LOCS.len())];
        let variant = rng.random_range(0..2);
        let id = if loc.is_empty() {
            format!("M{base}-X{variant}")
        } else {
            format!("M{base}-{loc}-X{variant}")
        };
        if !used.insert(id.clone()) {
            continue;
        }
        let at = if loc.is_empty() {
            String::new()
        } else {
            format!(" at {loc}")
        };
        let _ = writeln!(
            out,
            "{id},fault {base}{at},cond {base}{at},,degrade f{base},D{},{},f{base},,{loc},,,,",
            base * 10 + variant,
            LAMPS[(base + variant) % 3]
        );
    }
    out
}

/// Exhaustive scoring result of one variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleScore {
    pub external_impact: usize,
    pub dependency_count: usize,
    pub variant_id: String,
}

fn oracle_applies(tags: &[String], m: &Monitor) -> bool {
    tags.iter().any(|t| {
        t == "*"
            || m.part_id.as_ref() == Some(t)
            || m.location.as_ref().map(|l| l.as_str()) == Some(t.as_str())
            || m.affected_functions.iter().any(|f| f == t)
    })
}

fn oracle_deps(platform: &PlatformModel, root: &str, start: &[String]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut todo: Vec<String> = start.to_vec();
    while let Some(d) = todo.pop() {
        if d == root || !out.insert(d.clone()) {
            continue;
        }
        let s = platform.subsystem(&d).expect("dependency exists");
        let mut vs: Vec<_> = s.variants.iter().collect();
        vs.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(v) = vs.first() {
            todo.extend(v.dependencies.iter().cloned());
        }
    }
    out
}

/// Scores every variant of the spec's subsystem and returns them sorted by
/// the ranking key, best first.
pub fn min_config_oracle(spec: &DiagnosticSpec, platform: &PlatformModel) -> Vec<OracleScore> {
    let subsystem = platform
        .subsystem(&spec.subsystem_id)
        .expect("subsystem exists");
    let impacts = |m: &Monitor| {
        m.failure_origin == FailureOrigin::External
            || !closure_oracle(platform, &spec.subsystem_id, &m.affected_functions).is_empty()
    };
    let mut scores: Vec<OracleScore> = subsystem
        .variants
        .iter()
        .map(|v| OracleScore {
            external_impact: spec
                .monitors
                .iter()
                .filter(|m| oracle_applies(&v.applicable_monitor_tags, m) && impacts(m))
                .count(),
            dependency_count: oracle_deps(platform, &spec.subsystem_id, &v.dependencies).len(),
            variant_id: v.id.clone(),
        })
        .collect();
    scores.sort();
    scores
}

/// A named variant fixture: spec CSV and platform JSON.
pub struct VariantFixture {
    pub name: &'static str,
    pub spec_csv: String,
    pub platform_json: String,
    /// Expected choice, where the fixture was built for one.
    pub expected: Option<&'static str>,
}

fn deps_platform(subsystem_variants: &str, extra: &[&str]) -> String {
    let mut s = format!(
        "{{ \"subsystems\": [ {{ \"id\": \"SUB\", \"parts\": [ {{ \"id\": \"P1\" }}, {{ \"id\": \"P2\" }} ], \"functions_provided\": [\"shared\", \"extra\"], \"variants\": [ {subsystem_variants} ] }}"
    );
    for d in extra {
        let _ = write!(
            s,
            ", {{ \"id\": \"{d}\", \"variants\": [ {{ \"id\": \"V\" }} ] }}"
        );
    }
    s.push_str(" ] }");
    s
}

/// All min-config fixtures, each with at most five variants.
pub fn variant_fixtures() -> Vec<VariantFixture> {
    let mut rows = String::new();
    for i in 0..7 {
        let _ = writeln!(
            rows,
            "S{i:02},shared fault {i},,,,,RED,shared,P1,,EXTERNAL,,,"
        );
    }
    for i in 0..5 {
        let _ = writeln!(
            rows,
            "E{i:02},extra fault {i},,,,,RED,extra,P2,,EXTERNAL,,,"
        );
    }
    let spec = format!("#@subsystem SUB\n{SPEC_HEADER}\n{rows}");

    vec![
        VariantFixture {
            name: "impact_then_dependencies",
            spec_csv: spec.clone(),
            platform_json: deps_platform(
                r#"{ "id": "A", "applicable_monitor_tags": ["*"] },
                   { "id": "B", "applicable_monitor_tags": ["shared"], "dependencies": ["D1", "D2", "D3"] },
                   { "id": "C", "applicable_monitor_tags": ["P1"], "dependencies": ["D1", "D2"] }"#,
                &["D1", "D2", "D3"],
            ),
            expected: Some("C"),
        },
        VariantFixture {
            name: "lexicographic_tie_break",
            spec_csv: spec.clone(),
            platform_json: deps_platform(
                r#"{ "id": "V_B", "applicable_monitor_tags": ["shared"], "dependencies": ["D1"] },
                   { "id": "V_A", "applicable_monitor_tags": ["P1"], "dependencies": ["D2"] }"#,
                &["D1", "D2"],
            ),
            expected: Some("V_A"),
        },
        VariantFixture {
            name: "single_variant",
            spec_csv: spec.clone(),
            platform_json: deps_platform(r#"{ "id": "ONLY", "applicable_monitor_tags": ["*"] }"#, &[]),
            expected: Some("ONLY"),
        },
        VariantFixture {
            name: "five_variants_transitive",
            spec_csv: spec,
            platform_json: r#"{ "subsystems": [
                { "id": "SUB", "parts": [ { "id": "P1" }, { "id": "P2" } ], "functions_provided": ["shared", "extra"],
                  "variants": [
                    { "id": "V1", "applicable_monitor_tags": ["*"] },
                    { "id": "V2", "applicable_monitor_tags": ["extra"], "dependencies": ["D1"] },
                    { "id": "V3", "applicable_monitor_tags": ["P2"], "dependencies": ["D2"] },
                    { "id": "V4", "applicable_monitor_tags": ["E00", "nothing"], "dependencies": ["D1", "D2"] },
                    { "id": "V5", "applicable_monitor_tags": [], "dependencies": ["D3"] } ] },
                { "id": "D1", "variants": [ { "id": "Z" }, { "id": "A", "dependencies": ["D2", "D3"] } ] },
                { "id": "D2", "variants": [ { "id": "V" } ] },
                { "id": "D3", "variants": [ { "id": "V", "dependencies": ["SUB"] } ] } ] }"#
                .to_owned(),
            expected: Some("V5"),
        },
        VariantFixture {
            name: "ebs",
            spec_csv: safescope_core::fixtures::EBS_SPEC_CSV.to_owned(),
            platform_json: safescope_core::fixtures::EBS_PLATFORM_JSON.to_owned(),
            expected: None,
        },
    ]
}
