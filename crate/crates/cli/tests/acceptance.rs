//! Acceptance suite: one line per criterion, non-zero exit on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use safescope_core::fixtures::{
    complete_answers, ebs_state, write_demo_project, EBS_ANSWERS_JSONL, EBS_FIELD_DATA_CSV,
};
use safescope_core::funnel::{default_stages, run_funnel, symmetry_reduce};
use safescope_core::heuristics::{Answer, TriageState};
use safescope_core::project::parse_answer_lines;
use safescope_core::propagation::{build_graph, min_config, trace_monitor};
use safescope_core::report::{
    analyze, render, render_json, AnalysisOptions, RenderFormat, SubsystemReport,
};
use safescope_core::requirements::{
    estimate_frequency, RequirementKind, DEFAULT_BENCHMARK_RATE_PER_HOUR,
};
use safescope_core::spec_model::{
    parse_field_data, parse_platform, parse_spec, FailureOrigin, FieldFailureRecord,
};
use serde_json::Value;

use common::{
    closure_oracle, min_config_oracle, naive_funnel, parse_random_platform, random_monitor,
    random_platform_json, random_spec_csv, variant_fixtures,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture_answers() -> Vec<Answer> {
    parse_answer_lines(EBS_ANSWERS_JSONL, Path::new("ebs_answers.jsonl"))
        .expect("fixture journal parses")
}

fn replayed(times: usize) -> TriageState {
    let mut s = ebs_state();
    for _ in 0..times {
        for a in fixture_answers() {
            s.apply_answer(a).expect("fixture answer applies");
        }
    }
    s
}

fn report_of(state: &TriageState) -> SubsystemReport {
    let fd = parse_field_data(EBS_FIELD_DATA_CSV).expect("fixture field data parses");
    analyze(state, &default_stages(), &fd, &AnalysisOptions::default()).expect("fixture analyzes")
}

fn funnel_reproduction() -> Outcome {
    let start = Instant::now();
    let state = ebs_state();
    let f = run_funnel(&state, &default_stages()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let split = f.startup_split.as_ref().ok_or("no startup split")?;
    let got = (
        f.input_count,
        f.stages.iter().map(|s| s.output_count).collect::<Vec<_>>(),
        split.startup_count,
        split.residual_count,
    );
    let oracle = naive_funnel(state.spec(), state.platform());
    let from_oracle = (
        oracle.input,
        vec![
            oracle.vehicle_level,
            oracle.immediate_harm,
            oracle.symmetry,
            oracle.symmetry,
        ],
        oracle.startup,
        oracle.residual,
    );
    ensure!(
        got == from_oracle,
        "funnel {got:?} but naive filters give {from_oracle:?}"
    );
    ensure!(
        got == (720, vec![500, 330, 60, 60], 20, 40),
        "funnel {got:?}"
    );
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "720 -> 500 -> 330 -> 60 -> {{20 startup, 40 residual}} in {elapsed:.2?}"
    ))
}

fn dtc_asymmetry() -> Outcome {
    let state = ebs_state();
    let spec = state.spec();
    let distinct: BTreeSet<&str> = spec
        .monitors
        .iter()
        .flat_map(|m| m.dtc_codes.iter().map(String::as_str))
        .collect();
    ensure!(distinct.len() == 210, "{} distinct DTCs", distinct.len());
    ensure!(
        spec.dtcs.len() == 210,
        "spec index holds {} DTCs",
        spec.dtcs.len()
    );
    let shared = distinct
        .iter()
        .filter(|c| {
            spec.monitors
                .iter()
                .filter(|m| m.dtc_codes.iter().any(|d| d == *c))
                .count()
                >= 2
        })
        .count();
    let bare = spec
        .monitors
        .iter()
        .filter(|m| m.dtc_codes.is_empty())
        .count();
    ensure!(shared >= 1, "no DTC is shared by two monitors");
    ensure!(bare >= 1, "every monitor has a DTC");
    Ok(format!(
        "210 distinct DTCs, {shared} shared, {bare} monitors without DTC"
    ))
}

fn propagation_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5afe_5c0b);
    let mut traces = 0usize;
    let mut multi_hop = 0usize;
    let mut strict = 0usize;
    for i in 0..1000 {
        let platform = parse_random_platform(&random_platform_json(&mut rng, 8, 16));
        let graph = build_graph(&platform);
        ensure!(
            platform.subsystems.len() <= 8,
            "platform {i} has {} subsystems",
            platform.subsystems.len()
        );
        ensure!(
            graph.function_edges.len() <= 16,
            "platform {i} has {} edges",
            graph.function_edges.len()
        );
        for s in &platform.subsystems {
            let m = random_monitor(&mut rng, &platform, &s.id);
            let undetected = trace_monitor(&graph, &s.id, &m, false);
            let detected = trace_monitor(&graph, &s.id, &m, true);
            let u: BTreeSet<String> = undetected
                .affected_subsystems
                .iter()
                .map(|a| a.subsystem_id.clone())
                .collect();
            let d: BTreeSet<String> = detected
                .affected_subsystems
                .iter()
                .map(|a| a.subsystem_id.clone())
                .collect();
            let oracle = closure_oracle(&platform, &s.id, &m.affected_functions);
            ensure!(
                u == oracle,
                "platform {i}, origin {}: trace {u:?}, closure {oracle:?}",
                s.id
            );
            ensure!(
                d.is_subset(&u),
                "platform {i}, origin {}: detected {d:?} not within {u:?}",
                s.id
            );
            traces += 1;
            multi_hop += usize::from(undetected.affected_subsystems.iter().any(|a| a.hops > 1));
            strict += usize::from(d.len() < u.len());
        }
    }
    let elapsed = start.elapsed();
    ensure!(
        multi_hop > 0 && strict > 0,
        "generator too weak: {multi_hop} multi-hop, {strict} strict subsets"
    );
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "1000 platforms, {traces} traces ({multi_hop} multi-hop, {strict} with detection strictly smaller) in {elapsed:.2?}"
    ))
}

fn symmetry_conservation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x0005_1de5);
    let mut folded = 0usize;
    for i in 0..500 {
        let spec =
            parse_spec(&random_spec_csv(&mut rng, 40)).map_err(|e| format!("spec {i}: {e}"))?;
        let classes = symmetry_reduce(&spec.monitors);
        let total: usize = classes.iter().map(|c| c.multiplicity).sum();
        ensure!(
            total == spec.monitors.len(),
            "spec {i}: multiplicities sum to {total}, input has {}",
            spec.monitors.len()
        );
        let mut seen = BTreeSet::new();
        for c in &classes {
            ensure!(
                c.members.len() == c.multiplicity,
                "spec {i}: class size mismatch"
            );
            for m in &c.members {
                ensure!(seen.insert(m.clone()), "spec {i}: {m} in two classes");
            }
        }
        let all: BTreeSet<String> = spec.monitors.iter().map(|m| m.id.clone()).collect();
        ensure!(seen == all, "spec {i}: classes do not cover the input");
        folded += usize::from(classes.len() < spec.monitors.len());
    }
    ensure!(folded > 0, "no random spec folded any monitors");
    Ok(format!("500 specs, {folded} with folding"))
}

fn min_config_choice() -> Outcome {
    let mut names = Vec::new();
    for fx in variant_fixtures() {
        let spec = parse_spec(&fx.spec_csv).map_err(|e| e.to_string())?;
        let platform = parse_platform(&fx.platform_json).map_err(|e| e.to_string())?;
        let oracle = min_config_oracle(&spec, &platform);
        ensure!(
            !oracle.is_empty() && oracle.len() <= 5,
            "{}: {} variants",
            fx.name,
            oracle.len()
        );
        let subsystem = spec.subsystem_id.clone();
        let state = TriageState::new(spec, platform).map_err(|e| e.to_string())?;
        let graph = build_graph(state.platform());
        let got = min_config(&subsystem, &state, &graph).map_err(|e| e.to_string())?;
        ensure!(
            got.chosen_variant == oracle[0].variant_id,
            "{}: chose {}, oracle {}",
            fx.name,
            got.chosen_variant,
            oracle[0].variant_id
        );
        if let Some(expected) = fx.expected {
            ensure!(
                got.chosen_variant == expected,
                "{}: chose {}, expected {expected}",
                fx.name,
                got.chosen_variant
            );
        }
        names.push(fx.name);
    }
    ensure!(
        names.contains(&"lexicographic_tie_break"),
        "tie-break fixture missing"
    );
    Ok(format!("{} fixtures: {}", names.len(), names.join(", ")))
}

fn requirement_count() -> Outcome {
    let mut state = replayed(1);
    for a in complete_answers(&state) {
        state.apply_answer(a).map_err(|e| e.to_string())?;
    }
    ensure!(state.open_questions().count() == 0, "questions left open");
    let report = report_of(&state);
    let residual = report.requirements.count(RequirementKind::ResidualHandling);
    ensure!(residual == 40, "{residual} RESIDUAL_HANDLING requirements");

    let groups: BTreeSet<Vec<String>> = state
        .spec()
        .monitors
        .iter()
        .filter(|m| m.failure_origin == FailureOrigin::External)
        .map(|m| {
            m.affected_functions
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    let availability = report
        .requirements
        .count(RequirementKind::AvailabilitySignal);
    ensure!(
        availability == groups.len(),
        "{availability} AVAILABILITY_SIGNAL requirements for {} groups",
        groups.len()
    );
    Ok(format!(
        "40 RESIDUAL_HANDLING, {availability} AVAILABILITY_SIGNAL for {} function groups",
        groups.len()
    ))
}

fn close(a: f64, b: f64) -> bool {
    ((a - b) / b).abs() <= 1e-12
}

fn frequency_arithmetic() -> Outcome {
    let rec = |k, t| FieldFailureRecord {
        dtc_code: "D".into(),
        occurrence_count: k,
        exposure_hours: t,
    };
    let one = |k, t| {
        estimate_frequency(&[rec(k, t)], DEFAULT_BENCHMARK_RATE_PER_HOUR).map(|mut v| v.remove(0))
    };
    ensure!(
        close(DEFAULT_BENCHMARK_RATE_PER_HOUR, 2.0e-5),
        "benchmark {DEFAULT_BENCHMARK_RATE_PER_HOUR}"
    );

    let a = one(3, 1e6).map_err(|e| e.to_string())?;
    ensure!(
        close(a.point_rate_per_hour, 3.0e-6),
        "k=3, T=1e6 gives {}",
        a.point_rate_per_hour
    );
    let b = one(0, 1e4).map_err(|e| e.to_string())?;
    ensure!(
        b.point_rate_per_hour == 0.0,
        "k=0 point rate {}",
        b.point_rate_per_hour
    );
    ensure!(
        close(b.upper_bound_per_hour, 1.0e-4),
        "k=0, T=1e4 bound {}",
        b.upper_bound_per_hour
    );
    let c = one(5, 1e5).map_err(|e| e.to_string())?;
    ensure!(
        close(c.point_rate_per_hour, 5.0e-5),
        "k=5, T=1e5 gives {}",
        c.point_rate_per_hour
    );
    ensure!(c.exceeds_benchmark, "k=5, T=1e5 not flagged");
    ensure!(
        !a.exceeds_benchmark && !b.exceeds_benchmark,
        "low rates flagged"
    );
    Ok(format!(
        "3.0e-6 /h, bound {:e} /h, {:e} /h flagged against {:e} /h",
        b.upper_bound_per_hour, c.point_rate_per_hour, DEFAULT_BENCHMARK_RATE_PER_HOUR
    ))
}

fn run_cli(project: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_safescope"))
        .arg("--project")
        .arg(project)
        .args(args)
        .env("SAFESCOPE_NO_COLOR", "1")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "safescope {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn demo_project() -> Result<tempfile::TempDir, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_demo_project(dir.path()).map_err(|e| e.to_string())?;
    Ok(dir)
}

fn determinism() -> Outcome {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = demo_project()?;
        let json = run_cli(dir.path(), &["report", "--format", "json"])?;
        let md = run_cli(dir.path(), &["report", "--format", "markdown"])?;
        outputs.push((json, md));
    }
    ensure!(outputs[0].0 == outputs[1].0, "JSON reports differ");
    ensure!(outputs[0].1 == outputs[1].1, "Markdown reports differ");
    let state = replayed(1);
    let (a, b) = (report_of(&state), report_of(&state));
    ensure!(
        render_json(&a) == render_json(&b),
        "in-process JSON differs"
    );
    ensure!(
        render(&a, RenderFormat::Markdown) == render(&b, RenderFormat::Markdown),
        "in-process Markdown differs"
    );
    ensure!(
        render_json(&a).as_bytes() == outputs[0].0.as_slice(),
        "CLI JSON differs from library JSON"
    );
    Ok(format!(
        "JSON {} bytes, Markdown {} bytes, identical across runs",
        outputs[0].0.len(),
        outputs[0].1.len()
    ))
}

fn strip_revisions(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("revision");
            map.values_mut().for_each(strip_revisions);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_revisions),
        _ => {}
    }
}

fn journal_replay() -> Outcome {
    let once = replayed(1);
    let twice = replayed(2);
    ensure!(
        once.answers() == twice.answers(),
        "answers differ after second replay"
    );
    ensure!(
        once.classifications() == twice.classifications(),
        "classifications differ"
    );
    ensure!(
        once.revision() != twice.revision(),
        "revision did not advance"
    );
    let mut a: Value =
        serde_json::from_str(&render_json(&report_of(&once))).map_err(|e| e.to_string())?;
    let mut b: Value =
        serde_json::from_str(&render_json(&report_of(&twice))).map_err(|e| e.to_string())?;
    strip_revisions(&mut a);
    strip_revisions(&mut b);
    ensure!(a == b, "report content differs beyond the revision");
    Ok(format!(
        "revision {} vs {}, content identical",
        once.revision(),
        twice.revision()
    ))
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn service_consistency() -> Outcome {
    let dir = demo_project()?;
    let mut child = Command::new(env!("CARGO_BIN_EXE_safescope"))
        .arg("--project")
        .arg(dir.path())
        .args(["serve", "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let stdout = child.stdout.take().ok_or("no stdout")?;
    let _server = Server(child);
    let mut line = String::new();
    BufReader::new(stdout)
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .ok_or(format!("unexpected banner `{line}`"))?
        .to_owned();

    let client = reqwest::blocking::Client::new();
    let fetch = || -> Result<(String, Vec<u8>), String> {
        let r = client
            .get(format!("{base}/api/v1/report"))
            .send()
            .map_err(|e| e.to_string())?;
        let rev = r
            .headers()
            .get("x-safescope-revision")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_owned();
        Ok((rev, r.bytes().map_err(|e| e.to_string())?.to_vec()))
    };

    let (rev, http) = fetch()?;
    let cli = run_cli(dir.path(), &["report", "--format", "json"])?;
    ensure!(rev == "8", "served revision {rev}");
    ensure!(http == cli, "HTTP and CLI reports differ at revision 8");

    let answer = serde_json::json!({
        "answer": { "question_id": "S6A:EBS", "kind": "TEXT", "value": "Checked in workshop.",
                    "author": "acceptance", "timestamp": "2016-10-06T09:00:00Z" },
        "revision": 8
    });
    let r = client
        .post(format!("{base}/api/v1/answers"))
        .json(&answer)
        .send()
        .map_err(|e| e.to_string())?;
    ensure!(
        r.status().is_success(),
        "answer rejected with {}",
        r.status()
    );
    let (rev, http) = fetch()?;
    let cli2 = run_cli(dir.path(), &["report", "--format", "json"])?;
    ensure!(rev == "9", "served revision {rev} after answering");
    ensure!(http == cli2, "HTTP and CLI reports differ at revision 9");
    ensure!(cli2 != cli, "answer did not change the report");
    Ok(format!(
        "byte-identical at revisions 8 and 9 ({} bytes)",
        http.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("funnel reproduction", funnel_reproduction),
        ("DTC asymmetry", dtc_asymmetry),
        ("propagation oracle", propagation_oracle),
        ("symmetry conservation", symmetry_conservation),
        ("min-config oracle", min_config_choice),
        ("requirement count", requirement_count),
        ("frequency arithmetic", frequency_arithmetic),
        ("determinism", determinism),
        ("journal replay", journal_replay),
        ("service consistency", service_consistency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
