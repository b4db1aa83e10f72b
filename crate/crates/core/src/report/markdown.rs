//! Markdown rendering of a [`SubsystemReport`].

use std::fmt::Write as _;

use super::SubsystemReport;
use crate::funnel::StagePredicate;
use crate::requirements::escape_cell;

fn join_or_dash(items: &[String]) -> String {
    if items.is_empty() {
        "-".to_owned()
    } else {
        items.join(", ")
    }
}

fn describe_stage(p: &StagePredicate) -> String {
    match p {
        StagePredicate::ExcludeTag { tags } => {
            format!(
                "exclude {}",
                tags.iter()
                    .map(|t| t.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
        StagePredicate::IncludeTag { tags } => {
            format!(
                "keep only {}",
                tags.iter()
                    .map(|t| t.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
        StagePredicate::SymmetryReduce => "fold symmetric monitors".to_owned(),
        StagePredicate::SplitStartup => "split startup-checkable from residual".to_owned(),
    }
}

/// Renders one section per report field.
pub fn render_markdown(r: &SubsystemReport) -> String {
    let mut o = String::new();
    let h = &r.header;
    let _ = writeln!(o, "# Subsystem report: {}\n", h.subsystem_id);
    o.push_str("## Header\n\n| field | value |\n|---|---|\n");
    let _ = writeln!(o, "| schema version | {} |", r.schema_version);
    let _ = writeln!(o, "| subsystem | {} |", escape_cell(&h.subsystem_id));
    let _ = writeln!(o, "| spec source | {} |", escape_cell(&h.spec_source));
    let _ = writeln!(o, "| tool version | {} |", h.tool_version);
    let _ = writeln!(o, "| revision | {} |", h.revision);
    let _ = writeln!(
        o,
        "| completeness | {} of {} answered ({:.1} %) |",
        h.completeness.answered,
        h.completeness.total,
        h.completeness.fraction * 100.0
    );
    let _ = writeln!(
        o,
        "| platform subsystems | {} |\n",
        join_or_dash(&r.platform_subsystems)
    );

    o.push_str("## Funnel\n\n");
    for s in &r.funnel.stage_config {
        let _ = writeln!(
            o,
            "- `{}` {}: {}",
            s.id,
            s.name,
            describe_stage(&s.predicate)
        );
    }
    o.push('\n');
    o.push_str(&r.funnel.markdown_table());
    o.push('\n');

    let _ = writeln!(
        o,
        "## Findings\n\n{} monitor(s) survive the funnel.\n",
        r.findings.len()
    );
    if !r.findings.is_empty() {
        o.push_str("| monitor | lamp | tags | class | answered | undetected | affected | fallbacks |\n|---|---|---|---|---|---|---|---|\n");
        for f in &r.findings {
            let tags: Vec<String> = f.tags.iter().map(|t| t.as_str().to_owned()).collect();
            let answered: Vec<String> = f.answers.keys().map(|s| s.as_str().to_owned()).collect();
            let affected: Vec<String> = f
                .undetected_trace
                .affected_subsystems
                .iter()
                .map(|a| format!("{} ({})", a.subsystem_id, a.hops))
                .collect();
            let fallbacks: Vec<String> = f
                .fallback_candidates
                .iter()
                .map(|c| format!("{} {} {:.2}", c.fallback_subsystem, c.function, c.coverage))
                .collect();
            let _ = writeln!(
                o,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                escape_cell(&f.monitor.id),
                f.monitor.lamp,
                join_or_dash(&tags),
                f.symmetry_class.as_deref().unwrap_or("-"),
                join_or_dash(&answered),
                f.undetected_trace.containment.as_str(),
                escape_cell(&join_or_dash(&affected)),
                escape_cell(&join_or_dash(&fallbacks)),
            );
        }
        o.push('\n');
    }

    o.push_str("## Exclusions\n\n");
    if r.exclusions.is_empty() {
        o.push_str("None.\n\n");
    }
    for e in &r.exclusions {
        let _ = writeln!(
            o,
            "### {} ({})\n\n{}\n",
            e.stage_id,
            e.monitors.len(),
            escape_cell(&e.monitors.join(", "))
        );
    }

    o.push_str("## Availability signals\n\n");
    if r.availability_signals.is_empty() {
        o.push_str("None.\n\n");
    } else {
        o.push_str("| functions | monitors | count |\n|---|---|---|\n");
        for g in &r.availability_signals {
            let _ = writeln!(
                o,
                "| {} | {} | {} |",
                escape_cell(&join_or_dash(&g.functions)),
                escape_cell(&g.monitors.join(", ")),
                g.monitors.len()
            );
        }
        o.push('\n');
    }

    let mc = &r.min_config;
    let _ = writeln!(
        o,
        "## Minimum configuration\n\nChosen variant: `{}` ({} monitor(s) affecting other subsystems; requires {}).\n",
        mc.chosen_variant,
        mc.external_impact_count,
        join_or_dash(&mc.induced_dependencies)
    );
    o.push_str("| variant | monitors | external impact | dependencies |\n|---|---|---|---|\n");
    for v in &mc.ranking {
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} |",
            v.variant_id,
            v.monitor_count,
            v.external_impact_count,
            join_or_dash(&v.induced_dependencies)
        );
    }
    o.push('\n');

    o.push_str("## Requirements\n\n");
    if r.requirements.requirements.is_empty() {
        o.push_str("None.\n\n");
    } else {
        o.push_str(&r.requirements.markdown_table());
        o.push('\n');
    }

    o.push_str("## Frequencies\n\n");
    if r.frequencies.is_empty() {
        o.push_str("No field data.\n\n");
    } else {
        o.push_str("| dtc | occurrences | exposure (h) | rate (1/h) | upper bound (1/h) | above benchmark |\n|---|---|---|---|---|---|\n");
        for f in &r.frequencies {
            let _ = writeln!(
                o,
                "| {} | {} | {} | {:e} | {:e} | {} |",
                escape_cell(&f.dtc_code),
                f.occurrence_count,
                f.exposure_hours,
                f.point_rate_per_hour,
                f.upper_bound_per_hour,
                if f.exceeds_benchmark { "yes" } else { "no" }
            );
        }
        o.push('\n');
    }

    o.push_str("## Open items\n\n");
    if r.open_items.is_empty() {
        o.push_str("None.\n\n");
    } else {
        o.push_str("| step | open questions |\n|---|---|\n");
        for item in &r.open_items {
            let _ = writeln!(o, "| {} | {} |", item.step, item.count);
        }
        o.push('\n');
    }

    o.push_str("## Warnings\n\n");
    if r.warnings.is_empty() {
        o.push_str("None.\n");
    } else {
        for w in &r.warnings {
            let _ = writeln!(o, "- {}: {}", w.subject, w.message);
        }
    }
    o
}
