mod common;

use safescope_core::heuristics::TriageState;
use safescope_core::propagation::{build_graph, min_config};
use safescope_core::spec_model::{parse_platform, parse_spec};

use common::{min_config_oracle, variant_fixtures};

#[test]
fn chosen_variant_matches_exhaustive_scoring() {
    for fx in variant_fixtures() {
        let spec = parse_spec(&fx.spec_csv).unwrap();
        let platform = parse_platform(&fx.platform_json).unwrap();
        let oracle = min_config_oracle(&spec, &platform);
        assert!(oracle.len() <= 5, "{}", fx.name);

        let subsystem = spec.subsystem_id.clone();
        let state = TriageState::new(spec, platform).unwrap();
        let graph = build_graph(state.platform());
        let got = min_config(&subsystem, &state, &graph).unwrap();

        assert_eq!(got.chosen_variant, oracle[0].variant_id, "{}", fx.name);
        if let Some(expected) = fx.expected {
            assert_eq!(got.chosen_variant, expected, "{}", fx.name);
        }
        let ranking: Vec<(usize, usize, &str)> = got
            .ranking
            .iter()
            .map(|v| {
                (
                    v.external_impact_count,
                    v.induced_dependencies.len(),
                    v.variant_id.as_str(),
                )
            })
            .collect();
        let expected: Vec<(usize, usize, &str)> = oracle
            .iter()
            .map(|s| (s.external_impact, s.dependency_count, s.variant_id.as_str()))
            .collect();
        assert_eq!(ranking, expected, "{}", fx.name);
        assert_eq!(
            got.external_impact_count, oracle[0].external_impact,
            "{}",
            fx.name
        );
    }
}

#[test]
fn scores_of_the_three_variant_case() {
    let fx = variant_fixtures()
        .into_iter()
        .find(|f| f.name == "impact_then_dependencies")
        .unwrap();
    let oracle = min_config_oracle(
        &parse_spec(&fx.spec_csv).unwrap(),
        &parse_platform(&fx.platform_json).unwrap(),
    );
    let scores: Vec<(&str, usize, usize)> = oracle
        .iter()
        .map(|s| (s.variant_id.as_str(), s.external_impact, s.dependency_count))
        .collect();
    assert_eq!(scores, [("C", 7, 2), ("B", 7, 3), ("A", 12, 0)]);
}
