//! Grouping of monitors that repeat per wheel or axle position.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spec_model::{LocationTag, Monitor};

/// Placeholder substituted for location tokens in the symmetry signature.
pub const POSITION_PLACEHOLDER: &str = "⟨POS⟩";

/// Monitors identical up to their position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryClass {
    /// Smallest member id.
    pub representative: String,
    /// Member ids, sorted.
    pub members: Vec<String>,
    pub multiplicity: usize,
    pub signature: String,
}

/// Replaces every maximal alphanumeric run that is a location tag.
pub fn normalize_positions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if LocationTag::matches_grammar(token) {
            out.push_str(POSITION_PLACEHOLDER);
        } else {
            out.push_str(token);
        }
        token.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            token.push(c);
        } else {
            flush(&mut token, &mut out);
            out.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

#[derive(Serialize)]
struct SignatureKey<'a> {
    id: String,
    description: String,
    trigger_condition: String,
    healing_condition: &'a str,
    system_reaction: &'a str,
    dtc_codes: &'a [String],
    lamp: &'a str,
    affected_functions: &'a [String],
    part_id: Option<&'a str>,
    failure_origin: &'a str,
    trailer_related: bool,
    affects_tractor: bool,
    detection_phase: &'a str,
}

/// All monitor fields except `location`, with position tokens in id,
/// description and trigger condition replaced by a placeholder.
pub fn symmetry_signature(m: &Monitor) -> String {
    let key = SignatureKey {
        id: normalize_positions(&m.id),
        description: normalize_positions(&m.description),
        trigger_condition: normalize_positions(&m.trigger_condition),
        healing_condition: &m.healing_condition,
        system_reaction: &m.system_reaction,
        dtc_codes: &m.dtc_codes,
        lamp: m.lamp.as_str(),
        affected_functions: &m.affected_functions,
        part_id: m.part_id.as_deref(),
        failure_origin: m.failure_origin.as_str(),
        trailer_related: m.trailer_related,
        affects_tractor: m.affects_tractor,
        detection_phase: m.detection_phase.as_str(),
    };
    serde_json::to_string(&key).unwrap_or_default()
}

/// Groups monitors by signature. Classes are ordered by representative id
/// and partition the input.
pub fn symmetry_reduce<'a>(monitors: impl IntoIterator<Item = &'a Monitor>) -> Vec<SymmetryClass> {
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for m in monitors {
        groups
            .entry(symmetry_signature(m))
            .or_default()
            .push(m.id.clone());
    }
    let mut classes: Vec<SymmetryClass> = groups
        .into_iter()
        .map(|(signature, mut members)| {
            members.sort();
            SymmetryClass {
                representative: members[0].clone(),
                multiplicity: members.len(),
                members,
                signature,
            }
        })
        .collect();
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_model::parse_spec;

    fn monitors(rows: &str) -> Vec<Monitor> {
        parse_spec(&format!(
            "#@subsystem EBS\nmonitor_id,description,trigger_condition,healing_condition,system_reaction,dtc_codes,lamp,affected_functions,location\n{rows}"
        ))
        .unwrap()
        .monitors
    }

    #[test]
    fn normalizes_only_whole_tokens() {
        assert_eq!(normalize_positions("EBS-PCM00-FL"), "EBS-PCM00-⟨POS⟩");
        assert_eq!(
            normalize_positions("sensor at R2L, FR."),
            "sensor at ⟨POS⟩, ⟨POS⟩."
        );
        assert_eq!(normalize_positions("FLR FL2 fr"), "FLR FL2 fr");
    }

    #[test]
    fn six_wheels_one_class() {
        let rows: String = ["FL", "FR", "R1L", "R1R", "R2L", "R2R"]
            .iter()
            .map(|w| format!("P-{w},pressure sensor fault {w},p low at {w},,,D1,RED,abs,{w}\n"))
            .collect();
        let classes = symmetry_reduce(&monitors(&rows));
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].multiplicity, 6);
        assert_eq!(classes[0].representative, "P-FL");
    }

    #[test]
    fn lamp_difference_splits() {
        let classes = symmetry_reduce(&monitors(
            "P-FL,fault FL,,,,,RED,,FL\nP-FR,fault FR,,,,,YELLOW,,FR\n",
        ));
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn unlocated_monitors_stay_single_unless_identical() {
        let classes = symmetry_reduce(&monitors("A,x,,,,,,,\nB,y,,,,,,,\n"));
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.multiplicity == 1));
    }
}
