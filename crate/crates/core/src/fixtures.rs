//! Bundled synthetic EBS project used by `init-demo`, tests and the
//! acceptance suite.
//!
//! The spec is generated by `scripts/gen_ebs_fixture.py`; regenerate it
//! there rather than editing the CSV by hand.

use std::fs;
use std::io;
use std::path::Path;

use crate::heuristics::{
    Answer, AnswerKind, AnswerValue, DataFormat, DataNeed, DurationLimits, TriageState,
};
use crate::project::{ANSWERS_FILE, FIELD_DATA_FILE, PLATFORM_FILE, SPEC_FILE};
use crate::spec_model::{parse_platform, parse_spec, InterfaceDescriptor, InterfaceKind};

pub const EBS_SPEC_CSV: &str = include_str!("../fixtures/ebs_synthetic.csv");
pub const EBS_PLATFORM_JSON: &str = include_str!("../fixtures/ebs_platform.json");
pub const EBS_ANSWERS_JSONL: &str = include_str!("../fixtures/ebs_answers.jsonl");
pub const EBS_FIELD_DATA_CSV: &str = include_str!("../fixtures/ebs_field_data.csv");

/// Fresh state for the bundled spec and platform, without answers.
pub fn ebs_state() -> TriageState {
    let spec = parse_spec(EBS_SPEC_CSV).expect("bundled spec parses");
    let platform = parse_platform(EBS_PLATFORM_JSON).expect("bundled platform parses");
    TriageState::new(spec, platform).expect("bundled spec validates")
}

/// Writes the demo project (spec, platform, answer journal, field data)
/// into `dir`, creating it if needed.
pub fn write_demo_project(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SPEC_FILE), EBS_SPEC_CSV)?;
    fs::write(dir.join(PLATFORM_FILE), EBS_PLATFORM_JSON)?;
    fs::write(dir.join(ANSWERS_FILE), EBS_ANSWERS_JSONL)?;
    fs::write(dir.join(FIELD_DATA_FILE), EBS_FIELD_DATA_CSV)?;
    Ok(())
}

/// Placeholder answers for every open question, in question order.
pub fn complete_answers(state: &TriageState) -> Vec<Answer> {
    const AUTHOR: &str = "demo";
    const TIMESTAMP: &str = "2016-10-10T12:00:00Z";
    state
        .open_questions()
        .map(|q| {
            let value = match q.answer_kind {
                AnswerKind::Boolean => AnswerValue::Boolean(false),
                AnswerKind::Text => {
                    AnswerValue::Text(format!("No further action for {}.", q.target))
                }
                AnswerKind::DurationLimits => AnswerValue::DurationLimits(DurationLimits {
                    min_ms: 20,
                    max_ms: 200,
                }),
                AnswerKind::DataNeed => AnswerValue::DataNeed(DataNeed {
                    data_item: format!("{}_status", q.target.to_lowercase().replace('-', "_")),
                    format: DataFormat::NetworkSignal,
                }),
                AnswerKind::InterfaceSpec => AnswerValue::InterfaceSpec(InterfaceDescriptor {
                    id: format!("{}_request", q.target.to_lowercase().replace('-', "_")),
                    kind: InterfaceKind::NetworkSignal,
                    description: String::new(),
                    signal_frequency_hz: Some(50.0),
                    granularity: None,
                }),
            };
            Answer::new(q.id.clone(), value, AUTHOR, TIMESTAMP)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_answers_fill_everything() {
        let mut s = ebs_state();
        for a in complete_answers(&s) {
            s.apply_answer(a).unwrap();
        }
        assert_eq!(s.open_questions().count(), 0);
        assert_eq!(s.revision() as usize, s.questions().len());
    }
}
