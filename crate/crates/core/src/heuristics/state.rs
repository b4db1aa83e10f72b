//! Per-project triage state: classifications, questions, answers and the
//! revision counter.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::answer::{Answer, AnswerKind, AnswerValue};
use super::questions::{generate_questions, Question};
use super::{auto_classify, Classifications, HeuristicStep};
use crate::spec_model::{
    validate, DiagnosticSpec, PlatformModel, ValidationError, ValidationReport,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TriageError {
    #[error("unknown question `{0}`")]
    UnknownQuestion(String),
    #[error("question `{id}` expects a {expected} answer, got {got}")]
    TypeMismatch {
        id: String,
        expected: AnswerKind,
        got: AnswerKind,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("spec and platform are inconsistent ({} finding(s)); run validate", .0.findings.len())]
    Inconsistent(ValidationReport),
}

/// A subsystem named in a fallback answer that the platform does not know.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnswerWarning {
    pub question_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Completeness {
    pub answered: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Immutable inputs plus the mutable answer map.
///
/// Spec, platform, classifications and questions are shared between clones,
/// so snapshots are cheap.
#[derive(Debug, Clone)]
pub struct TriageState {
    spec: Arc<DiagnosticSpec>,
    platform: Arc<PlatformModel>,
    classifications: Arc<Classifications>,
    questions: Arc<Vec<Question>>,
    question_index: Arc<HashMap<String, usize>>,
    answers: BTreeMap<String, Answer>,
    revision: u64,
}

impl TriageState {
    /// Classifies the spec and generates its questionnaire. Revision starts at 0.
    pub fn new(spec: DiagnosticSpec, platform: PlatformModel) -> Result<Self, TriageError> {
        let report = validate(&spec, &platform)?;
        if !report.is_empty() {
            return Err(TriageError::Inconsistent(report));
        }
        let classifications = auto_classify(&spec, &platform);
        let questions = generate_questions(&spec, &platform, &classifications);
        let question_index = questions
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.clone(), i))
            .collect();
        Ok(Self {
            spec: Arc::new(spec),
            platform: Arc::new(platform),
            classifications: Arc::new(classifications),
            questions: Arc::new(questions),
            question_index: Arc::new(question_index),
            answers: BTreeMap::new(),
            revision: 0,
        })
    }

    pub fn spec(&self) -> &DiagnosticSpec {
        &self.spec
    }

    pub fn platform(&self) -> &PlatformModel {
        &self.platform
    }

    pub fn classifications(&self) -> &Classifications {
        &self.classifications
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.question_index.get(id).map(|&i| &self.questions[i])
    }

    pub fn answers(&self) -> &BTreeMap<String, Answer> {
        &self.answers
    }

    pub fn answer(&self, question_id: &str) -> Option<&Answer> {
        self.answers.get(question_id)
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Answers targeting `target`, keyed by step.
    pub fn answers_for(&self, target: &str) -> BTreeMap<HeuristicStep, &Answer> {
        self.answers
            .values()
            .filter_map(|a| {
                let q = self.question(&a.question_id)?;
                (q.target == target).then_some((q.step, a))
            })
            .collect()
    }

    /// Checks that `answer` targets an existing question with the right kind.
    pub fn check_answer(&self, answer: &Answer) -> Result<(), TriageError> {
        let q = self
            .question(&answer.question_id)
            .ok_or_else(|| TriageError::UnknownQuestion(answer.question_id.clone()))?;
        let got = answer.value.kind();
        if got != q.answer_kind {
            return Err(TriageError::TypeMismatch {
                id: q.id.clone(),
                expected: q.answer_kind,
                got,
            });
        }
        Ok(())
    }

    /// Stores `answer`, replacing any earlier answer to the same question,
    /// and bumps the revision. On error the state is unchanged.
    pub fn apply_answer(&mut self, answer: Answer) -> Result<(), TriageError> {
        self.check_answer(&answer)?;
        self.answers.insert(answer.question_id.clone(), answer);
        self.revision += 1;
        Ok(())
    }

    /// Non-mutating form of [`TriageState::apply_answer`].
    pub fn with_answer(&self, answer: Answer) -> Result<Self, TriageError> {
        let mut next = self.clone();
        next.apply_answer(answer)?;
        Ok(next)
    }

    /// Unanswered questions, in questionnaire order.
    pub fn open_questions(&self) -> impl Iterator<Item = &Question> {
        self.questions
            .iter()
            .filter(|q| !self.answers.contains_key(&q.id))
    }

    /// Subsystems named as `@ID` in fallback answers (S4A/S4B) that the
    /// platform does not contain.
    pub fn answer_warnings(&self) -> Vec<AnswerWarning> {
        let mut out = Vec::new();
        for a in self.answers.values() {
            let step = self.question(&a.question_id).map(|q| q.step);
            if !matches!(step, Some(HeuristicStep::S4A | HeuristicStep::S4B)) {
                continue;
            }
            let AnswerValue::Text(text) = &a.value else {
                continue;
            };
            for name in subsystem_mentions(text) {
                if self.platform.subsystem(name).is_none() {
                    out.push(AnswerWarning {
                        question_id: a.question_id.clone(),
                        message: format!("subsystem `{name}` is not part of the platform"),
                    });
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Identifiers written as `@ID` in free text.
pub(crate) fn subsystem_mentions(text: &str) -> Vec<&str> {
    text.split('@')
        .skip(1)
        .map(|rest| {
            let end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                .unwrap_or(rest.len());
            rest[..end].trim_end_matches('-')
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Share of generated questions that have an answer. A state without
/// questions is complete.
pub fn completeness(state: &TriageState) -> Completeness {
    let total = state.questions.len();
    let answered = state.answers.len();
    let fraction = if total == 0 {
        1.0
    } else {
        answered as f64 / total as f64
    };
    Completeness {
        answered,
        total,
        fraction,
    }
}
