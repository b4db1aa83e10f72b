//! Typed expert answers and their JSON-lines wire form
//! `{question_id, kind, value, author, timestamp}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::spec_model::InterfaceDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerKind {
    Text,
    Boolean,
    DurationLimits,
    InterfaceSpec,
    DataNeed,
}

impl AnswerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswerKind::Text => "TEXT",
            AnswerKind::Boolean => "BOOLEAN",
            AnswerKind::DurationLimits => "DURATION_LIMITS",
            AnswerKind::InterfaceSpec => "INTERFACE_SPEC",
            AnswerKind::DataNeed => "DATA_NEED",
        }
    }
}

impl fmt::Display for AnswerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationLimits {
    pub min_ms: u64,
    pub max_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DataFormat {
    NetworkSignal,
    EcuMemory,
    Other,
}

impl DataFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            DataFormat::NetworkSignal => "NETWORK_SIGNAL",
            DataFormat::EcuMemory => "ECU_MEMORY",
            DataFormat::Other => "OTHER",
        }
    }
}

/// Data the ADI needs to detect a failure, and the form it arrives in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataNeed {
    pub data_item: String,
    pub format: DataFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnswerValue {
    Text(String),
    Boolean(bool),
    DurationLimits(DurationLimits),
    InterfaceSpec(InterfaceDescriptor),
    DataNeed(DataNeed),
}

impl AnswerValue {
    pub fn kind(&self) -> AnswerKind {
        match self {
            AnswerValue::Text(_) => AnswerKind::Text,
            AnswerValue::Boolean(_) => AnswerKind::Boolean,
            AnswerValue::DurationLimits(_) => AnswerKind::DurationLimits,
            AnswerValue::InterfaceSpec(_) => AnswerKind::InterfaceSpec,
            AnswerValue::DataNeed(_) => AnswerKind::DataNeed,
        }
    }

    fn to_json(&self) -> Value {
        let encoded = match self {
            AnswerValue::Text(s) => Ok(Value::String(s.clone())),
            AnswerValue::Boolean(b) => Ok(Value::Bool(*b)),
            AnswerValue::DurationLimits(d) => serde_json::to_value(d),
            AnswerValue::InterfaceSpec(i) => serde_json::to_value(i),
            AnswerValue::DataNeed(d) => serde_json::to_value(d),
        };
        // Plain data structs always encode.
        encoded.unwrap_or(Value::Null)
    }

    fn from_json(kind: AnswerKind, value: Value) -> Result<Self, AnswerParseError> {
        let bad = |e: serde_json::Error| AnswerParseError::InvalidValue {
            kind,
            reason: e.to_string(),
        };
        let v = match kind {
            AnswerKind::Text => AnswerValue::Text(serde_json::from_value(value).map_err(bad)?),
            AnswerKind::Boolean => {
                AnswerValue::Boolean(serde_json::from_value(value).map_err(bad)?)
            }
            AnswerKind::DurationLimits => {
                let d: DurationLimits = serde_json::from_value(value).map_err(bad)?;
                if d.min_ms > d.max_ms {
                    return Err(AnswerParseError::InvalidValue {
                        kind,
                        reason: format!("min_ms {} exceeds max_ms {}", d.min_ms, d.max_ms),
                    });
                }
                AnswerValue::DurationLimits(d)
            }
            AnswerKind::InterfaceSpec => {
                AnswerValue::InterfaceSpec(serde_json::from_value(value).map_err(bad)?)
            }
            AnswerKind::DataNeed => {
                AnswerValue::DataNeed(serde_json::from_value(value).map_err(bad)?)
            }
        };
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnswerParseError {
    #[error("value does not fit kind {kind}: {reason}")]
    InvalidValue { kind: AnswerKind, reason: String },
    #[error("timestamp `{0}` is not ISO-8601")]
    InvalidTimestamp(String),
    #[error("invalid answer JSON: {0}")]
    Json(String),
}

/// An expert's answer to one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnswerRecord", into = "AnswerRecord")]
pub struct Answer {
    pub question_id: String,
    pub value: AnswerValue,
    pub author: String,
    /// ISO-8601 timestamp supplied by the author's tooling.
    pub timestamp: String,
}

/// Wire form of an [`Answer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRecord {
    pub question_id: String,
    pub kind: AnswerKind,
    pub value: Value,
    pub author: String,
    pub timestamp: String,
}

impl TryFrom<AnswerRecord> for Answer {
    type Error = AnswerParseError;

    fn try_from(rec: AnswerRecord) -> Result<Self, Self::Error> {
        if chrono::DateTime::parse_from_rfc3339(&rec.timestamp).is_err() {
            return Err(AnswerParseError::InvalidTimestamp(rec.timestamp));
        }
        Ok(Answer {
            value: AnswerValue::from_json(rec.kind, rec.value)?,
            question_id: rec.question_id,
            author: rec.author,
            timestamp: rec.timestamp,
        })
    }
}

impl From<Answer> for AnswerRecord {
    fn from(a: Answer) -> Self {
        AnswerRecord {
            kind: a.value.kind(),
            value: a.value.to_json(),
            question_id: a.question_id,
            author: a.author,
            timestamp: a.timestamp,
        }
    }
}

impl Answer {
    pub fn new(
        question_id: impl Into<String>,
        value: AnswerValue,
        author: impl Into<String>,
        timestamp: impl Into<String>,
    ) -> Self {
        Self {
            question_id: question_id.into(),
            value,
            author: author.into(),
            timestamp: timestamp.into(),
        }
    }

    /// Parses one JSON line.
    pub fn from_json_line(line: &str) -> Result<Self, AnswerParseError> {
        let rec: AnswerRecord =
            serde_json::from_str(line).map_err(|e| AnswerParseError::Json(e.to_string()))?;
        Answer::try_from(rec)
    }

    /// Encodes the answer as a single JSON line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&AnswerRecord::from(self.clone())).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_model::InterfaceKind;

    #[test]
    fn wire_form() {
        let a = Answer::new(
            "S2B:M1",
            AnswerValue::DurationLimits(DurationLimits {
                min_ms: 50,
                max_ms: 500,
            }),
            "expert",
            "2016-10-01T09:00:00Z",
        );
        let line = a.to_json_line();
        assert_eq!(
            line,
            r#"{"question_id":"S2B:M1","kind":"DURATION_LIMITS","value":{"min_ms":50,"max_ms":500},"author":"expert","timestamp":"2016-10-01T09:00:00Z"}"#
        );
        assert_eq!(Answer::from_json_line(&line).unwrap(), a);
    }

    #[test]
    fn interface_answer_round_trip() {
        let a = Answer::new(
            "S1A:M1",
            AnswerValue::InterfaceSpec(InterfaceDescriptor {
                id: "xbr".into(),
                kind: InterfaceKind::NetworkSignal,
                description: "brake request".into(),
                signal_frequency_hz: Some(100.0),
                granularity: None,
            }),
            "expert",
            "2016-10-01T09:00:00+02:00",
        );
        assert_eq!(Answer::from_json_line(&a.to_json_line()).unwrap(), a);
    }

    #[test]
    fn rejects_inverted_duration() {
        let line = r#"{"question_id":"q","kind":"DURATION_LIMITS","value":{"min_ms":600,"max_ms":500},"author":"a","timestamp":"2016-10-01T09:00:00Z"}"#;
        assert!(matches!(
            Answer::from_json_line(line),
            Err(AnswerParseError::InvalidValue { .. })
        ));
    }

    #[test]
    fn rejects_value_not_matching_kind() {
        let line = r#"{"question_id":"q","kind":"BOOLEAN","value":"yes","author":"a","timestamp":"2016-10-01T09:00:00Z"}"#;
        assert!(matches!(
            Answer::from_json_line(line),
            Err(AnswerParseError::InvalidValue { .. })
        ));
        let line = r#"{"question_id":"q","kind":"DATA_NEED","value":{"data_item":"x","format":"FAX"},"author":"a","timestamp":"2016-10-01T09:00:00Z"}"#;
        assert!(Answer::from_json_line(line).is_err());
    }

    #[test]
    fn rejects_bad_timestamp_and_unknown_fields() {
        let line =
            r#"{"question_id":"q","kind":"TEXT","value":"x","author":"a","timestamp":"yesterday"}"#;
        assert!(matches!(
            Answer::from_json_line(line),
            Err(AnswerParseError::InvalidTimestamp(_))
        ));
        let line = r#"{"question_id":"q","kind":"TEXT","value":"x","author":"a","timestamp":"2016-10-01T09:00:00Z","extra":1}"#;
        assert!(matches!(
            Answer::from_json_line(line),
            Err(AnswerParseError::Json(_))
        ));
    }
}
