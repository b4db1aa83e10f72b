use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Wheel or axle position such as `FL`, `RR` or `R2L`.
///
/// Grammar: `(F|R)[1-9]?(L|R)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LocationTag(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid location tag `{0}`")]
pub struct ParseLocationError(pub String);

impl LocationTag {
    /// Checks `s` against the location grammar.
    pub fn matches_grammar(s: &str) -> bool {
        let b = s.as_bytes();
        let axle_ok = |c: u8| c == b'F' || c == b'R';
        let side_ok = |c: u8| c == b'L' || c == b'R';
        match b.len() {
            2 => axle_ok(b[0]) && side_ok(b[1]),
            3 => axle_ok(b[0]) && (b'1'..=b'9').contains(&b[1]) && side_ok(b[2]),
            _ => false,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for LocationTag {
    type Err = ParseLocationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if Self::matches_grammar(s) {
            Ok(Self(s.to_owned()))
        } else {
            Err(ParseLocationError(s.to_owned()))
        }
    }
}

impl TryFrom<String> for LocationTag {
    type Error = ParseLocationError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if Self::matches_grammar(&s) {
            Ok(Self(s))
        } else {
            Err(ParseLocationError(s))
        }
    }
}

impl From<LocationTag> for String {
    fn from(tag: LocationTag) -> Self {
        tag.0
    }
}

impl fmt::Display for LocationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
