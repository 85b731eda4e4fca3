use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error("no JSON object found in the response")]
    NoObject,
    #[error("message for `{0}` is not a plain string")]
    NonFlat(String),
}

/// Messages one agent sends in one round, keyed by recipient.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundEnvelope {
    pub round_index: usize,
    pub sender: String,
    pub messages: BTreeMap<String, String>,
}

/// Result of extracting an envelope from raw model output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedEnvelope {
    pub messages: BTreeMap<String, String>,
    /// Keys that were not allowed recipients.
    pub dropped: Vec<String>,
}

/// Top-level JSON objects in `raw`, in order of appearance. Objects nested
/// inside another object are not reported separately.
fn json_objects(raw: &str) -> Vec<serde_json::Map<String, Value>> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(off) = raw[i..].find('{') {
        let start = i + off;
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => {
                out.push(map);
                i = start + stream.byte_offset();
            }
            _ => i = start + 1,
        }
    }
    out
}

/// Extracts the last JSON object from free-form model output (chain of
/// thought, code fences and trailing prose are ignored).
///
/// Scalar values are accepted as text; nested arrays or objects make the
/// envelope invalid. Keys outside `allowed` are dropped. Duplicate keys keep
/// the last value.
pub fn parse_message_envelope(raw: &str, allowed: &BTreeSet<String>) -> Result<ParsedEnvelope, EnvelopeError> {
    let map = json_objects(raw).pop().ok_or(EnvelopeError::NoObject)?;
    let mut parsed = ParsedEnvelope::default();
    for (key, value) in map {
        let text = match value {
            Value::String(s) => s,
            Value::Null => continue,
            Value::Bool(b) => b.to_string(),
            Value::Number(n) => n.to_string(),
            Value::Array(_) | Value::Object(_) => return Err(EnvelopeError::NonFlat(key)),
        };
        if allowed.contains(&key) {
            parsed.messages.insert(key, text);
        } else {
            parsed.dropped.push(key);
        }
    }
    Ok(parsed)
}
