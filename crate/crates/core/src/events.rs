//! Environment input: per-unit constraints as JSON Lines
//! `{"unit": n, "tells": ["x = 1", ...]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsl::{parse_cond, Cond};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub unit: u64,
    #[serde(default)]
    pub tells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct EventError {
    pub line: usize,
    pub message: String,
}

/// Parsed environment input. Units absent from the stream receive no tells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStream {
    by_unit: BTreeMap<u64, Vec<(String, Cond)>>,
}

impl EventStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_jsonl(text: &str) -> Result<Self, EventError> {
        let mut stream = EventStream::new();
        let mut last = 0u64;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| EventError {
                line: i + 1,
                message,
            };
            let rec: EventRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            if rec.unit == 0 {
                return Err(err("units are numbered from 1".into()));
            }
            if rec.unit < last {
                return Err(err(format!("unit {} follows unit {last}", rec.unit)));
            }
            last = rec.unit;
            for t in rec.tells {
                stream.push(rec.unit, &t).map_err(|e| err(format!("`{t}`: {e}")))?;
            }
            stream.by_unit.entry(rec.unit).or_default();
        }
        Ok(stream)
    }

    /// Adds one constraint for `unit`.
    pub fn push(&mut self, unit: u64, text: &str) -> Result<(), crate::dsl::ParseError> {
        let c = parse_cond(text)?;
        self.by_unit.entry(unit).or_default().push((text.trim().to_string(), c));
        Ok(())
    }

    pub fn tells(&self, unit: u64) -> &[(String, Cond)] {
        self.by_unit.get(&unit).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn last_unit(&self) -> Option<u64> {
        self.by_unit.keys().next_back().copied()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (unit, tells) in &self.by_unit {
            let rec = EventRecord {
                unit: *unit,
                tells: tells.iter().map(|(t, _)| t.clone()).collect(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_orders_units() {
        let s = EventStream::from_jsonl(
            "{\"unit\":1,\"tells\":[\"note = 60\"]}\n\n{\"unit\":1,\"tells\":[\"go >= 1\"]}\n{\"unit\":3}\n",
        )
        .unwrap();
        assert_eq!(s.tells(1).len(), 2);
        assert!(s.tells(2).is_empty());
        assert_eq!(s.last_unit(), Some(3));
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(EventStream::from_jsonl("{\"unit\":2}\n{\"unit\":1}").unwrap_err().line, 2);
        assert_eq!(EventStream::from_jsonl("{\"unit\":1,\"tells\":[\"x =\"]}").unwrap_err().line, 1);
        assert!(EventStream::from_jsonl("not json").is_err());
        assert!(EventStream::from_jsonl("{\"unit\":0}").is_err());
    }
}
