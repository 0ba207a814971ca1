//! Per-unit records and their JSON Lines encoding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitStatus {
    Ok,
    Failed,
}

/// Value of an output: an integer, or the known members of a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutValue {
    Int(i64),
    Set(Vec<i64>),
}

impl OutValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            OutValue::Int(v) => Some(*v),
            OutValue::Set(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    /// Index of the chosen branch in the expanded branch list.
    pub branch: usize,
    /// Branches whose guards were entailed when the choice was made.
    pub enabled: Vec<usize>,
    pub guard: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NativeRecord {
    pub name: String,
    pub args: Vec<i64>,
    pub result: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub unit: u64,
    pub env: Vec<String>,
    pub fired: Vec<String>,
    pub choices: Vec<ChoiceRecord>,
    pub natives: Vec<NativeRecord>,
    pub outputs: BTreeMap<String, OutValue>,
    pub status: UnitStatus,
    /// Process installations performed during the unit.
    pub processes: usize,
}

impl UnitRecord {
    pub fn output(&self, name: &str) -> Option<i64> {
        self.outputs.get(name).and_then(OutValue::as_int)
    }

    /// One JSON object with keys in sorted order.
    pub fn to_json_line(&self) -> String {
        let value = serde_json::to_value(self).expect("records serialize");
        serde_json::to_string(&value).expect("values serialize")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<UnitRecord>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Trace { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_round_trip() {
        let mut outputs = BTreeMap::new();
        outputs.insert("pitch".to_string(), OutValue::Int(60));
        outputs.insert("played".to_string(), OutValue::Set(vec![52]));
        let r = UnitRecord {
            unit: 1,
            env: vec!["x = 1".into()],
            fired: vec![],
            choices: vec![ChoiceRecord {
                branch: 1,
                enabled: vec![1],
                guard: "true".into(),
            }],
            natives: vec![],
            outputs,
            status: UnitStatus::Ok,
            processes: 3,
        };
        let line = r.to_json_line();
        assert!(line.starts_with("{\"choices\":[{\"branch\":1,\"enabled\":[1],\"guard\":\"true\"}],\"env\""));
        let t = Trace { records: vec![r] };
        assert_eq!(Trace::from_jsonl(&t.to_jsonl()).unwrap(), t);
    }
}
