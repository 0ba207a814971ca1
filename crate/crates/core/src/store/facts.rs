//! Ground facts that outlive a time-unit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CellIndex;

/// Monotone record of determined persistent cells and persistent set members.
///
/// A value, once recorded for a cell, can never change; set members are only
/// ever added.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistentFactBase {
    values: BTreeMap<String, BTreeMap<CellIndex, i64>>,
    members: BTreeMap<String, BTreeMap<CellIndex, BTreeSet<i64>>>,
}

/// A fact that contradicts one recorded earlier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactConflict {
    pub existing: i64,
}

impl PersistentFactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self, family: &str, index: CellIndex) -> Option<i64> {
        self.values.get(family)?.get(&index).copied()
    }

    pub fn members(&self, family: &str, index: CellIndex) -> Option<&BTreeSet<i64>> {
        self.members.get(family)?.get(&index)
    }

    /// Records `family[index] = value`. Returns `Ok(true)` when the fact is new.
    pub fn record_value(
        &mut self,
        family: &str,
        index: CellIndex,
        value: i64,
    ) -> Result<bool, FactConflict> {
        let cells = self.values.entry(family.to_string()).or_default();
        match cells.get(&index) {
            Some(&existing) if existing != value => Err(FactConflict { existing }),
            Some(_) => Ok(false),
            None => {
                cells.insert(index, value);
                Ok(true)
            }
        }
    }

    /// Records `member ∈ family[index]`. Returns whether the member is new.
    pub fn record_member(&mut self, family: &str, index: CellIndex, member: i64) -> bool {
        self.members
            .entry(family.to_string())
            .or_default()
            .entry(index)
            .or_default()
            .insert(member)
    }

    pub fn len(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum::<usize>()
            + self
                .members
                .values()
                .flat_map(BTreeMap::values)
                .map(BTreeSet::len)
                .sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
