//! Incremental Factor Oracle.
//!
//! States are `0..=n` after learning `n` symbols. Every state `i ≥ 1` has the
//! spine transition `δ(i-1, σ_i) = i`; extra forward transitions are added
//! while walking the suffix chain of the previous last state, and the suffix
//! link of the new state is the target reached at the end of that walk.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub type Symbol = i64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("symbol {symbol} is outside the alphabet {lo}..{hi}")]
    InvalidSymbol { symbol: Symbol, lo: Symbol, hi: Symbol },
    #[error("state {state} does not exist (oracle has states 0..={last})")]
    InvalidState { state: i64, last: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorOracle {
    alphabet: (Symbol, Symbol),
    sigma: Vec<Symbol>,
    delta: Vec<BTreeMap<Symbol, usize>>,
    suffix: Vec<i64>,
}

/// One line of [`FactorOracle::dump`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDump {
    pub state: usize,
    pub suffix: i64,
    pub outgoing: BTreeMap<Symbol, usize>,
}

impl FactorOracle {
    /// An empty oracle accepting symbols in `lo..=hi`.
    pub fn new(lo: Symbol, hi: Symbol) -> Self {
        FactorOracle {
            alphabet: (lo, hi),
            sigma: Vec::new(),
            delta: vec![BTreeMap::new()],
            suffix: vec![-1],
        }
    }

    pub fn from_sequence(lo: Symbol, hi: Symbol, seq: &[Symbol]) -> Result<Self, OracleError> {
        let mut fo = Self::new(lo, hi);
        for &s in seq {
            fo.add_symbol(s)?;
        }
        Ok(fo)
    }

    pub fn alphabet(&self) -> (Symbol, Symbol) {
        self.alphabet
    }

    /// Number of learned symbols.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn sequence(&self) -> &[Symbol] {
        &self.sigma
    }

    /// Learns one symbol and returns the new state.
    pub fn add_symbol(&mut self, s: Symbol) -> Result<usize, OracleError> {
        let (lo, hi) = self.alphabet;
        if s < lo || s > hi {
            return Err(OracleError::InvalidSymbol { symbol: s, lo, hi });
        }
        let m = self.sigma.len();
        let new = m + 1;
        self.sigma.push(s);
        self.delta.push(BTreeMap::new());
        self.delta[m].insert(s, new);
        let mut k = self.suffix[m];
        while k > -1 && !self.delta[k as usize].contains_key(&s) {
            self.delta[k as usize].insert(s, new);
            k = self.suffix[k as usize];
        }
        let link = if k == -1 {
            0
        } else {
            self.delta[k as usize][&s] as i64
        };
        self.suffix.push(link);
        Ok(new)
    }

    fn check_state(&self, k: i64) -> Result<usize, OracleError> {
        if k < 0 || k as usize >= self.delta.len() {
            return Err(OracleError::InvalidState {
                state: k,
                last: self.delta.len() - 1,
            });
        }
        Ok(k as usize)
    }

    pub fn suffix(&self, i: i64) -> Result<i64, OracleError> {
        Ok(self.suffix[self.check_state(i)?])
    }

    pub fn delta(&self, k: i64, s: Symbol) -> Result<Option<usize>, OracleError> {
        Ok(self.delta[self.check_state(k)?].get(&s).copied())
    }

    /// Labels of the transitions leaving `k`.
    pub fn from_set(&self, k: i64) -> Result<BTreeSet<Symbol>, OracleError> {
        Ok(self.delta[self.check_state(k)?].keys().copied().collect())
    }

    pub fn transitions(&self, k: usize) -> &BTreeMap<Symbol, usize> {
        &self.delta[k]
    }

    /// Whether `word` can be read from state 0.
    pub fn is_factor(&self, word: &[Symbol]) -> bool {
        let mut state = 0usize;
        for s in word {
            match self.delta[state].get(s) {
                Some(&next) => state = next,
                None => return false,
            }
        }
        true
    }

    pub fn dump(&self) -> Vec<StateDump> {
        (0..self.delta.len())
            .map(|k| StateDump {
                state: k,
                suffix: self.suffix[k],
                outgoing: self.delta[k].clone(),
            })
            .collect()
    }
}
