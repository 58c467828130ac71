use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `(epsilon, delta)` privacy guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::arg(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// One privacy charge: the loss vector of `round` was read by `mechanism`
/// at privacy cost `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub round: usize,
    pub mechanism: String,
    pub epsilon: f64,
}

/// Append-only log of which mechanism instances touched which round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BudgetLedger {
    entries: Vec<Charge>,
}

impl BudgetLedger {
    pub fn charge(&mut self, round: usize, mechanism: impl Into<String>, epsilon: f64) {
        self.entries.push(Charge {
            round,
            mechanism: mechanism.into(),
            epsilon,
        });
    }

    /// Moves every entry of `other` to the end of this ledger.
    pub fn append(&mut self, other: &mut BudgetLedger) {
        self.entries.append(&mut other.entries);
    }

    pub fn entries(&self) -> &[Charge] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn charges_for(&self, round: usize) -> impl Iterator<Item = &Charge> {
        self.entries.iter().filter(move |c| c.round == round)
    }

    pub fn total_for(&self, round: usize) -> f64 {
        self.charges_for(round).map(|c| c.epsilon).sum()
    }

    /// Charges grouped by round, rounds in increasing order.
    pub fn by_round(&self) -> BTreeMap<usize, Vec<&Charge>> {
        let mut map: BTreeMap<usize, Vec<&Charge>> = BTreeMap::new();
        for c in &self.entries {
            map.entry(c.round).or_default().push(c);
        }
        map
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
