use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kripke::Kripke;

/// Search limits for every budget-bounded decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatBudget {
    pub max_worlds: usize,
    /// Default carrier bound for every sort.
    pub max_carrier: usize,
    /// Per-sort carrier bounds overriding `max_carrier`.
    pub carrier: BTreeMap<String, usize>,
    /// Fresh constants per extended sort.
    pub max_constants: usize,
    pub star_bound: usize,
    pub term_depth: usize,
    /// Search nodes allowed per call before giving up.
    pub node_limit: u64,
}

impl Default for SatBudget {
    fn default() -> Self {
        SatBudget {
            max_worlds: 3,
            max_carrier: 2,
            carrier: BTreeMap::new(),
            max_constants: 1,
            star_bound: 3,
            term_depth: 2,
            node_limit: 2_000_000,
        }
    }
}

impl SatBudget {
    pub fn carrier_bound(&self, s: &str) -> usize {
        self.carrier.get(s).copied().unwrap_or(self.max_carrier)
    }

    pub fn with_worlds(mut self, n: usize) -> Self {
        self.max_worlds = n;
        self
    }

    pub fn with_carrier(mut self, s: &str, n: usize) -> Self {
        self.carrier.insert(s.to_string(), n);
        self
    }
}

/// Result of a bounded model search. `NoModel` only means none within budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Model(Box<Kripke>),
    NoModel,
    BudgetExceeded,
}

impl SatOutcome {
    pub fn is_model(&self) -> bool {
        matches!(self, SatOutcome::Model(_))
    }

    pub fn model(self) -> Option<Kripke> {
        match self {
            SatOutcome::Model(m) => Some(*m),
            _ => None,
        }
    }
}

/// A three-valued verdict where the third value means the budget ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    True,
    False,
    BudgetExceeded,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    pub fn negate(self) -> Self {
        match self {
            Verdict::True => Verdict::False,
            Verdict::False => Verdict::True,
            v => v,
        }
    }

    /// Disjunction: true wins, then exceeded.
    pub fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::True, _) | (_, Verdict::True) => Verdict::True,
            (Verdict::BudgetExceeded, _) | (_, Verdict::BudgetExceeded) => Verdict::BudgetExceeded,
            _ => Verdict::False,
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        self.negate().or(other.negate()).negate()
    }
}
