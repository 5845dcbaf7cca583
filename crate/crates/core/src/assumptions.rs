//! Admissibility clauses for model data, checked before any run.
//!
//! The six clauses cover: (i) conductivity bounds and regularity, (ii)
//! permeability bounds and regularity, (iii) a finite source waveform, (iv)
//! bounded smooth kinetics, (v) bounded nonnegative boundary data and (vi)
//! admissible initial data.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Clause {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl Clause {
    pub fn roman(self) -> &'static str {
        match self {
            Clause::I => "i",
            Clause::II => "ii",
            Clause::III => "iii",
            Clause::IV => "iv",
            Clause::V => "v",
            Clause::VI => "vi",
        }
    }

    pub fn topic(self) -> &'static str {
        match self {
            Clause::I => "conductivity bounds",
            Clause::II => "permeability bounds",
            Clause::III => "source regularity",
            Clause::IV => "kinetics bounds",
            Clause::V => "boundary data",
            Clause::VI => "initial data",
        }
    }
}

/// One failed admissibility check, tied to the offending config key.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    /// `None` for structural constraints that are not one of the clauses.
    pub clause: Option<Clause>,
    pub detail: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, clause: Clause, detail: impl Into<String>) -> Self {
        Violation { key: key.into(), clause: Some(clause), detail: detail.into() }
    }

    pub fn structural(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Violation { key: key.into(), clause: None, detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clause {
            Some(c) => write!(f, "`{}` violates assumption ({}) [{}]: {}", self.key, c.roman(), c.topic(), self.detail),
            None => write!(f, "`{}`: {}", self.key, self.detail),
        }
    }
}

pub(crate) fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}
