use std::fmt;

use serde::{Deserialize, Serialize};

use crate::query::BackendTag;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    StrongTc,
    WeakTc,
    OrderTc,
    SubTc,
    Restriction,
    Normalization,
    HLongevity,
    HorizonComparison,
    Cocycle,
    WeakCocycle,
    SubPenalty,
    AcceptanceInclusion,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::StrongTc,
        Property::WeakTc,
        Property::OrderTc,
        Property::SubTc,
        Property::Restriction,
        Property::Normalization,
        Property::HLongevity,
        Property::HorizonComparison,
        Property::Cocycle,
        Property::WeakCocycle,
        Property::SubPenalty,
        Property::AcceptanceInclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::StrongTc => "strong_tc",
            Property::WeakTc => "weak_tc",
            Property::OrderTc => "order_tc",
            Property::SubTc => "sub_tc",
            Property::Restriction => "restriction",
            Property::Normalization => "normalization",
            Property::HLongevity => "h_longevity",
            Property::HorizonComparison => "horizon_comparison",
            Property::Cocycle => "cocycle",
            Property::WeakCocycle => "weak_cocycle",
            Property::SubPenalty => "sub_penalty",
            Property::AcceptanceInclusion => "acceptance_inclusion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Human label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Property::OrderTc => "order-TC (canonical witness)",
            Property::StrongTc => "strong-TC",
            Property::WeakTc => "weak-TC",
            Property::SubTc => "sub-TC",
            Property::HLongevity => "h-longevity",
            Property::Restriction => "restriction",
            Property::Normalization => "normalization",
            Property::HorizonComparison => "horizon comparison",
            Property::Cocycle => "cocycle",
            Property::WeakCocycle => "weak cocycle",
            Property::SubPenalty => "sub-penalty",
            Property::AcceptanceInclusion => "acceptance-set inclusion",
        }
    }

    /// Inequalities report `max(lhs - rhs, 0)`; identities report `max |lhs - rhs|`.
    pub fn one_sided(self) -> bool {
        matches!(
            self,
            Property::SubTc
                | Property::HLongevity
                | Property::HorizonComparison
                | Property::SubPenalty
                | Property::AcceptanceInclusion
                | Property::WeakCocycle
        )
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.passed() { "pass" } else { "fail" })
    }
}

/// One checked instance: a triple, an item (claim or measure index) and its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<S> {
    pub s: S,
    pub t: S,
    pub u: S,
    pub item: usize,
    /// `max |lhs - rhs|` or `max(lhs - rhs)` over nodes, by property.
    pub violation: S,
    /// Tolerance plus the Monte Carlo widening for this row.
    pub allowance: S,
}

impl<S: Scalar> ReportRow<S> {
    pub fn passed(&self) -> bool {
        self.violation <= self.allowance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<S> {
    pub property: Property,
    pub backend: BackendTag,
    pub tolerance: S,
    pub triples: Vec<(S, S, S)>,
    pub rows: Vec<ReportRow<S>>,
    /// Largest residual; one-sided properties clamp at zero.
    pub worst_violation: S,
    /// Largest raw residual, before clamping.
    pub worst_signed: S,
    /// Row attaining the largest excess over its allowance.
    pub witness: Option<usize>,
    pub verdict: Verdict,
    /// Acceptance-set membership per row, `(in A_su, in A_st)`, for inclusion reports.
    pub memberships: Vec<(bool, bool)>,
    pub notes: Vec<String>,
}

impl<S: Scalar> ConsistencyReport<S> {
    pub fn new(property: Property, backend: BackendTag, tolerance: S, triples: Vec<(S, S, S)>, rows: Vec<ReportRow<S>>) -> Self {
        let mut worst_signed = S::neg_infinity();
        let mut witness = None;
        let mut worst_excess = S::neg_infinity();
        let mut fail = false;
        for (i, r) in rows.iter().enumerate() {
            if r.violation.is_nan() {
                fail = true;
                witness = Some(i);
                continue;
            }
            worst_signed = worst_signed.max(r.violation);
            let excess = r.violation - r.allowance;
            if excess > worst_excess || witness.is_none() {
                worst_excess = excess;
                witness = Some(i);
            }
            if excess > S::zero() {
                fail = true;
            }
        }
        if rows.is_empty() {
            worst_signed = S::zero();
        }
        let worst_violation = if property.one_sided() { worst_signed.max(S::zero()) } else { worst_signed };
        Self {
            property,
            backend,
            tolerance,
            triples,
            rows,
            worst_violation,
            worst_signed,
            witness,
            verdict: if fail { Verdict::Fail } else { Verdict::Pass },
            memberships: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
