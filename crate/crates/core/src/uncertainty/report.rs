use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sdp::DiamondResult;

/// Slack below which an inequality verdict is reported as a violation.
pub const GRACE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `√ε_X + √ε_Z ≥ c₁` for a joint measurement.
    Jm,
    /// `√2·√ε_X + η_Z ≥ c₂(X;Z)`.
    Ed,
    /// `min_𝒫 δ(A_X, 𝒫∘Q_X) ≤ √(2ε_X)`.
    Measprep,
    /// `min_𝒞 δ(𝒩^♯∘Q_Z^♮, 𝒞) ≤ 2√ε + 1 − c₂(X;Z)`.
    Leakage,
    /// `‖E₁ − E₂‖◇ ≤ 2‖UV₁ − V₂‖`.
    StinespringSandwich,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Jm => "jm",
            Relation::Ed => "ed",
            Relation::Measprep => "measprep",
            Relation::Leakage => "leakage",
            Relation::StinespringSandwich => "stinespring_sandwich",
        })
    }
}

/// Which way the checked inequality points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `lhs ≥ rhs`.
    Ge,
    /// `lhs ≤ rhs`.
    Le,
}

/// Outcome of one inequality check.
///
/// `slack` is the margin by which the inequality holds: `lhs − rhs` for a
/// `≥` relation and `rhs − lhs` for a `≤` relation, so `pass` is always
/// `slack ≥ −GRACE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub relation: Relation,
    pub sense: Sense,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub components: BTreeMap<String, f64>,
    pub certificate_refs: Vec<String>,
}

impl VerificationReport {
    pub fn new(
        relation: Relation,
        sense: Sense,
        lhs: f64,
        rhs: f64,
        components: BTreeMap<String, f64>,
        certificate_refs: Vec<String>,
    ) -> Self {
        let slack = match sense {
            Sense::Ge => lhs - rhs,
            Sense::Le => rhs - lhs,
        };
        Self {
            relation,
            sense,
            lhs,
            rhs,
            slack,
            pass: slack >= -GRACE,
            components,
            certificate_refs,
        }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.get(name).copied()
    }
}

/// Short description of a diamond-norm solve for `certificate_refs`.
pub(crate) fn diamond_ref(name: &str, r: &DiamondResult) -> String {
    format!(
        "{name}: diamond SDP primal {:.12} dual {:.12} gap {:.2e} after {} iterations",
        r.primal_value, r.dual_value, r.gap, r.iterations
    )
}

pub(crate) fn fit_ref(name: &str, upper: f64, lower: f64) -> String {
    format!("{name}: joint SDP certified upper {upper:.12} primal lower {lower:.12}")
}
