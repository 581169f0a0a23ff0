//! Named inequality checks with exact left-hand sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numeric::{ratio, sig12};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

/// Direction of the inequality being checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

/// Where a set came from; filled in by the corpus runner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDescriptor {
    pub generator: String,
    pub params: Value,
    pub size: usize,
    pub hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Side {
    /// Exact value when known.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub formula: Option<String>,
    #[serde(deserialize_with = "nullable_f64")]
    pub decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set: Option<SetDescriptor>,
    pub relation: Relation,
    pub lhs: Side,
    pub rhs: Side,
    /// How the constant is treated, e.g. `explicit` or `implicit, taken as 1`.
    pub constant: String,
    #[serde(deserialize_with = "nullable_f64")]
    pub ratio: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, Value>,
    /// Kept out of the serialised report so that reports are reproducible.
    #[serde(skip)]
    pub wall_time_ms: Option<f64>,
}

/// JSON has no infinities or NaN; they are written as `null` and read back as NaN.
fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

pub const EXPLICIT: &str = "explicit";
pub const IMPLICIT: &str = "implicit, taken as 1";

impl InequalityReport {
    /// An asserted check between two exact values.
    pub fn exact(check: &str, lhs: &Rational, relation: Relation, rhs: &Rational, formula: &str) -> Self {
        let verdict = if relation.holds(lhs, rhs) { Verdict::Pass } else { Verdict::Fail };
        InequalityReport {
            check: check.to_string(),
            set: None,
            relation,
            lhs: Side { exact: Some(lhs.to_string()), formula: None, decimal: lhs.to_f64() },
            rhs: Side { exact: Some(rhs.to_string()), formula: Some(formula.to_string()), decimal: rhs.to_f64() },
            constant: EXPLICIT.to_string(),
            ratio: sig12(ratio(lhs, rhs)),
            verdict,
            details: BTreeMap::new(),
            wall_time_ms: None,
        }
    }

    /// A ratio-only report against a formula evaluated in floating point.
    pub fn profile(check: &str, lhs: &Rational, relation: Relation, rhs: f64, formula: &str) -> Self {
        let l = lhs.to_f64();
        InequalityReport {
            check: check.to_string(),
            set: None,
            relation,
            lhs: Side { exact: Some(lhs.to_string()), formula: None, decimal: l },
            rhs: Side { exact: None, formula: Some(formula.to_string()), decimal: rhs },
            constant: IMPLICIT.to_string(),
            ratio: sig12(l / rhs),
            verdict: Verdict::ReportOnly,
            details: BTreeMap::new(),
            wall_time_ms: None,
        }
    }

    /// A ratio-only report whose right-hand side is exact.
    pub fn profile_exact(check: &str, lhs: &Rational, relation: Relation, rhs: &Rational, formula: &str) -> Self {
        let mut r = InequalityReport::exact(check, lhs, relation, rhs, formula);
        r.verdict = Verdict::ReportOnly;
        r.constant = IMPLICIT.to_string();
        r
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.details
            .insert(key.to_string(), serde_json::to_value(value).expect("detail serialises"));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}
