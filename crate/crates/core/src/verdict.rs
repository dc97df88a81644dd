//! Persisted record of one check on one instance.

use std::collections::BTreeMap;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::exact::Comparison;
use crate::group::GSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "not_applicable",
        }
    }
}

// JSON form: `true`, `false` or `"not_applicable"`.
impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Outcome::Pass => s.serialize_bool(true),
            Outcome::Fail => s.serialize_bool(false),
            Outcome::NotApplicable => s.serialize_str("not_applicable"),
        }
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Bool(true) => Ok(Outcome::Pass),
            Value::Bool(false) => Ok(Outcome::Fail),
            Value::String(s) if s == "not_applicable" => Ok(Outcome::NotApplicable),
            other => Err(de::Error::custom(format!("bad pass value {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check_id: String,
    pub group: String,
    pub set_repr: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: String,
    pub rhs: String,
    pub margin: f64,
    pub pass: Outcome,
    pub witness: Option<Value>,
}

impl Verdict {
    pub fn builder(check_id: &str, set: &GSet) -> VerdictBuilder {
        VerdictBuilder::new(check_id, set.group().descriptor(), set.literal())
    }

    pub fn is_fail(&self) -> bool {
        self.pass == Outcome::Fail
    }

    pub fn is_pass(&self) -> bool {
        self.pass == Outcome::Pass
    }

    /// Names of the sub-comparisons recorded in `params.comparisons`.
    pub fn comparison_names(&self) -> Vec<String> {
        self.params
            .get("comparisons")
            .and_then(Value::as_array)
            .map(|arr| {
                arr.iter()
                    .filter_map(|c| c.get("name").and_then(Value::as_str).map(str::to_owned))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Looks up a sub-comparison by name.
    pub fn comparison(&self, name: &str) -> Option<&Value> {
        self.params
            .get("comparisons")?
            .as_array()?
            .iter()
            .find(|c| c.get("name").and_then(Value::as_str) == Some(name))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialize")
    }
}

pub struct VerdictBuilder {
    v: Verdict,
}

fn comparison_json(c: &Comparison) -> Value {
    json!({
        "name": c.name,
        "lhs": c.lhs.to_string(),
        "relation": c.rel.symbol(),
        "rhs": c.rhs.to_string(),
        "tolerance": c.tol,
        "holds": c.holds,
        "margin": finite(c.margin),
        "gating": c.gating,
        "exact_fallback": c.exact_fallback,
    })
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        // Also folds -0.0 into 0.0.
        x + 0.0
    } else if x.is_nan() {
        0.0
    } else {
        x.signum() * f64::MAX
    }
}

impl VerdictBuilder {
    pub fn new(check_id: &str, group: String, set_repr: String) -> Self {
        VerdictBuilder {
            v: Verdict {
                check_id: check_id.to_owned(),
                group,
                set_repr,
                params: BTreeMap::new(),
                lhs: String::new(),
                rhs: String::new(),
                margin: 0.0,
                pass: Outcome::Pass,
                witness: None,
            },
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.v.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn witness(mut self, value: Value) -> Self {
        self.v.witness = Some(value);
        self
    }

    pub fn not_applicable(mut self, reason: impl Into<String>) -> Verdict {
        self.v.params.insert("reason".into(), Value::String(reason.into()));
        self.v.pass = Outcome::NotApplicable;
        self.v
    }

    /// Direct failure with a witness, for checks that are not a numeric comparison.
    pub fn fail(mut self, witness: Value) -> Verdict {
        self.v.pass = Outcome::Fail;
        self.v.witness = Some(witness);
        self.v
    }

    /// Decides the verdict from gating comparisons; the top-level `lhs`/`rhs`
    /// are those of the binding one (a failing one if any, else the one with
    /// least margin).
    pub fn finish(mut self, comparisons: Vec<Comparison>) -> Verdict {
        let binding = comparisons
            .iter()
            .filter(|c| c.gating)
            .min_by(|a, b| {
                a.holds
                    .cmp(&b.holds)
                    .then(a.margin.partial_cmp(&b.margin).unwrap_or(std::cmp::Ordering::Equal))
            });
        let failed: Vec<&str> = comparisons
            .iter()
            .filter(|c| c.gating && !c.holds)
            .map(|c| c.name.as_str())
            .collect();
        if let Some(c) = binding {
            self.v.lhs = c.lhs.to_string();
            self.v.rhs = c.rhs.to_string();
            self.v.margin = finite(c.margin);
            self.v.params.insert("binding".into(), json!(c.name));
            self.v.params.insert("relation".into(), json!(c.rel.symbol()));
            self.v.params.insert("tolerance".into(), json!(c.tol));
        }
        self.v.params.insert(
            "comparisons".into(),
            Value::Array(comparisons.iter().map(comparison_json).collect()),
        );
        if failed.is_empty() {
            if self.v.pass != Outcome::Fail {
                self.v.pass = Outcome::Pass;
            }
        } else {
            self.v.pass = Outcome::Fail;
            let mut w = match self.v.witness.take() {
                Some(Value::Object(m)) => m,
                Some(other) => {
                    let mut m = serde_json::Map::new();
                    m.insert("detail".into(), other);
                    m
                }
                None => serde_json::Map::new(),
            };
            w.insert("failed".into(), json!(failed));
            self.v.witness = Some(Value::Object(w));
        }
        self.v
    }
}
