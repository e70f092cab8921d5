//! Curves and expected engine outputs shipped with the crate.
//!
//! Requests refer to curves by label: `{"fixture": L}` expands to the
//! factor of `L` and `{"model_of": L}` to its model.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundrules::{BoundResult, EngineOptions, Factor, Provenance, Request, RuleError};
use crate::curvemodel::{EllipticCurve, HyperellipticCurve};
use crate::localsolve::quadratic_obstruction;

pub const FIXTURES_JSON: &str = include_str!("../fixtures/curves.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCurve {
    pub label: String,
    pub description: String,
    pub factor: Factor,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub window: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub upper_excludes: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eff_ind: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fired: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub not_fired: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCase {
    pub name: String,
    /// Attach the quadratic local obstruction of the two models at this
    /// prime, computed at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_obstruction_at: Option<u64>,
    pub request: Value,
    pub expected: Expected,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSet {
    pub curves: Vec<FixtureCurve>,
    pub cases: Vec<FixtureCase>,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown fixture {0}")]
    Unknown(String),
    #[error("fixture {0} has no hyperelliptic model")]
    NoModel(String),
    #[error("bad request in {case}: {msg}")]
    Schema { case: String, msg: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

pub fn fixtures() -> &'static FixtureSet {
    static SET: OnceLock<FixtureSet> = OnceLock::new();
    SET.get_or_init(|| serde_json::from_str(FIXTURES_JSON).expect("embedded fixtures parse"))
}

impl FixtureSet {
    pub fn curve(&self, label: &str) -> Result<&FixtureCurve, FixtureError> {
        self.curves.iter().find(|c| c.label == label).ok_or_else(|| FixtureError::Unknown(label.to_string()))
    }

    pub fn case(&self, name: &str) -> Result<&FixtureCase, FixtureError> {
        self.cases.iter().find(|c| c.name == name).ok_or_else(|| FixtureError::Unknown(name.to_string()))
    }

    /// Replace label references by the curves they name.
    pub fn expand(&self, v: &Value) -> Result<Value, FixtureError> {
        Ok(match v {
            Value::Object(m) if m.len() == 1 && m.contains_key("fixture") => {
                let label = m["fixture"].as_str().unwrap_or_default();
                serde_json::to_value(&self.curve(label)?.factor).expect("factor serializes")
            }
            Value::Object(m) if m.len() == 1 && m.contains_key("model_of") => {
                let label = m["model_of"].as_str().unwrap_or_default();
                let model =
                    self.curve(label)?.factor.model.as_ref().ok_or_else(|| FixtureError::NoModel(label.to_string()))?;
                serde_json::to_value(model).expect("model serializes")
            }
            Value::Object(m) => Value::Object(
                m.iter().map(|(k, x)| Ok((k.clone(), self.expand(x)?))).collect::<Result<_, FixtureError>>()?,
            ),
            Value::Array(a) => Value::Array(a.iter().map(|x| self.expand(x)).collect::<Result<_, _>>()?),
            other => other.clone(),
        })
    }

    pub fn request(&self, case: &FixtureCase) -> Result<Request, FixtureError> {
        let schema = |msg: String| FixtureError::Schema { case: case.name.clone(), msg };
        let mut value = self.expand(&case.request)?;
        if let Some(p) = case.local_obstruction_at {
            let model = |k: &str| -> Result<HyperellipticCurve, FixtureError> {
                let f: Factor = serde_json::from_value(value[k].clone()).map_err(|e| schema(e.to_string()))?;
                f.model.ok_or_else(|| schema(format!("{k} has no model")))
            };
            let (_, cert) = quadratic_obstruction(&model("c")?, &model("d")?, p).map_err(RuleError::from)?;
            let certs = value.as_object_mut().ok_or_else(|| schema("request is not an object".into()))?;
            let slot = certs.entry("certificates").or_insert_with(|| Value::Object(Default::default()));
            slot["local_obstruction"] = serde_json::to_value(cert).expect("certificate serializes");
        }
        serde_json::from_value(value).map_err(|e| schema(e.to_string()))
    }

    /// Run one case and list every disagreement with its expectation.
    pub fn check(&self, case: &FixtureCase, base: &EngineOptions) -> Result<(BoundResult, Vec<String>), FixtureError> {
        let req = self.request(case)?;
        let mut opts = base.clone();
        opts.window = case.expected.window;
        let r = req.run(&opts)?;
        Ok((r.clone(), mismatches(&case.expected, &r)))
    }

    /// Asserted facts lacking a source string, as `label.field`.
    pub fn unanchored_facts(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.curves {
            let v = serde_json::to_value(&c.factor.facts).expect("facts serialize");
            collect_unanchored(&c.label, &v, &mut out);
        }
        for case in &self.cases {
            collect_unanchored(&case.name, &case.request, &mut out);
        }
        out
    }

    /// Every model in the set, with its label and genus.
    pub fn models(&self) -> Vec<(&str, ModelRef<'_>)> {
        self.curves
            .iter()
            .filter_map(|c| match (&c.factor.model, &c.factor.elliptic) {
                (Some(m), _) => Some((c.label.as_str(), ModelRef::Hyperelliptic(m))),
                (None, Some(e)) => Some((c.label.as_str(), ModelRef::Elliptic(e))),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ModelRef<'a> {
    Hyperelliptic(&'a HyperellipticCurve),
    Elliptic(&'a EllipticCurve),
}

fn collect_unanchored(path: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            let asserted = m.get("provenance").and_then(|p| serde_json::from_value::<Provenance>(p.clone()).ok())
                == Some(Provenance::Asserted);
            if m.contains_key("value") && asserted && m.get("source").and_then(Value::as_str).is_none_or(str::is_empty)
            {
                out.push(path.to_string());
            }
            for (k, x) in m {
                collect_unanchored(&format!("{path}.{k}"), x, out);
            }
        }
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| collect_unanchored(&format!("{path}[{i}]"), x, out)),
        _ => {}
    }
}

fn mismatches(e: &Expected, r: &BoundResult) -> Vec<String> {
    let w = e.window;
    let mut out = Vec::new();
    let mut cmp = |what: &str, want: &str, got: String| {
        if want != got {
            out.push(format!("{what}: expected {want}, got {got}"));
        }
    };
    if let Some(l) = &e.lower {
        cmp("lower", l, r.lower.window_summary(w));
    }
    if let Some(u) = &e.upper {
        cmp("upper", u, r.upper.window_summary(w));
    }
    if let Some(x) = e.exact {
        cmp("exact", &x.to_string(), r.exact.to_string());
    }
    if let Some(x) = e.eff_ind {
        let got = r.effective_index.as_ref().and_then(|d| d.e());
        cmp("eff_ind", &x.to_string(), format!("{got:?}").replace("Some(", "").replace(')', ""));
    }
    for n in &e.upper_excludes {
        if r.upper.contains(*n) {
            out.push(format!("upper contains {n}"));
        }
    }
    for f in &e.fired {
        if !r.fired(f) {
            out.push(format!("{f} did not fire"));
        }
    }
    for f in &e.not_fired {
        if r.fired(f) {
            out.push(format!("{f} fired"));
        }
    }
    out
}
