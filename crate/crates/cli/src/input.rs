use std::io::Read;
use std::path::Path;

use dendeg::boundrules::RuleError;
use dendeg::curvemodel::EllipticCurve;
use dendeg::fixtures::fixtures;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::report::Style;

/// Exit code 2 for a missing fact, 1 for everything else.
#[derive(Debug)]
pub enum Failure {
    NeedsFact(String),
    Schema(String),
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::NeedsFact(_) => 2,
            Failure::Schema(_) | Failure::Other(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::NeedsFact(_) => "needs-fact",
            Failure::Schema(_) => "schema",
            Failure::Other(_) => "error",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::NeedsFact(m) | Failure::Schema(m) | Failure::Other(m) => m,
        }
    }

    pub fn emit(&self, style: Style) {
        match style {
            Style::Text if self.message().starts_with(self.kind()) => eprintln!("{}", self.message()),
            Style::Text => eprintln!("{}: {}", self.kind(), self.message()),
            _ => {
                let v = json!({ "error": self.kind(), "message": self.message() });
                println!("{}", crate::report::render_json(&v, style));
            }
        }
    }
}

impl From<RuleError> for Failure {
    fn from(e: RuleError) -> Self {
        match e {
            RuleError::NeedsFact { .. } => Failure::NeedsFact(e.to_string()),
            RuleError::InvalidInput(_) => Failure::Schema(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(format!("{e:#}"))
    }
}

/// Read JSON from a file or stdin and expand fixture references.
pub fn read_json(path: Option<&Path>) -> Result<Value, Failure> {
    let text = match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).map_err(|e| Failure::Other(format!("cannot read {}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Other(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("malformed JSON: {e}")))?;
    fixtures().expand(&value).map_err(|e| Failure::Schema(e.to_string()))
}

pub fn parse<T: DeserializeOwned>(value: Value) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::Schema(e.to_string()))
}

/// A fixture label, inline a-invariants, or a JSON file holding either
/// `{"ainvs": [...]}` or a factor with an `elliptic` entry.
pub fn elliptic(arg: &str) -> Result<EllipticCurve, Failure> {
    if let Ok(c) = fixtures().curve(arg) {
        return c
            .factor
            .elliptic
            .clone()
            .ok_or_else(|| Failure::Schema(format!("fixture {arg} is not an elliptic curve")));
    }
    let value = if arg.trim_start().starts_with('[') {
        let ainvs: Value =
            serde_json::from_str(arg).map_err(|e| Failure::Schema(format!("bad a-invariants {arg}: {e}")))?;
        json!({ "ainvs": ainvs })
    } else {
        read_json(Some(Path::new(arg)))?
    };
    let value = value.get("elliptic").cloned().unwrap_or(value);
    parse(value)
}
