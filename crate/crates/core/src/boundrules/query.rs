//! One JSON-shaped request to the engine.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::engine::{
    delta_abelian_transfer, delta_bielliptic, delta_curve, delta_jacobian_genus2, delta_product, potential_product,
    AbelianInput, BiellipticInput, BoundResult, EngineOptions, Factor, ProductCertificates, ProductWitnesses,
};
use super::facts::Assumption;
use super::RuleError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Query {
    Curve {
        c: Factor,
    },
    Product {
        c: Factor,
        d: Factor,
        #[serde(default)]
        certificates: ProductCertificates,
        #[serde(default)]
        witnesses: ProductWitnesses,
    },
    Jacobian {
        c: Factor,
    },
    Bielliptic {
        #[serde(flatten)]
        input: BiellipticInput,
    },
    Abelian {
        #[serde(flatten)]
        input: AbelianInput,
    },
    Potential {
        c: Factor,
        d: Factor,
        #[serde(default)]
        witnesses: ProductWitnesses,
    },
}

/// A query plus the conditional statements the caller accepts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    #[serde(flatten)]
    pub query: Query,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub assumptions: BTreeSet<Assumption>,
    /// Whether the base field has a real embedding; `true` for `ℚ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_embedding: Option<bool>,
}

impl Query {
    pub fn op(&self) -> &'static str {
        match self {
            Query::Curve { .. } => "curve",
            Query::Product { .. } => "product",
            Query::Jacobian { .. } => "jacobian",
            Query::Bielliptic { .. } => "bielliptic",
            Query::Abelian { .. } => "abelian",
            Query::Potential { .. } => "potential",
        }
    }

    pub fn run(&self, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
        match self {
            Query::Curve { c } => delta_curve(&c.resolve()?, opts),
            Query::Product { c, d, certificates, witnesses } => delta_product(c, d, certificates, witnesses, opts),
            Query::Jacobian { c } => delta_jacobian_genus2(c, opts),
            Query::Bielliptic { input } => delta_bielliptic(input, opts),
            Query::Abelian { input } => delta_abelian_transfer(input, opts),
            Query::Potential { c, d, witnesses } => potential_product(c, d, witnesses, opts),
        }
    }
}

impl Request {
    /// Options for this request: the base options with the request's
    /// assumptions added and its real-embedding flag applied.
    pub fn options(&self, base: &EngineOptions) -> EngineOptions {
        let mut o = base.clone().with_assumptions(self.assumptions.iter().copied());
        if let Some(r) = self.real_embedding {
            o.base_real_embedding = r;
        }
        o
    }

    pub fn run(&self, base: &EngineOptions) -> Result<BoundResult, RuleError> {
        self.query.run(&self.options(base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_requests() {
        let r: Request =
            serde_json::from_str(r#"{"op":"curve","c":{"facts":{"genus":1,"positive_rank":true}}}"#).unwrap();
        let out = r.run(&EngineOptions::default()).unwrap();
        assert!(out.exact && out.lower.contains(1));
        let r: Request = serde_json::from_str(
            r#"{"op":"bielliptic","e1":{"facts":{"genus":1,"positive_rank":true}},"e2":{"facts":{"genus":1,"positive_rank":false}},
                "halving_fields_rank_zero":true,"assumptions":["ParityConjecture"]}"#,
        )
        .unwrap();
        assert_eq!(r.query.op(), "bielliptic");
        assert!(r.assumptions.contains(&Assumption::ParityConjecture));
        assert!(!r.run(&EngineOptions::default()).unwrap().lower.contains(1));
    }
}
