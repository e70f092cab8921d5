//! Rule engine for density degree sets.
//!
//! Every stated result is a [`roster::Rule`]: guards over a flat fact map and
//! a conclusion contributing to the lower bound, the upper bound or both.
//! Lower bounds are unions, upper bounds intersections, and every firing rule
//! is recorded in a trace whose guards can be re-checked from the recorded
//! facts alone.

pub mod certs;
pub mod engine;
pub mod facts;
pub mod formulas;
pub mod query;
pub mod roster;

use thiserror::Error;

use crate::curvemodel::CurveError;
use crate::localsolve::LocalError;
use crate::polyarith::PolyError;
use crate::rootnumber::RootNumberError;

pub use certs::{
    cubic_fiber_discriminants, nondensity_cubic_certificate, nondensity_quadratic_certificate, parity_cubic_hypotheses,
    CertificateReport, Check, CubicAssertions, ParityCubicAssertions, QuadraticAssertions, QuadraticPoint,
};
pub use engine::{
    delta_abelian_transfer, delta_bielliptic, delta_curve, delta_jacobian_genus2, delta_product, genus2_cell,
    potential_product, AbelianInput, AbelianSource, BiellipticInput, BoundResult, EffectiveIndexData, EngineOptions,
    Factor, ProductCertificates, ProductWitnesses, TableCategory, TraceEntry,
};
pub use facts::{Assumption, CurveFacts, Fact, FactMap, FactValue, Provenance, RatValue, Recorded};
pub use formulas::{
    cs_membership, eff_index_bound, fiber_product_genus, n_general, n_index1, n_pointed, CoverFamily, CsWitness,
    PointCount,
};
pub use query::{Query, Request};
pub use roster::{roster, roster_json, Guard, Rule, Scope};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("needs-fact: rule {rule} needs {fact}")]
    NeedsFact { rule: String, fact: String },
    #[error("inconsistent facts: {0}")]
    Inconsistent(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("gcd({dc}, {rhs}) = {gcd}, not 1")]
    GcdGuard { dc: u64, rhs: u64, gcd: u64 },
    #[error("certificate for {rule} rejected: {reason}")]
    CertificateRejected { rule: String, reason: String },
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    RootNumber(#[from] RootNumberError),
}

impl RuleError {
    pub fn is_needs_fact(&self) -> bool {
        matches!(self, RuleError::NeedsFact { .. })
    }
}
