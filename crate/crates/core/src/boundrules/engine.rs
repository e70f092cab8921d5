//! Evaluation of the roster against concrete inputs.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::curvemodel::{is_rational_square, EllipticCurve, HyperellipticCurve};
use crate::exec::Exec;
use crate::localsolve::{verify_certificate, DegreePossibility, LocalCertificate, Obstruction};
use crate::setalg::DegreeSet;

use super::certs::{
    nondensity_cubic_certificate, nondensity_quadratic_certificate, parity_cubic_hypotheses, CertificateReport,
    CubicAssertions, ParityCubicAssertions, QuadraticAssertions,
};
use super::facts::{Assumption, CurveFacts, Fact, FactMap, FactValue, Provenance, Recorded};
use super::formulas::eff_index_bound;
use super::roster::{find_rule, roster, Contribution, Scope, View};
pub use super::roster::{genus2_cell, TableCategory};
use super::RuleError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Comparisons (exactness, consistency) are made on `[1, window]`.
    pub window: u64,
    /// Conjectures the caller accepts.
    pub assumptions: BTreeSet<Assumption>,
    /// Does the base field have a real embedding? True for `ℚ`.
    pub base_real_embedding: bool,
    pub exec: Exec,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { window: 200, assumptions: BTreeSet::new(), base_real_embedding: true, exec: Exec::default() }
    }
}

impl EngineOptions {
    pub fn with_assumptions<I: IntoIterator<Item = Assumption>>(mut self, a: I) -> Self {
        self.assumptions.extend(a);
        self
    }
}

/// One firing rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub rule: String,
    pub anchor: String,
    /// Concrete objects bound to `X` (and `Y`).
    pub roles: Vec<String>,
    pub facts: BTreeMap<String, Recorded>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<Assumption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review: Option<String>,
    /// The contributed sets themselves (not serialized; the summaries are).
    #[serde(skip)]
    pub lower_set: Option<DegreeSet>,
    #[serde(skip)]
    pub upper_set: Option<DegreeSet>,
}

impl TraceEntry {
    /// Re-evaluate the rule's guards from the recorded facts alone.
    pub fn recheck(&self) -> bool {
        let Some(rule) = find_rule(&self.rule) else { return false };
        if let Some(a) = rule.assumption {
            if !self.assumptions.contains(&a) {
                return false;
            }
        }
        let facts: FactMap = self.facts.clone();
        let view = View::new(&facts, &self.roles, None);
        rule.check(&view).is_some_and(|consumed| consumed == self.facts)
    }
}

/// Bounds for one component of a composite query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub lower: DegreeSet,
    pub upper: DegreeSet,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundResult {
    pub lower: DegreeSet,
    pub upper: DegreeSet,
    /// Lower and upper agree on `[1, window]`.
    pub exact: bool,
    pub window: u64,
    pub assumptions: BTreeSet<Assumption>,
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, ComponentBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_index: Option<EffectiveIndexData>,
}

impl BoundResult {
    pub fn lower_on_window(&self) -> Vec<u64> {
        self.lower.materialize(self.window)
    }

    pub fn upper_on_window(&self) -> Vec<u64> {
        self.upper.materialize(self.window)
    }

    pub fn fired(&self, rule: &str) -> bool {
        self.trace.iter().any(|t| t.rule == rule)
    }

    fn component(&self) -> ComponentBound {
        ComponentBound { lower: self.lower.clone(), upper: self.upper.clone(), exact: self.exact }
    }
}

/// Index and effective-index data for `C×D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveIndexData {
    pub index: u64,
    /// Least support degree of a witnessed zero-cycle of degree `index`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eff_ind_upper: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eff_ind_formula_bound: Option<u64>,
    pub witnessed_degrees: Vec<u64>,
}

impl EffectiveIndexData {
    /// Best available upper bound for eff-ind.
    pub fn e(&self) -> Option<u64> {
        match (self.eff_ind_upper, self.eff_ind_formula_bound) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// A factor curve: facts, optionally a model and local certificates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    #[serde(default)]
    pub facts: CurveFacts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<HyperellipticCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticCurve>,
    /// Degree-divisibility certificates for this curve.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_certificates: Vec<LocalCertificate>,
}

impl From<CurveFacts> for Factor {
    fn from(facts: CurveFacts) -> Self {
        Factor { facts, ..Default::default() }
    }
}

impl Factor {
    pub fn from_model(model: HyperellipticCurve) -> Self {
        Factor { model: Some(model), ..Default::default() }
    }

    /// Caller facts merged with everything the model and certificates give.
    pub fn resolve(&self) -> Result<CurveFacts, RuleError> {
        let mut facts = self.facts.clone();
        match (&self.model, &self.elliptic) {
            (Some(_), Some(_)) => {
                return Err(RuleError::InvalidInput("give either model or elliptic, not both".into()))
            }
            (Some(m), None) => facts = facts.merged_with(&CurveFacts::from_model(m))?,
            (None, Some(e)) => facts = facts.merged_with(&CurveFacts::from_elliptic(e))?,
            (None, None) => {}
        }
        for cert in &self.local_certificates {
            let LocalCertificate::DegreeDivisibility { curve, degrees, .. } = cert else {
                return Err(RuleError::InvalidInput(
                    "factor certificates must be degree-divisibility certificates".into(),
                ));
            };
            if self.model.as_ref().is_some_and(|m| m != curve) {
                return Err(RuleError::Inconsistent("certificate curve differs from the factor model".into()));
            }
            if !verify_certificate(cert) {
                return Err(RuleError::CertificateRejected {
                    rule: "local-degree-divisibility".into(),
                    reason: "verdicts do not re-verify".into(),
                });
            }
            let no_degree_one = degrees.iter().any(|e| e.degree == 1 && e.status == DegreePossibility::Impossible);
            if no_degree_one {
                let derived = CurveFacts {
                    genus: facts.genus.max(curve.genus()),
                    has_k_point: Some(Fact::derived(false, Provenance::DerivedLocal, "no local point of degree 1")),
                    ..Default::default()
                };
                facts = facts.merged_with(&derived)?;
            }
        }
        facts.normalized()
    }
}

/// Inputs to the quadratic non-density certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticNondensityInput {
    pub c: HyperellipticCurve,
    pub d: HyperellipticCurve,
    pub assertions: QuadraticAssertions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicNondensityInput {
    pub c: HyperellipticCurve,
    pub d: HyperellipticCurve,
    pub assertions: CubicAssertions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityCubicInput {
    pub e: EllipticCurve,
    pub c: HyperellipticCurve,
    pub assertions: ParityCubicAssertions,
}

/// Certificates attached to a product query. Each is verified before use.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductCertificates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic_nondensity: Option<QuadraticNondensityInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic_nondensity: Option<CubicNondensityInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_obstruction: Option<LocalCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity_cubic: Option<ParityCubicInput>,
}

/// Facts about the pair rather than either factor.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductWitnesses {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_curve: Option<Fact<bool>>,
    /// The genus-1 factor is an isogeny factor of the genus-2 factor's Jacobian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isogeny_factor: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Fact<u64>>,
    /// Degrees of exhibited closed points on `C×D`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_degrees: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiellipticInput {
    pub e1: Factor,
    pub e2: Factor,
    /// Asserted form of the `j`-invariant or 2-torsion condition; the engine
    /// also reads it off the factor facts.
    #[serde(default)]
    pub quadratic_condition: bool,
    /// `E₂` has rank 0 over every halving field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halving_fields_rank_zero: Option<Fact<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum AbelianSource {
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
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelianInput {
    pub source: AbelianSource,
    /// `A` is isogenous to the source surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isogenous: Option<Fact<bool>>,
}

type Bounds = BTreeMap<String, (DegreeSet, DegreeSet)>;

fn needs(rule: &str, fact: &str) -> RuleError {
    RuleError::NeedsFact { rule: rule.to_string(), fact: fact.to_string() }
}

fn put(facts: &mut FactMap, key: &str, value: FactValue, provenance: Provenance) {
    facts.insert(key.to_string(), Recorded { value, provenance });
}

/// Fire every rule of `scope` in every admissible orientation.
fn run(
    scope: Scope,
    roles: &[&str],
    facts: &FactMap,
    bounds: &Bounds,
    opts: &EngineOptions,
) -> Vec<(TraceEntry, Contribution)> {
    let mut candidates: Vec<(&'static super::roster::Rule, Vec<String>)> = Vec::new();
    for rule in roster().iter().filter(|r| r.scope == scope) {
        if rule.assumption.is_some_and(|a| !opts.assumptions.contains(&a)) {
            continue;
        }
        let forward: Vec<String> = roles.iter().map(|s| s.to_string()).collect();
        if roles.len() == 2 && !rule.symmetric {
            candidates.push((rule, vec![forward[1].clone(), forward[0].clone()]));
        }
        candidates.push((rule, forward));
    }
    let window = opts.window;
    let fired = opts.exec.map(&candidates, |(rule, roles)| {
        let view = View::new(facts, roles, Some(bounds));
        let consumed = rule.check(&view)?;
        let c = (rule.conclude)(&view)?;
        let entry = TraceEntry {
            rule: rule.id.to_string(),
            anchor: rule.anchor.to_string(),
            roles: roles.clone(),
            facts: consumed,
            assumptions: rule.assumption.into_iter().collect(),
            lower: c.lower.as_ref().map(|s| s.window_summary(window)),
            upper: c.upper.as_ref().map(|s| s.window_summary(window)),
            note: c.note.clone(),
            review: rule.review.map(str::to_string),
            lower_set: c.lower.clone(),
            upper_set: c.upper.clone(),
        };
        Some((entry, c))
    });
    let mut out: Vec<_> = fired.into_iter().flatten().collect();
    out.sort_by(|a, b| (&a.0.rule, &a.0.roles).cmp(&(&b.0.rule, &b.0.roles)));
    out
}

fn aggregate(
    fired: Vec<(TraceEntry, Contribution)>,
    opts: &EngineOptions,
    saturate: bool,
) -> Result<BoundResult, RuleError> {
    let mut lower = DegreeSet::empty();
    let mut upper = DegreeSet::naturals();
    let mut assumptions = BTreeSet::new();
    let mut trace = Vec::with_capacity(fired.len());
    for (entry, c) in fired {
        if let Some(l) = &c.lower {
            lower = lower.union(l);
        }
        if let Some(u) = &c.upper {
            upper = upper.intersect(u);
        }
        assumptions.extend(entry.assumptions.iter().copied());
        trace.push(entry);
    }
    if saturate {
        lower = lower.saturate();
    }
    let w = opts.window;
    if !lower.subset_on_window(&upper, w) {
        let extra: Vec<u64> = lower.difference(&upper).materialize(w);
        return Err(RuleError::Inconsistent(format!("lower bound exceeds upper bound at {extra:?}")));
    }
    let exact = lower.equals_on_window(&upper, w);
    Ok(BoundResult {
        lower,
        upper,
        exact,
        window: w,
        assumptions,
        trace,
        components: BTreeMap::new(),
        effective_index: None,
    })
}

fn curve_facts_map(role: &str, facts: &CurveFacts) -> FactMap {
    let mut m = FactMap::new();
    facts.flatten(role, &mut m);
    m
}

fn require_index(facts: &CurveFacts, role: &str, rule: &str) -> Result<u64, RuleError> {
    facts.index().ok_or_else(|| needs(rule, &format!("{role}.index")))
}

fn curve_result(facts: &CurveFacts, role: &str, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
    require_index(facts, role, "curve-multiples-above-2g")?;
    let map = curve_facts_map(role, facts);
    let fired = run(Scope::Curve, &[role], &map, &Bounds::new(), opts);
    aggregate(fired, opts, true)
}

/// `δ(C/k)` for one curve. Exact on the window for genus 1 and for genus 2
/// once the degree-3 question is settled.
pub fn delta_curve(facts: &CurveFacts, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
    let f = facts.normalized()?;
    curve_result(&f, "C", opts)
}

fn factor_degrees(facts: &CurveFacts, lower: &DegreeSet) -> Vec<u64> {
    let mut v: Vec<u64> = lower.materialize(3);
    if facts.has_k_point() == Some(true) {
        v.push(1);
    }
    v.sort_unstable();
    v.dedup();
    v
}

fn min_support(degrees: &[u64], target: u64) -> Option<u64> {
    let ds: Vec<u64> = degrees.iter().copied().take(16).collect();
    let mut best: Option<u64> = None;
    for mask in 1u32..(1 << ds.len()) {
        let mut g = 0u64;
        let mut sum = 0u64;
        for (i, d) in ds.iter().enumerate() {
            if mask & (1 << i) != 0 {
                g = g.gcd(d);
                sum += d;
            }
        }
        if g == target && best.is_none_or(|b| sum < b) {
            best = Some(sum);
        }
    }
    best
}

fn effective_index(
    fc: &CurveFacts,
    fd: &CurveFacts,
    lc: &DegreeSet,
    ld: &DegreeSet,
    w: &ProductWitnesses,
) -> Result<Option<(EffectiveIndexData, Provenance)>, RuleError> {
    let (ic, id) = (fc.index().unwrap_or(0), fd.index().unwrap_or(0));
    let l = ic.lcm(&id);
    let mut degrees: Vec<u64> = Vec::new();
    for a in factor_degrees(fc, lc) {
        for b in factor_degrees(fd, ld) {
            degrees.push(a * b);
        }
    }
    for &d in &w.point_degrees {
        if d == 0 || d % l != 0 {
            return Err(RuleError::Inconsistent(format!(
                "a closed point of degree {d} contradicts the factor indices"
            )));
        }
        degrees.push(d);
    }
    degrees.sort_unstable();
    degrees.dedup();
    let g = degrees.iter().fold(0u64, |acc, d| acc.gcd(d));
    let (index, provenance) = match &w.index {
        Some(f) => {
            if f.value == 0 || f.value % l != 0 || (g != 0 && g % f.value != 0) {
                return Err(RuleError::Inconsistent(format!(
                    "asserted index {} contradicts the witnessed degrees",
                    f.value
                )));
            }
            (f.value, f.provenance)
        }
        None if ic == 1 => (id, Provenance::DerivedPoint),
        None if id == 1 => (ic, Provenance::DerivedPoint),
        None if g == l => (l, Provenance::DerivedPoint),
        None => return Ok(None),
    };
    let formula = if ic == 1 {
        Some(eff_index_bound(fc.genus as u64, fd.genus as u64, id))
    } else if id == 1 {
        Some(eff_index_bound(fd.genus as u64, fc.genus as u64, ic))
    } else {
        None
    };
    let data = EffectiveIndexData {
        index,
        eff_ind_upper: min_support(&degrees, index),
        eff_ind_formula_bound: formula,
        witnessed_degrees: degrees,
    };
    Ok(Some((data, provenance)))
}

fn reject(rule: &str, report: &CertificateReport) -> RuleError {
    RuleError::CertificateRejected { rule: rule.to_string(), reason: format!("failed: {}", report.failed().join("; ")) }
}

fn same_model(factor: &Factor, cert_curve: &HyperellipticCurve) -> bool {
    factor.model.as_ref().is_none_or(|m| m == cert_curve)
}

fn check_genus(facts: &CurveFacts, curve: &HyperellipticCurve, rule: &str) -> Result<(), RuleError> {
    if facts.genus != curve.genus() {
        return Err(RuleError::Inconsistent(format!("{rule}: certificate curve genus differs from the factor")));
    }
    Ok(())
}

/// `C: y² = g₄g₂` and `D: y² = g₄` with `g₂` quadratic with square leading
/// coefficient, read off the two models in either order.
fn shared_quartic(c: &Factor, d: &Factor) -> bool {
    let check = |quartic: &HyperellipticCurve, sextic: &HyperellipticCurve| {
        if !quartic.h.is_zero() || !sextic.h.is_zero() || quartic.f.degree() != Some(4) || sextic.f.degree() != Some(6)
        {
            return false;
        }
        match sextic.f.div_rem(&quartic.f) {
            Ok((q, r)) => r.is_zero() && q.degree() == Some(2) && is_rational_square(&q.lc()),
            Err(_) => false,
        }
    };
    match (&c.model, &d.model) {
        (Some(a), Some(b)) => check(a, b) || check(b, a),
        _ => false,
    }
}

fn certificate_facts(
    c: &Factor,
    d: &Factor,
    fc: &CurveFacts,
    fd: &CurveFacts,
    certs: &ProductCertificates,
    out: &mut FactMap,
) -> Result<(), RuleError> {
    let mismatch =
        |rule: &str| RuleError::Inconsistent(format!("{rule}: certificate curves differ from the factor models"));
    if let Some(q) = &certs.quadratic_nondensity {
        let rule = "gg-quadratic-nondensity";
        if !same_model(c, &q.c) || !same_model(d, &q.d) {
            return Err(mismatch(rule));
        }
        check_genus(fc, &q.c, rule)?;
        check_genus(fd, &q.d, rule)?;
        for (facts, asserted) in [(fc, &q.assertions.c_jacobian_rank_zero), (fd, &q.assertions.d_jacobian_rank_zero)] {
            if let (Some(a), Some(b)) = (facts.jacobian_rank_zero.as_ref(), asserted.as_ref()) {
                if a.value != b.value {
                    return Err(RuleError::Inconsistent(format!(
                        "{rule}: rank assertion disagrees with the factor facts"
                    )));
                }
            }
        }
        let report = nondensity_quadratic_certificate(&q.c, &q.d, &q.assertions)?;
        if !report.verified {
            return Err(reject(rule, &report));
        }
        put(out, "cert.quadratic_nondensity", FactValue::Bool(true), Provenance::Asserted);
    }
    if let Some(q) = &certs.cubic_nondensity {
        let rule = "gg-cubic-nondensity";
        if !same_model(c, &q.c) || !same_model(d, &q.d) {
            return Err(mismatch(rule));
        }
        check_genus(fc, &q.c, rule)?;
        check_genus(fd, &q.d, rule)?;
        let report = nondensity_cubic_certificate(&q.c, &q.d, &q.assertions)?;
        if !report.verified {
            return Err(reject(rule, &report));
        }
        put(out, "cert.cubic_nondensity", FactValue::Bool(true), Provenance::Asserted);
    }
    if let Some(cert) = &certs.local_obstruction {
        let rule = "local-obstruction";
        let LocalCertificate::QuadraticObstruction { c: cc, d: cd, conclusion, .. } = cert else {
            return Err(RuleError::InvalidInput(format!("{rule}: expected a quadratic-obstruction certificate")));
        };
        let forward = same_model(c, cc) && same_model(d, cd);
        let backward = same_model(c, cd) && same_model(d, cc);
        if !forward && !backward {
            return Err(mismatch(rule));
        }
        if !verify_certificate(cert) {
            return Err(RuleError::CertificateRejected {
                rule: rule.into(),
                reason: "verdicts do not re-verify".into(),
            });
        }
        put(
            out,
            "cert.local_obstruction",
            FactValue::Bool(*conclusion == Obstruction::Obstructed),
            Provenance::DerivedLocal,
        );
    }
    if let Some(p) = &certs.parity_cubic {
        let rule = "ec-cubic-parity";
        let (ef, gf) = match (fc.genus, fd.genus) {
            (1, 2) => (c, d),
            (2, 1) => (d, c),
            _ => return Err(RuleError::InvalidInput(format!("{rule}: needs a genus-1 and a genus-2 factor"))),
        };
        if !same_model(gf, &p.c) || ef.elliptic.as_ref().is_some_and(|e| e != &p.e) {
            return Err(mismatch(rule));
        }
        let report = parity_cubic_hypotheses(&p.e, &p.c, &p.assertions)?;
        if !report.verified {
            return Err(reject(rule, &report));
        }
        put(out, "cert.parity_cubic", FactValue::Bool(true), Provenance::Asserted);
    }
    Ok(())
}

fn resolve_pair(c: &Factor, d: &Factor, what: &str) -> Result<(CurveFacts, CurveFacts), RuleError> {
    let fc = c.resolve()?;
    let fd = d.resolve()?;
    for f in [&fc, &fd] {
        if !(1..=2).contains(&f.genus) {
            return Err(RuleError::InvalidInput(format!("{what} needs factors of genus 1 or 2, got {}", f.genus)));
        }
    }
    Ok((fc, fd))
}

fn witness_facts(w: &ProductWitnesses, fc: &CurveFacts, fd: &CurveFacts, out: &mut FactMap) -> Result<(), RuleError> {
    if let Some(s) = &w.same_curve {
        if s.value && fc.genus != fd.genus {
            return Err(RuleError::Inconsistent("same_curve with different genera".into()));
        }
        put(out, "CxD.same_curve", FactValue::Bool(s.value), s.provenance);
    }
    if let Some(s) = &w.isogeny_factor {
        if s.value && !matches!((fc.genus, fd.genus), (1, 2) | (2, 1)) {
            return Err(RuleError::Inconsistent("isogeny_factor needs a genus-1 and a genus-2 factor".into()));
        }
        put(out, "CxD.isogeny_factor", FactValue::Bool(s.value), s.provenance);
    }
    Ok(())
}

/// `δ(C×D/k)` for curves of genus 1 or 2.
pub fn delta_product(
    c: &Factor,
    d: &Factor,
    certs: &ProductCertificates,
    witnesses: &ProductWitnesses,
    opts: &EngineOptions,
) -> Result<BoundResult, RuleError> {
    let (fc, fd) = resolve_pair(c, d, "delta_product")?;
    require_index(&fc, "C", "product-upper-intersection")?;
    require_index(&fd, "D", "product-upper-intersection")?;
    let rc = curve_result(&fc, "C", opts)?;
    let rd = curve_result(&fd, "D", opts)?;

    let mut facts = FactMap::new();
    fc.flatten("C", &mut facts);
    fd.flatten("D", &mut facts);
    put(&mut facts, "k.real_embedding", FactValue::Bool(opts.base_real_embedding), Provenance::Asserted);
    witness_facts(witnesses, &fc, &fd, &mut facts)?;
    let eff = effective_index(&fc, &fd, &rc.lower, &rd.lower, witnesses)?;
    if let Some((data, prov)) = &eff {
        put(&mut facts, "CxD.index", FactValue::Int(data.index as i64), *prov);
        if let Some(e) = data.e() {
            put(&mut facts, "CxD.eff_ind", FactValue::Int(e as i64), Provenance::DerivedPoint);
        }
    }
    certificate_facts(c, d, &fc, &fd, certs, &mut facts)?;
    if shared_quartic(c, d) {
        put(&mut facts, "CxD.shared_quartic", FactValue::Bool(true), Provenance::DerivedPoint);
    }

    let bounds: Bounds = [
        ("C".to_string(), (rc.lower.clone(), rc.upper.clone())),
        ("D".to_string(), (rd.lower.clone(), rd.upper.clone())),
    ]
    .into();
    let fired = run(Scope::Product, &["C", "D"], &facts, &bounds, opts);
    let mut res = aggregate(fired, opts, false)?;
    res.components.insert("C".into(), rc.component());
    res.components.insert("D".into(), rd.component());
    res.effective_index = eff.map(|(d, _)| d);
    Ok(res)
}

/// `δ(Pic⁰_C/k)` for a genus-2 curve.
pub fn delta_jacobian_genus2(c: &Factor, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
    let f = c.resolve()?;
    if f.genus != 2 {
        return Err(RuleError::InvalidInput(format!("delta_jacobian_genus2 needs genus 2, got {}", f.genus)));
    }
    match f.jacobian_rank_zero.as_ref().map(|x| x.value) {
        None => return Err(needs("jac-rank-zero", "C.jacobian_rank_zero")),
        Some(false) if f.jacobian_simple.is_none() => return Err(needs("jac-rational-density", "C.jacobian_simple")),
        _ => {}
    }
    let map = curve_facts_map("C", &f);
    let fired = run(Scope::Jacobian, &["C"], &map, &Bounds::new(), opts);
    aggregate(fired, opts, false)
}

/// `δ(X/k)` for a bielliptic surface `X = (E₁×E₂)/G`.
pub fn delta_bielliptic(input: &BiellipticInput, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
    let f1 = input.e1.resolve()?;
    let f2 = input.e2.resolve()?;
    if f1.genus != 1 || f2.genus != 1 {
        return Err(RuleError::InvalidInput("a bielliptic surface needs two genus-1 curves".into()));
    }
    require_index(&f1, "E1", "bi-upper")?;
    let r1 = curve_result(&f1, "E1", opts)?;
    let mut facts = FactMap::new();
    f1.flatten("E1", &mut facts);
    f2.flatten("E2", &mut facts);
    put(&mut facts, "S.quadratic_condition", FactValue::Bool(input.quadratic_condition), Provenance::Asserted);
    if let Some(h) = &input.halving_fields_rank_zero {
        put(&mut facts, "S.halving_fields_rank_zero", FactValue::Bool(h.value), h.provenance);
    }
    let bounds: Bounds = [("E1".to_string(), (r1.lower.clone(), r1.upper.clone()))].into();
    let fired = run(Scope::Bielliptic, &["E1", "E2"], &facts, &bounds, opts);
    let mut res = aggregate(fired, opts, false)?;
    res.components.insert("E1".into(), r1.component());
    Ok(res)
}

/// `δ(A/k)` for an abelian surface isogenous to a product of elliptic
/// curves or to a Jacobian.
pub fn delta_abelian_transfer(input: &AbelianInput, opts: &EngineOptions) -> Result<BoundResult, RuleError> {
    let iso = input.isogenous.as_ref().ok_or_else(|| needs("abelian-transfer", "A.isogenous_to_B"))?;
    if !iso.value {
        return Err(RuleError::InvalidInput("A must be isogenous to the source surface".into()));
    }
    let (rb, is_jacobian) = match &input.source {
        AbelianSource::Product { c, d, certificates, witnesses } => {
            let (fc, fd) = resolve_pair(c, d, "delta_abelian_transfer")?;
            if fc.genus != 1 || fd.genus != 1 {
                return Err(RuleError::InvalidInput("the product source must be two genus-1 curves".into()));
            }
            (delta_product(c, d, certificates, witnesses, opts)?, false)
        }
        AbelianSource::Jacobian { c } => (delta_jacobian_genus2(c, opts)?, true),
    };
    let mut facts = FactMap::new();
    put(&mut facts, "A.isogenous_to_B", FactValue::Bool(true), iso.provenance);
    put(&mut facts, "B.is_jacobian", FactValue::Bool(is_jacobian), Provenance::Asserted);
    let bounds: Bounds = [("B".to_string(), (rb.lower.clone(), rb.upper.clone()))].into();
    let fired = run(Scope::Abelian, &["B"], &facts, &bounds, opts);
    let mut res = aggregate(fired, opts, false)?;
    res.components.insert("B".into(), rb.component());
    Ok(res)
}

/// `℘(C×D/k)` for curves of genus 1 or 2.
pub fn potential_product(
    c: &Factor,
    d: &Factor,
    witnesses: &ProductWitnesses,
    opts: &EngineOptions,
) -> Result<BoundResult, RuleError> {
    let (fc, fd) = resolve_pair(c, d, "potential_product")?;
    let mut facts = FactMap::new();
    fc.flatten("C", &mut facts);
    fd.flatten("D", &mut facts);
    witness_facts(witnesses, &fc, &fd, &mut facts)?;
    let fired = run(Scope::Potential, &["C", "D"], &facts, &Bounds::new(), opts);
    aggregate(fired, opts, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyarith::Poly;

    fn g2(index: u64, point: Option<bool>, cubic: Option<bool>) -> Factor {
        let mut f = CurveFacts::with_genus(2);
        f.index = Some(Fact::asserted(index));
        f.has_k_point = point.map(Fact::asserted);
        f.has_degree3_point = cubic.map(Fact::asserted);
        f.into()
    }

    fn ell(rank_positive: bool) -> Factor {
        let mut f = CurveFacts::with_genus(1);
        f.has_k_point = Some(Fact::asserted(true));
        f.positive_rank = Some(Fact::asserted(rank_positive));
        f.into()
    }

    fn opts() -> EngineOptions {
        EngineOptions::default()
    }

    #[test]
    fn curve_trichotomy() {
        let r = delta_curve(&g2(2, None, None).facts, &opts()).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower.materialize(8), vec![2, 4, 6, 8]);
        let r = delta_curve(&g2(1, Some(true), Some(false)).facts, &opts()).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower.materialize(6), vec![2, 4, 5, 6]);
        let r = delta_curve(&g2(1, Some(true), None).facts, &opts()).unwrap();
        assert!(!r.exact);
        assert!(matches!(delta_curve(&CurveFacts::with_genus(2), &opts()), Err(RuleError::NeedsFact { .. })));
        let r = delta_curve(&ell(true).facts, &opts()).unwrap();
        assert!(r.exact && r.lower.contains(1));
    }

    #[test]
    fn trace_rechecks() {
        let r = delta_product(
            &g2(1, Some(true), Some(true)),
            &g2(1, Some(false), None),
            &Default::default(),
            &Default::default(),
            &opts(),
        )
        .unwrap();
        assert!(!r.trace.is_empty());
        assert!(r.trace.iter().all(TraceEntry::recheck));
        let mut bad = r.trace[0].clone();
        bad.facts.clear();
        assert!(!bad.recheck() || r.trace[0].facts.is_empty());
    }

    #[test]
    fn elliptic_pair_j_condition() {
        let mut a = ell(false);
        a.facts.j_invariant = Some(Fact::asserted(super::super::RatValue(crate::polyarith::rat(5))));
        let b = ell(false);
        let r = delta_product(&a, &b, &Default::default(), &Default::default(), &opts()).unwrap();
        assert!(!r.exact);
        let mut b2 = b.clone();
        b2.facts.j_invariant = Some(Fact::asserted(super::super::RatValue(crate::polyarith::rat(0))));
        let r = delta_product(&a, &b2, &Default::default(), &Default::default(), &opts()).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower.materialize(5), vec![2, 3, 4, 5]);
    }

    #[test]
    fn conditional_rules_need_opt_in() {
        let (a, b) = (ell(false), ell(false));
        let r = delta_product(&a, &b, &Default::default(), &Default::default(), &opts()).unwrap();
        assert!(!r.lower.contains(2));
        let o = opts().with_assumptions([Assumption::ParityConjecture]);
        let r = delta_product(&a, &b, &Default::default(), &Default::default(), &o).unwrap();
        assert!(r.lower.contains(2));
        assert!(r.assumptions.contains(&Assumption::ParityConjecture));
        assert!(r
            .trace
            .iter()
            .filter(|t| t.rule == "ee-quadratic-parity")
            .all(|t| t.assumptions == vec![Assumption::ParityConjecture]));
    }

    #[test]
    fn index_four_is_exact() {
        let w = ProductWitnesses { index: Some(Fact::asserted(4)), ..Default::default() };
        let r = delta_product(&g2(2, None, None), &g2(2, None, None), &Default::default(), &w, &opts()).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower.materialize(12), vec![4, 8, 12]);
    }

    #[test]
    fn jacobian_cases() {
        let mut f = CurveFacts::with_genus(2);
        f.index = Some(Fact::asserted(1));
        assert!(matches!(delta_jacobian_genus2(&f.clone().into(), &opts()), Err(RuleError::NeedsFact { .. })));
        f.jacobian_rank_zero = Some(Fact::asserted(false));
        assert!(matches!(delta_jacobian_genus2(&f.clone().into(), &opts()), Err(RuleError::NeedsFact { .. })));
        f.jacobian_simple = Some(Fact::asserted(true));
        let r = delta_jacobian_genus2(&f.clone().into(), &opts()).unwrap();
        assert!(r.exact && r.lower.contains(1));
        f.jacobian_rank_zero = Some(Fact::asserted(true));
        f.jacobian_simple = None;
        let r = delta_jacobian_genus2(&f.into(), &opts()).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower.min_on_window(200), Some(2));
    }

    #[test]
    fn model_drives_facts() {
        // y^2 = x^5 + 1 has rational points at (−1, 0) and (0, ±1).
        let m = HyperellipticCurve::simple(Poly::from_ints(&[1, 0, 0, 0, 0, 1])).unwrap();
        let f = Factor::from_model(m).resolve().unwrap();
        assert_eq!(f.index(), Some(1));
        assert_eq!(f.has_k_point(), Some(true));
    }

    #[test]
    fn potential_pair() {
        let r = potential_product(&g2(1, None, None), &g2(2, None, None), &Default::default(), &opts()).unwrap();
        assert_eq!(r.lower.materialize(10), vec![4, 6, 7, 8, 9, 10]);
        let r = potential_product(&ell(false), &g2(2, None, None), &Default::default(), &opts()).unwrap();
        assert!(r.exact);
    }
}
