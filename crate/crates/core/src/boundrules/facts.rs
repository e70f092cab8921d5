//! Arithmetic facts about a single curve, each tagged with where it came from.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curvemodel::{EllipticCurve, HyperellipticCurve};
use crate::polyarith::{rat_string, Rat};

use super::RuleError;

/// Height bound for the search for a non-Weierstrass rational point.
pub const NON_WEIERSTRASS_SEARCH: i64 = 12;

/// Where a fact comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Supplied by the caller (ranks, simplicity, anything not computed here).
    Asserted,
    /// Derived from local data: a real or p-adic obstruction.
    DerivedLocal,
    /// Derived from an exhibited point or a model.
    DerivedPoint,
}

/// A value plus its provenance. In JSON a bare value means an asserted fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fact<T> {
    pub value: T,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl<T> Fact<T> {
    pub fn asserted(value: T) -> Self {
        Fact { value, provenance: Provenance::Asserted, source: None }
    }

    pub fn derived(value: T, provenance: Provenance, source: &str) -> Self {
        Fact { value, provenance, source: Some(source.to_string()) }
    }

    pub fn with_source(mut self, source: &str) -> Self {
        self.source = Some(source.to_string());
        self
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFact<T> {
    Full {
        value: T,
        provenance: Provenance,
        #[serde(default)]
        source: Option<String>,
    },
    Bare(T),
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Fact<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match RawFact::deserialize(d)? {
            RawFact::Full { value, provenance, source } => Fact { value, provenance, source },
            RawFact::Bare(value) => Fact::asserted(value),
        })
    }
}

/// A rational number that serializes as a string such as `"-1/3"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatValue(#[serde(with = "rat_string")] pub Rat);

/// Conjectures a rule may depend on. Rules tagged with one fire only when the
/// caller opts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assumption {
    ParityConjecture,
    IsotrivialFibration,
    BombieriLang,
}

impl Assumption {
    pub fn tag(self) -> &'static str {
        match self {
            Assumption::ParityConjecture => "ParityConjecture",
            Assumption::IsotrivialFibration => "IsotrivialFibration",
            Assumption::BombieriLang => "BombieriLang",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// What is known about one curve `C/k`. Absent tri-states are unknown.
///
/// For genus 1, `positive_rank` is the Mordell–Weil rank of the curve itself;
/// for higher genus the Jacobian facts carry rank information.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFacts {
    pub genus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Fact<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_k_point: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_degree3_point: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_rational_weierstrass: Option<Fact<bool>>,
    /// Number of rational Weierstrass points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_weierstrass_count: Option<Fact<u64>>,
    /// A rational point not fixed by the hyperelliptic involution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_non_weierstrass_point: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_k_rational_points_at_least: Option<Fact<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gonality: Option<Fact<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperelliptic: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian_rank_zero: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian_simple: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian_geometrically_simple: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_rank: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_invariant: Option<Fact<RatValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_two_torsion: Option<Fact<bool>>,
}

fn val<T: Copy>(f: &Option<Fact<T>>) -> Option<T> {
    f.as_ref().map(|x| x.value)
}

fn bad(msg: &str) -> RuleError {
    RuleError::Inconsistent(msg.to_string())
}

impl CurveFacts {
    pub fn with_genus(genus: u32) -> Self {
        CurveFacts { genus, ..Default::default() }
    }

    pub fn index(&self) -> Option<u64> {
        val(&self.index)
    }

    pub fn has_k_point(&self) -> Option<bool> {
        val(&self.has_k_point)
    }

    pub fn has_degree3_point(&self) -> Option<bool> {
        val(&self.has_degree3_point)
    }

    /// Fill in facts that follow from others and reject contradictions.
    ///
    /// Derivations: a k-point forces index 1; a rank statement on a genus-1
    /// curve fixes the other rank flag; index 1 without a k-point on a
    /// genus-2 curve forces a degree-3 point, and a degree-3 point on a
    /// genus-2 curve forces index 1.
    pub fn normalized(&self) -> Result<CurveFacts, RuleError> {
        let mut f = self.clone();
        if f.genus == 0 {
            return Err(bad("genus must be at least 1"));
        }
        if let Some(c) = &f.count_k_rational_points_at_least {
            if c.value >= 1 && f.has_k_point.is_none() {
                f.has_k_point = Some(Fact::derived(true, c.provenance, "counted k-points"));
            }
        }
        if let Some(fact) = &f.has_k_point {
            if fact.value {
                match f.index() {
                    None => {
                        f.index = Some(Fact::derived(1, fact.provenance, "a k-point has degree 1"));
                    }
                    Some(1) => {}
                    Some(_) => return Err(bad("has_k_point = true needs index 1")),
                }
            }
        }
        if let Some(c) = f.rational_weierstrass_count.clone() {
            match val(&f.has_rational_weierstrass) {
                None => {
                    f.has_rational_weierstrass =
                        Some(Fact::derived(c.value > 0, c.provenance, "counted Weierstrass points"))
                }
                Some(w) if w != (c.value > 0) => {
                    return Err(bad("rational_weierstrass_count disagrees with has_rational_weierstrass"))
                }
                _ => {}
            }
        }
        for (flag, why) in [
            (f.has_rational_weierstrass.clone(), "a rational Weierstrass point"),
            (f.has_non_weierstrass_point.clone(), "a non-Weierstrass rational point"),
        ] {
            if let Some(w) = flag.filter(|w| w.value) {
                match f.has_k_point() {
                    None => f.has_k_point = Some(Fact::derived(true, w.provenance, why)),
                    Some(false) => return Err(bad("a rational point on a pointless curve")),
                    Some(true) => {}
                }
            }
        }
        if f.has_k_point() == Some(false) && val(&f.count_k_rational_points_at_least).unwrap_or(0) > 0 {
            return Err(bad("points counted on a pointless curve"));
        }
        if let Some(i) = f.index() {
            if i == 0 {
                return Err(bad("index must be positive"));
            }
            if f.genus >= 2 && !(2 * f.genus as u64 - 2).is_multiple_of(i) {
                return Err(bad("index must divide 2g - 2"));
            }
        }
        if let Some(g) = val(&f.gonality) {
            if g < 2 {
                return Err(bad("gonality of a curve of positive genus is at least 2"));
            }
            if f.genus == 2 && g != 2 {
                return Err(bad("a genus-2 curve has gonality 2"));
            }
        }
        if f.genus == 2 && val(&f.hyperelliptic) == Some(false) {
            return Err(bad("every genus-2 curve is hyperelliptic"));
        }
        if f.genus == 1 {
            match (val(&f.positive_rank), val(&f.jacobian_rank_zero)) {
                (Some(a), Some(b)) if a == b => {
                    return Err(bad("positive_rank and jacobian_rank_zero disagree"));
                }
                (Some(a), None) => {
                    let p = f.positive_rank.as_ref().unwrap().provenance;
                    f.jacobian_rank_zero = Some(Fact::derived(!a, p, "genus 1: the curve is its Jacobian"));
                }
                (None, Some(b)) => {
                    let p = f.jacobian_rank_zero.as_ref().unwrap().provenance;
                    f.positive_rank = Some(Fact::derived(!b, p, "genus 1: the curve is its Jacobian"));
                }
                _ => {}
            }
            if let Some(r) = f.positive_rank.as_ref().filter(|r| r.value) {
                if f.has_k_point() == Some(false) || f.index().is_some_and(|i| i != 1) {
                    return Err(bad("positive rank needs a k-point"));
                }
                let p = r.provenance;
                if f.has_k_point.is_none() {
                    f.has_k_point = Some(Fact::derived(true, p, "positive rank"));
                }
                if f.index.is_none() {
                    f.index = Some(Fact::derived(1, p, "positive rank"));
                }
            }
        } else if f.positive_rank.is_some() {
            return Err(bad("positive_rank is a genus-1 fact; use jacobian_rank_zero"));
        }
        if f.genus == 2 {
            if let Some(w) = f.has_non_weierstrass_point.as_ref().filter(|w| w.value) {
                match f.has_degree3_point() {
                    None => {
                        f.has_degree3_point = Some(Fact::derived(
                            true,
                            w.provenance,
                            "|3P| is base-point free for a non-Weierstrass point P",
                        ));
                    }
                    Some(false) => return Err(bad("a non-Weierstrass rational point gives a degree-3 point")),
                    Some(true) => {}
                }
            }
            if let Some(c) = f.has_degree3_point.as_ref().filter(|c| c.value) {
                if f.index.is_none() {
                    f.index = Some(Fact::derived(1, c.provenance, "degree-2 fibers of x and a degree-3 point"));
                }
            }
            if let Some(i) = f.index() {
                if i == 2 && f.has_degree3_point() == Some(true) {
                    return Err(bad("index 2 forbids odd-degree points"));
                }
                if i == 1 {
                    match (f.has_k_point.as_ref(), f.has_degree3_point()) {
                        (Some(k), None) if !k.value => {
                            f.has_degree3_point = Some(Fact::derived(
                                true,
                                k.provenance,
                                "index 1 without a k-point forces a degree-3 point",
                            ));
                        }
                        (Some(k), Some(false)) if !k.value => {
                            return Err(bad("index 1, no k-point and no degree-3 point is impossible in genus 2"));
                        }
                        _ => {}
                    }
                }
            }
        }
        if f.j_invariant.is_some() && f.genus != 1 {
            return Err(bad("j_invariant is a genus-1 fact"));
        }
        Ok(f)
    }

    /// Facts read off a model: genus, rational points at infinity, rational
    /// Weierstrass points, a small non-Weierstrass rational point if one
    /// exists, real-point emptiness (forcing even index).
    pub fn from_model(c: &HyperellipticCurve) -> CurveFacts {
        let mut f = CurveFacts::with_genus(c.genus());
        f.has_rational_weierstrass = Some(Fact::derived(
            c.has_rational_weierstrass_point(),
            Provenance::DerivedPoint,
            "rational roots of the model polynomial",
        ));
        f.rational_weierstrass_count = Some(Fact::derived(
            c.rational_weierstrass_count(),
            Provenance::DerivedPoint,
            "rational roots of the model polynomial",
        ));
        if let Some(x) = c.non_weierstrass_point(NON_WEIERSTRASS_SEARCH) {
            let at = x.map_or_else(|| "infinity".to_string(), |x| format!("x = {x}"));
            f.has_non_weierstrass_point =
                Some(Fact::derived(true, Provenance::DerivedPoint, &format!("non-Weierstrass rational point at {at}")));
        }
        if c.has_rational_point_at_infinity() {
            f.has_k_point = Some(Fact::derived(true, Provenance::DerivedPoint, "rational point at infinity"));
        } else if !c.rational_weierstrass_x().is_empty() {
            f.has_k_point = Some(Fact::derived(true, Provenance::DerivedPoint, "rational Weierstrass point"));
        }
        if c.real_points_empty() {
            f.has_k_point = Some(Fact::derived(false, Provenance::DerivedLocal, "no real points"));
            if f.genus == 2 {
                f.index =
                    Some(Fact::derived(2, Provenance::DerivedLocal, "no real points: every point has even degree"));
            }
        }
        if f.genus == 2 {
            f.gonality = Some(Fact::derived(2, Provenance::DerivedPoint, "hyperelliptic map"));
        }
        f
    }

    /// Facts read off a Weierstrass model: a rational point, `j` and the
    /// rational 2-torsion.
    pub fn from_elliptic(e: &EllipticCurve) -> CurveFacts {
        let mut f = CurveFacts::with_genus(1);
        f.has_k_point = Some(Fact::derived(true, Provenance::DerivedPoint, "point at infinity"));
        f.j_invariant = Some(Fact::derived(RatValue(e.j_invariant()), Provenance::DerivedPoint, "Weierstrass model"));
        f.full_two_torsion = Some(Fact::derived(
            e.has_full_two_torsion(),
            Provenance::DerivedPoint,
            "rational roots of the 2-division polynomial",
        ));
        f
    }

    /// Combine caller facts with model-derived facts. Caller facts win, but a
    /// disagreement on a derived fact is an error.
    pub fn merged_with(&self, derived: &CurveFacts) -> Result<CurveFacts, RuleError> {
        if self.genus != 0 && self.genus != derived.genus {
            return Err(bad("asserted genus disagrees with the model"));
        }
        let mut out = self.clone();
        out.genus = derived.genus;
        fn take<T: Clone + PartialEq>(
            mine: &mut Option<Fact<T>>,
            theirs: &Option<Fact<T>>,
            name: &str,
        ) -> Result<(), RuleError> {
            match (mine.as_ref(), theirs) {
                (Some(a), Some(b)) if a.value != b.value => {
                    Err(RuleError::Inconsistent(format!("{name} disagrees with the model")))
                }
                (None, Some(b)) => {
                    *mine = Some(b.clone());
                    Ok(())
                }
                _ => Ok(()),
            }
        }
        take(&mut out.index, &derived.index, "index")?;
        take(&mut out.has_k_point, &derived.has_k_point, "has_k_point")?;
        take(&mut out.has_rational_weierstrass, &derived.has_rational_weierstrass, "has_rational_weierstrass")?;
        take(&mut out.rational_weierstrass_count, &derived.rational_weierstrass_count, "rational_weierstrass_count")?;
        take(&mut out.has_non_weierstrass_point, &derived.has_non_weierstrass_point, "has_non_weierstrass_point")?;
        take(&mut out.gonality, &derived.gonality, "gonality")?;
        take(&mut out.j_invariant, &derived.j_invariant, "j_invariant")?;
        take(&mut out.full_two_torsion, &derived.full_two_torsion, "full_two_torsion")?;
        Ok(out)
    }

    /// Flatten into `role.name -> value` entries for the rule engine.
    pub(crate) fn flatten(&self, role: &str, out: &mut FactMap) {
        let mut put = |name: &str, v: Option<(FactValue, Provenance)>| {
            if let Some((value, provenance)) = v {
                out.insert(format!("{role}.{name}"), Recorded { value, provenance });
            }
        };
        put("genus", Some((FactValue::Int(self.genus as i64), Provenance::Asserted)));
        let b = |f: &Option<Fact<bool>>| f.as_ref().map(|x| (FactValue::Bool(x.value), x.provenance));
        let n = |f: &Option<Fact<u64>>| f.as_ref().map(|x| (FactValue::Int(x.value as i64), x.provenance));
        put("index", n(&self.index));
        put("has_k_point", b(&self.has_k_point));
        put("has_degree3_point", b(&self.has_degree3_point));
        put("has_rational_weierstrass", b(&self.has_rational_weierstrass));
        put("rational_weierstrass_count", n(&self.rational_weierstrass_count));
        put("has_non_weierstrass_point", b(&self.has_non_weierstrass_point));
        put("count_k_rational_points_at_least", n(&self.count_k_rational_points_at_least));
        put("gonality", n(&self.gonality));
        put("hyperelliptic", b(&self.hyperelliptic));
        put("jacobian_rank_zero", b(&self.jacobian_rank_zero));
        put("jacobian_simple", b(&self.jacobian_simple));
        put("jacobian_geometrically_simple", b(&self.jacobian_geometrically_simple));
        put("positive_rank", b(&self.positive_rank));
        put("full_two_torsion", b(&self.full_two_torsion));
        put("j_invariant", self.j_invariant.as_ref().map(|x| (FactValue::Rat(x.value.0.to_string()), x.provenance)));
    }
}

/// Scalar value stored in a [`FactMap`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactValue {
    Bool(bool),
    Int(i64),
    Rat(String),
}

/// A fact as consumed by a rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recorded {
    pub value: FactValue,
    pub provenance: Provenance,
}

/// Flat `"C.index" -> value` view of all facts of one query.
pub type FactMap = BTreeMap<String, Recorded>;
