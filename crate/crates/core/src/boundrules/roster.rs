//! The rule roster: every density statement the engine knows, as data.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::setalg::DegreeSet;

use super::facts::{Assumption, FactMap, FactValue, Recorded};
use super::formulas::{fiber_product_genus, n_general, n_index1, n_pointed, CoverFamily, CsWitness, PointCount};

/// What kind of object a rule bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Curve,
    Product,
    Jacobian,
    Bielliptic,
    Abelian,
    Potential,
}

/// A precondition over facts. Keys starting with `X.` or `Y.` refer to the
/// first or second role of the current orientation.
#[derive(Clone, Copy)]
pub enum Guard {
    Is(&'static str, bool),
    Eq(&'static str, i64),
    AtMost(&'static str, i64),
    AtLeast(&'static str, i64),
    Known(&'static str),
    /// Always passes; records the fact when present.
    Read(&'static str),
    /// `X.suffix` or `Y.suffix` equals the value.
    Either(&'static str, bool),
    Holds {
        name: &'static str,
        reads: &'static [&'static str],
        test: fn(&View) -> bool,
    },
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Is(k, v) => write!(f, "{k} = {v}"),
            Guard::Eq(k, v) => write!(f, "{k} = {v}"),
            Guard::AtMost(k, v) => write!(f, "{k} <= {v}"),
            Guard::AtLeast(k, v) => write!(f, "{k} >= {v}"),
            Guard::Known(k) => write!(f, "{k} known"),
            Guard::Read(k) => write!(f, "reads {k}"),
            Guard::Either(s, v) => write!(f, "X.{s} = {v} or Y.{s} = {v}"),
            Guard::Holds { name, .. } => f.write_str(name),
        }
    }
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Facts plus role bindings, as seen by one rule in one orientation.
pub struct View<'a> {
    facts: &'a FactMap,
    roles: &'a [String],
    bounds: Option<&'a BTreeMap<String, (DegreeSet, DegreeSet)>>,
}

impl<'a> View<'a> {
    pub fn new(
        facts: &'a FactMap,
        roles: &'a [String],
        bounds: Option<&'a BTreeMap<String, (DegreeSet, DegreeSet)>>,
    ) -> Self {
        View { facts, roles, bounds }
    }

    /// Concrete key for a role-relative key.
    pub fn key(&self, k: &str) -> String {
        let bind = |i: usize, rest: &str| {
            format!("{}.{rest}", self.roles.get(i).or(self.roles.first()).map_or("?", |s| s.as_str()))
        };
        if let Some(rest) = k.strip_prefix("X.") {
            bind(0, rest)
        } else if let Some(rest) = k.strip_prefix("Y.") {
            bind(1, rest)
        } else {
            k.to_string()
        }
    }

    pub fn get(&self, k: &str) -> Option<&'a Recorded> {
        self.facts.get(&self.key(k))
    }

    pub fn flag(&self, k: &str) -> Option<bool> {
        match self.get(k)?.value {
            FactValue::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn int(&self, k: &str) -> Option<i64> {
        match self.get(k)?.value {
            FactValue::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn rat(&self, k: &str) -> Option<&'a str> {
        match &self.get(k)?.value {
            FactValue::Rat(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn uint(&self, k: &str) -> u64 {
        self.int(k).unwrap_or(0).max(0) as u64
    }

    fn bound(&self, role: &str) -> Option<&'a (DegreeSet, DegreeSet)> {
        let i = usize::from(role == "Y");
        let name = self.roles.get(i).or(self.roles.first())?;
        self.bounds?.get(name)
    }

    /// Best known lower bound for the object bound to `X` or `Y`.
    pub fn lower(&self, role: &str) -> DegreeSet {
        self.bound(role).map_or_else(DegreeSet::empty, |b| b.0.clone())
    }

    pub fn upper(&self, role: &str) -> DegreeSet {
        self.bound(role).map_or_else(DegreeSet::naturals, |b| b.1.clone())
    }
}

/// What a firing rule contributes.
#[derive(Clone, Debug, Default)]
pub struct Contribution {
    pub lower: Option<DegreeSet>,
    pub upper: Option<DegreeSet>,
    pub note: Option<String>,
}

impl Contribution {
    fn lower(s: DegreeSet) -> Option<Self> {
        Some(Contribution { lower: Some(s), ..Default::default() })
    }

    fn upper(s: DegreeSet) -> Option<Self> {
        Some(Contribution { upper: Some(s), ..Default::default() })
    }

    fn exact(s: DegreeSet) -> Option<Self> {
        Some(Contribution { lower: Some(s.clone()), upper: Some(s), note: None })
    }

    fn both(lower: DegreeSet, upper: DegreeSet) -> Option<Self> {
        Some(Contribution { lower: Some(lower), upper: Some(upper), note: None })
    }

    fn noted(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

pub struct Rule {
    pub id: &'static str,
    pub anchor: &'static str,
    pub scope: Scope,
    /// Symmetric rules are evaluated in one orientation only.
    pub symmetric: bool,
    pub guards: Vec<Guard>,
    pub assumption: Option<Assumption>,
    pub review: Option<&'static str>,
    pub conclude: fn(&View) -> Option<Contribution>,
}

impl Rule {
    /// Evaluate the guards; on success return the facts they consumed.
    pub fn check(&self, view: &View) -> Option<BTreeMap<String, Recorded>> {
        let mut consumed = BTreeMap::new();
        for g in &self.guards {
            if !eval_guard(g, view, &mut consumed) {
                return None;
            }
        }
        Some(consumed)
    }
}

fn eval_guard(g: &Guard, view: &View, consumed: &mut BTreeMap<String, Recorded>) -> bool {
    let mut take = |k: &str| -> Option<Recorded> {
        let r = view.get(k)?.clone();
        consumed.insert(view.key(k), r.clone());
        Some(r)
    };
    match *g {
        Guard::Is(k, v) => matches!(take(k), Some(Recorded { value: FactValue::Bool(b), .. }) if b == v),
        Guard::Eq(k, v) => matches!(take(k), Some(Recorded { value: FactValue::Int(n), .. }) if n == v),
        Guard::AtMost(k, v) => matches!(take(k), Some(Recorded { value: FactValue::Int(n), .. }) if n <= v),
        Guard::AtLeast(k, v) => matches!(take(k), Some(Recorded { value: FactValue::Int(n), .. }) if n >= v),
        Guard::Known(k) => take(k).is_some(),
        Guard::Read(k) => {
            take(k);
            true
        }
        Guard::Either(suffix, v) => {
            for role in ["X", "Y"] {
                let k = format!("{role}.{suffix}");
                if view.flag(&k) == Some(v) {
                    take(&k);
                    return true;
                }
            }
            false
        }
        Guard::Holds { reads, test, .. } => {
            for k in reads {
                take(k);
            }
            test(view)
        }
    }
}

/// Machine-readable form of a rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub id: String,
    pub anchor: String,
    pub scope: Scope,
    pub symmetric: bool,
    pub guards: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumption: Option<Assumption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review: Option<String>,
}

pub fn roster() -> &'static [Rule] {
    static ROSTER: OnceLock<Vec<Rule>> = OnceLock::new();
    ROSTER.get_or_init(build)
}

pub fn roster_json() -> Vec<RuleSpec> {
    roster()
        .iter()
        .map(|r| RuleSpec {
            id: r.id.to_string(),
            anchor: r.anchor.to_string(),
            scope: r.scope,
            symmetric: r.symmetric,
            guards: r.guards.iter().map(|g| g.to_string()).collect(),
            assumption: r.assumption,
            review: r.review.map(str::to_string),
        })
        .collect()
}

pub fn find_rule(id: &str) -> Option<&'static Rule> {
    roster().iter().find(|r| r.id == id)
}

/// Genus-2 factor categories of index 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableCategory {
    /// `C(k) ≠ ∅` and `3 ∈ δ(C/k)`.
    PointedCubic,
    /// `C(k) ≠ ∅` and `3 ∉ δ(C/k)`.
    PointedNoCubic,
    /// `C(k) = ∅` (so `3 ∈ δ(C/k)`).
    Pointless,
}

impl TableCategory {
    pub fn of(has_k_point: bool, has_degree3_point: Option<bool>) -> Option<Self> {
        match (has_k_point, has_degree3_point) {
            (false, _) => Some(TableCategory::Pointless),
            (true, Some(true)) => Some(TableCategory::PointedCubic),
            (true, Some(false)) => Some(TableCategory::PointedNoCubic),
            (true, None) => None,
        }
    }
}

/// Lower bound for `δ(C×D/k)` with `C`, `D` of genus 2 and index 1.
pub fn genus2_cell(a: TableCategory, b: TableCategory) -> DegreeSet {
    use TableCategory::*;
    let primes = |n| DegreeSet::primes_up_to(n);
    let base = DegreeSet::at_least(2);
    let (bound, extra): (u64, &[u64]) = match (a.min(b), a.max(b)) {
        (PointedCubic, PointedCubic) => (11, &[]),
        (PointedCubic, PointedNoCubic) => (11, &[9]),
        (PointedNoCubic, PointedNoCubic) => (11, &[6, 9]),
        (PointedCubic, Pointless) => (17, &[]),
        (PointedNoCubic, Pointless) => (17, &[9]),
        (Pointless, Pointless) => (67, &[]),
        _ => unreachable!("ordered pair"),
    };
    base.difference(&primes(bound)).without(extra.iter().copied())
}

fn nat() -> DegreeSet {
    DegreeSet::naturals()
}

fn ge(n: u64) -> DegreeSet {
    DegreeSet::at_least(n)
}

fn one(n: u64) -> DegreeSet {
    DegreeSet::finite([n])
}

fn evens_from(n: u64) -> DegreeSet {
    DegreeSet::tail(2, n)
}

#[allow(clippy::too_many_arguments)]
fn cover(
    gc: u64,
    gd: u64,
    maps: (u64, u64),
    nodes: u64,
    points: PointCount,
    nonhyp: bool,
    pencils: Vec<u64>,
    cs: Option<CsWitness>,
) -> Option<Contribution> {
    let (arith, genus) = fiber_product_genus(maps.0, maps.1, gc, gd, nodes).ok()?;
    let fam = CoverFamily { genus, points, nonhyperelliptic: nonhyp, pencils, cs };
    let note = format!("covers of genus {genus} (arithmetic {arith}) from degree {}, {} maps", maps.0, maps.1);
    Contribution::lower(fam.degrees()).map(|c| c.noted(note))
}

fn cs(g2: u64, degrees: std::ops::RangeInclusive<u64>) -> Option<CsWitness> {
    Some(CsWitness { g2, n: 2, degrees: degrees.collect() })
}

fn j_condition(v: &View) -> bool {
    match (v.rat("X.j_invariant"), v.rat("Y.j_invariant")) {
        (Some(a), Some(b)) => !((a == "0" && b == "0") || (a == "1728" && b == "1728")),
        _ => false,
    }
}

fn table_categories(v: &View) -> Option<(TableCategory, TableCategory)> {
    let a = TableCategory::of(v.flag("X.has_k_point")?, v.flag("X.has_degree3_point"))?;
    let b = TableCategory::of(v.flag("Y.has_k_point")?, v.flag("Y.has_degree3_point"))?;
    Some((a, b))
}

fn potential_factor(genus: u64) -> DegreeSet {
    if genus <= 1 {
        nat()
    } else {
        ge(2)
    }
}

struct B(Rule);

impl B {
    fn new(id: &'static str, scope: Scope, symmetric: bool, anchor: &'static str) -> Self {
        B(Rule { id, anchor, scope, symmetric, guards: Vec::new(), assumption: None, review: None, conclude: |_| None })
    }
    fn guards(mut self, g: &[Guard]) -> Self {
        self.0.guards.extend_from_slice(g);
        self
    }
    fn assume(mut self, a: Assumption) -> Self {
        self.0.assumption = Some(a);
        self
    }
    fn review(mut self, r: &'static str) -> Self {
        self.0.review = Some(r);
        self
    }
    fn then(mut self, f: fn(&View) -> Option<Contribution>) -> Rule {
        self.0.conclude = f;
        self.0
    }
}

use Guard::*;

const ELLIPTIC_X: [Guard; 2] = [Eq("X.genus", 1), Is("X.has_k_point", true)];
const ELLIPTIC_PAIR: [Guard; 4] =
    [Eq("X.genus", 1), Eq("Y.genus", 1), Is("X.has_k_point", true), Is("Y.has_k_point", true)];
const EC_RANK_ZERO: [Guard; 4] =
    [Eq("X.genus", 1), Is("X.has_k_point", true), Is("X.positive_rank", false), Eq("Y.genus", 2)];
const GENUS_TWO_PAIR: [Guard; 2] = [Eq("X.genus", 2), Eq("Y.genus", 2)];

fn build() -> Vec<Rule> {
    use Scope::*;
    let mut v = vec![
        // Single curves.
        B::new("curve-g1-infinite", Curve, false, "g = 1, rk C(k) > 0 ⇒ δ(C/k) = ℕ")
            .guards(&[Eq("X.genus", 1), Is("X.positive_rank", true)])
            .then(|_| Contribution::exact(nat())),
        B::new("curve-g1-finite", Curve, false, "g = 1, rk Pic⁰_C(k) = 0 ⇒ δ(C/k) = ind·ℕ ∩ ℕ≥2")
            .guards(&[Eq("X.genus", 1), Is("X.positive_rank", false)])
            .then(|_| Contribution::upper(ge(2))),
        B::new("curve-g2-index2", Curve, false, "g = 2, ind(C/k) = 2 ⇒ δ(C/k) = 2ℕ")
            .guards(&[Eq("X.genus", 2), Eq("X.index", 2)])
            .then(|_| Contribution::exact(DegreeSet::multiples(2))),
        B::new("curve-g2-cubic", Curve, false, "g = 2, ind(C/k) = 1, 3 ∈ δ(C/k) ⇒ δ(C/k) = ℕ≥2")
            .guards(&[Eq("X.genus", 2), Eq("X.index", 1), Is("X.has_degree3_point", true)])
            .then(|_| Contribution::exact(ge(2))),
        B::new("curve-g2-no-cubic", Curve, false, "g = 2, ind(C/k) = 1, no degree-3 point ⇒ δ(C/k) = {2} ⊔ ℕ≥4 and C(k) ≠ ∅")
            .guards(&[Eq("X.genus", 2), Eq("X.index", 1), Is("X.has_degree3_point", false)])
            .then(|_| Contribution::exact(ge(4).union(&one(2)))),
        B::new("curve-g2-hyperelliptic", Curve, false, "g = 2 ⇒ C → P¹ of degree 2 over k ⇒ 2 ∈ δ(C/k)")
            .guards(&[Eq("X.genus", 2)])
            .then(|_| Contribution::lower(one(2))),
        B::new("curve-gonality", Curve, false, "C → P¹ of degree d over k ⇒ d ∈ δ(C/k)")
            .guards(&[Known("X.gonality")])
            .then(|v| Contribution::lower(one(v.uint("X.gonality")))),
        B::new("curve-multiples-above-2g", Curve, false, "ind(C/k)·ℕ ∩ ℕ≥max(2g, 1) ⊆ δ(C/k)")
            .guards(&[Known("X.index"), Read("X.genus")])
            .then(|v| {
                let start = (2 * v.uint("X.genus")).max(1);
                Contribution::lower(DegreeSet::multiples(v.uint("X.index")).intersect(&ge(start)))
            }),
        B::new("curve-index-upper", Curve, false, "δ(C/k) ⊆ ind(C/k)·ℕ")
            .guards(&[Known("X.index")])
            .then(|v| Contribution::upper(DegreeSet::multiples(v.uint("X.index")))),
        B::new("curve-no-rational-density", Curve, false, "g ≥ 2 ⇒ #C(k) < ∞ ⇒ 1 ∉ δ(C/k)")
            .guards(&[AtLeast("X.genus", 2)])
            .then(|_| Contribution::upper(ge(2))),
        B::new("curve-nonhyp-pointed", Curve, false, "C non-hyperelliptic, g ≥ 3, C(k) ≠ ∅ ⇒ 2g − 3 ∈ δ(C/k)")
            .guards(&[AtLeast("X.genus", 3), Is("X.hyperelliptic", false), Is("X.has_k_point", true)])
            .then(|v| Contribution::lower(one(2 * v.uint("X.genus") - 3))),
        B::new("curve-nonhyp-two-points", Curve, false, "C non-hyperelliptic, g ≥ 3, #C(k) ≥ 2 ⇒ 2g − 1 ∈ δ(C/k)")
            .guards(&[AtLeast("X.genus", 3), Is("X.hyperelliptic", false), AtLeast("X.count_k_rational_points_at_least", 2)])
            .then(|v| Contribution::lower(one(2 * v.uint("X.genus") - 1))),
        B::new("curve-nonhyp-pointless", Curve, false, "C non-hyperelliptic, g ≥ 3, ind(C/k) = 1, C(k) = ∅ ⇒ 2g − 1 ∈ δ(C/k)")
            .guards(&[AtLeast("X.genus", 3), Is("X.hyperelliptic", false), Eq("X.index", 1), Is("X.has_k_point", false)])
            .then(|v| Contribution::lower(one(2 * v.uint("X.genus") - 1))),
        // Products: general statements.
        B::new("product-upper-intersection", Product, true, "δ(C×D/k) ⊆ δ(C/k) ∩ δ(D/k)")
            .guards(&[Known("X.index"), Known("Y.index")])
            .then(|v| Contribution::upper(v.upper("X").intersect(&v.upper("Y")))),
        B::new("product-p1-lower", Product, false, "δ_{P¹}(C/k)·δ(D/k) ⊆ δ(C×D/k), δ(C/k) ∖ {1} ⊆ δ_{P¹}(C/k) for g_C ≤ 2")
            .guards(&[AtMost("X.genus", 2)])
            .then(|v| Contribution::lower(v.lower("X").without([1]).product(&v.lower("Y")))),
        B::new("product-full-lower", Product, true, "g_C ≤ 9 ⇒ δ(C/k)·δ(D/k) ⊆ δ(C×D/k)")
            .guards(&[AtMost("X.genus", 9)])
            .then(|v| Contribution::lower(v.lower("X").product(&v.lower("Y")))),
        B::new("product-index-upper", Product, true, "δ(C×D/k) ⊆ ind(C×D/k)·ℕ")
            .guards(&[Known("CxD.index")])
            .then(|v| Contribution::upper(DegreeSet::multiples(v.uint("CxD.index")))),
        B::new(
            "asymptotic-pointed",
            Product,
            true,
            "C(k), D(k) ≠ ∅ ⇒ ℕ≥N ⊆ δ(C×D/k), N = 2((gon C − 1)(gon D − 1) + gon C·g_D + gon D·g_C)",
        )
        .guards(&[AtMost("X.genus", 2), AtMost("Y.genus", 2), Is("X.has_k_point", true), Is("Y.has_k_point", true)])
        .then(|v| {
            let n = n_pointed(2, 2, v.uint("X.genus"), v.uint("Y.genus"));
            Contribution::lower(ge(n)).map(|c| c.noted(format!("N = {n}")))
        }),
        B::new(
            "asymptotic-index-one",
            Product,
            false,
            "gcd(d_C, 2d_D(g_C − 1)) = 1 ⇒ ℕ≥2((d_C − 1)(d_D − 1) + d_C·g_D + d_D·g_C) ⊆ δ(C×D/k)",
        )
        .guards(&[Eq("X.genus", 2), Is("X.has_degree3_point", true), AtMost("Y.genus", 2), Is("Y.has_k_point", true)])
        .then(|v| {
            let n = n_index1(3, 2, v.uint("X.genus"), v.uint("Y.genus")).ok()?;
            Contribution::lower(ge(n)).map(|c| c.noted(format!("d_C = 3, d_D = 2, N = {n}")))
        }),
        B::new(
            "asymptotic-general",
            Product,
            true,
            "e = eff-ind(C×D/k), m = max(2g, 2g − 2 + e) ⇒ ind·ℕ ∩ ℕ≥2(m_C − 1)(m_D − 1) + 2m_C·g_D + 2m_D·g_C ⊆ δ(C×D/k)",
        )
        .guards(&[Known("CxD.index"), Known("CxD.eff_ind"), Read("X.genus"), Read("Y.genus")])
        .then(|v| {
            let e = v.uint("CxD.eff_ind");
            let n = n_general(v.uint("X.genus"), v.uint("Y.genus"), e);
            let s = DegreeSet::multiples(v.uint("CxD.index")).intersect(&ge(n));
            Contribution::lower(s).map(|c| c.noted(format!("e = {e}, N = {n}")))
        }),
        // Two elliptic curves.
        B::new("cover-ee", Product, true, "genus-4 covers of E₁×E₂ with ≥ 2 points and a degree-3 pencil ⇒ 3, 5, 7 ∈ δ(E₁×E₂/k)")
            .guards(&ELLIPTIC_PAIR)
            .then(|_| cover(1, 1, (2, 2), 1, PointCount::AtLeastTwo, true, vec![3], None)),
        B::new("ee-three-upwards", Product, true, "ℕ≥3 ⊆ δ(E₁×E₂/k)")
            .guards(&ELLIPTIC_PAIR)
            .then(|_| Contribution::lower(ge(3))),
        B::new("ee-rational-density", Product, true, "1 ∈ δ(E₁×E₂/k) ⇔ rk E₁(k) > 0 and rk E₂(k) > 0")
            .guards(&[Eq("X.genus", 1), Eq("Y.genus", 1), Is("X.positive_rank", true), Is("Y.positive_rank", true)])
            .then(|_| Contribution::lower(one(1))),
        B::new("ee-no-rational-density", Product, true, "1 ∈ δ(E₁×E₂/k) ⇔ rk E₁(k) > 0 and rk E₂(k) > 0")
            .guards(&[Eq("X.genus", 1), Eq("Y.genus", 1), Either("positive_rank", false)])
            .then(|_| Contribution::upper(ge(2))),
        B::new("ee-positive-rank", Product, false, "rk E₂(k) > 0 ⇒ δ(E₁×E₂/k) = δ(E₁/k)")
            .guards(&ELLIPTIC_PAIR)
            .guards(&[Is("Y.positive_rank", true)])
            .then(|v| Contribution::both(v.lower("X"), v.upper("X"))),
        B::new("ee-quadratic-j", Product, true, "j(E₁), j(E₂) not both 0 and not both 1728 ⇒ 2 ∈ δ(E₁×E₂/k)")
            .guards(&ELLIPTIC_PAIR)
            .guards(&[Holds {
                name: "j(E₁), j(E₂) not both 0, not both 1728",
                reads: &["X.j_invariant", "Y.j_invariant"],
                test: j_condition,
            }])
            .then(|_| Contribution::lower(one(2))),
        B::new("ee-quadratic-two-torsion", Product, true, "E₁[2] ⊆ E₁(k), E₂[2] ⊆ E₂(k) ⇒ 2 ∈ δ(E₁×E₂/k)")
            .guards(&ELLIPTIC_PAIR)
            .guards(&[Is("X.full_two_torsion", true), Is("Y.full_two_torsion", true)])
            .then(|_| Contribution::lower(one(2))),
        B::new("ee-quadratic-parity", Product, true, "k ⊂ ℝ, parity conjecture ⇒ 2 ∈ δ(E₁×E₂/k)")
            .guards(&ELLIPTIC_PAIR)
            .guards(&[Is("k.real_embedding", true)])
            .assume(Assumption::ParityConjecture)
            .then(|_| Contribution::lower(one(2))),
        // Isogeny factors.
        B::new("isogeny-factor", Product, false, "E an isogeny factor of Pic⁰_C ⇒ δ(C×E/k) = δ(C/k)")
            .guards(&[Eq("X.genus", 2), Eq("Y.genus", 1), Is("Y.has_k_point", true), Is("CxD.isogeny_factor", true)])
            .then(|v| Contribution::both(v.lower("X"), v.upper("X"))),
        // Elliptic curve times genus 2.
        B::new("ec-index-two", Product, false, "rk E(k) = 0, ind(C/k) = 2 ⇒ 2ℕ ∖ {2} ⊆ δ(E×C/k) ⊆ 2ℕ")
            .guards(&EC_RANK_ZERO)
            .guards(&[Eq("Y.index", 2)])
            .then(|_| Contribution::both(evens_from(4), DegreeSet::multiples(2))),
        B::new("ec-pointless-index-one", Product, false, "rk E(k) = 0, ind(C/k) = 1, C(k) = ∅ ⇒ ℕ≥2 ∖ {2, 3, 5, 7, 11, 13} ⊆ δ(E×C/k)")
            .guards(&EC_RANK_ZERO)
            .guards(&[Eq("Y.index", 1), Is("Y.has_k_point", false)])
            .then(|_| Contribution::lower(ge(2).without([2, 3, 5, 7, 11, 13]))),
        B::new("ec-pointed", Product, false, "rk E(k) = 0, C(k) ≠ ∅ ⇒ ℕ≥2 ∖ {2, 3, 5, 7} ⊆ δ(E×C/k)")
            .guards(&EC_RANK_ZERO)
            .guards(&[Is("Y.has_k_point", true)])
            .then(|_| Contribution::lower(ge(2).without([2, 3, 5, 7]))),
        B::new("ec-pointed-weierstrass", Product, false, "rk E(k) = 0, C has a k-rational Weierstrass point ⇒ 7 ∈ δ(E×C/k)")
            .guards(&EC_RANK_ZERO)
            .guards(&[Is("Y.has_rational_weierstrass", true)])
            .then(|_| Contribution::lower(one(7))),
        B::new(
            "ec-quadratic-shared-quartic",
            Product,
            false,
            "C: y² = g₄(x)g₂(x), g₂ monic quadratic, D: y² = g₄(x), E = Pic⁰_D ⇒ 2 ∈ δ(E×C/k)",
        )
        .guards(&ELLIPTIC_X)
        .guards(&[Eq("Y.genus", 2), Is("CxD.shared_quartic", true)])
        .then(|_| Contribution::lower(one(2))),
        B::new("ec-quadratic-isotrivial", Product, false, "isotrivial-fibration conjecture ⇒ 2 ∈ δ(E×C/k)")
            .guards(&ELLIPTIC_X)
            .guards(&[Eq("Y.genus", 2)])
            .assume(Assumption::IsotrivialFibration)
            .then(|_| Contribution::lower(one(2))),
        B::new(
            "ec-cubic-parity",
            Product,
            false,
            "E split semistable, #C(F_p) < p + 1 or #C(F_p) ≥ p + 10 at each bad p of E, C → P¹ of degree 3, parity conjecture ⇒ 3 ∈ δ(E×C/ℚ)",
        )
        .guards(&[Eq("X.genus", 1), Eq("Y.genus", 2), Is("cert.parity_cubic", true)])
        .assume(Assumption::ParityConjecture)
        .then(|_| Contribution::lower(one(3))),
        B::new("cover-ec-pointless", Product, false, "genus-9 covers of E×C with no k-point ⇒ 17 ∈ δ(E×C/k)")
            .guards(&ELLIPTIC_X)
            .guards(&[Eq("Y.genus", 2), Eq("Y.index", 1), Is("Y.has_k_point", false)])
            .then(|_| cover(2, 1, (3, 2), 0, PointCount::None, true, vec![], None)),
        B::new("cover-ec-pointed", Product, false, "genus-7 covers of E×C with ≥ 2 points, (n − 1)d < g₁ − n·g₂ ⇒ 2g₁ − 2 − d ∈ δ(E×C/k)")
            .guards(&ELLIPTIC_X)
            .guards(&[Eq("Y.genus", 2), Is("Y.has_k_point", true)])
            .then(|_| cover(2, 1, (2, 2), 0, PointCount::AtLeastTwo, true, vec![], cs(1, 0..=4))),
        B::new("cover-ec-weierstrass", Product, false, "genus-6 covers of E×C through a Weierstrass point, (n − 1)d < g₁ − n·g₂ ⇒ 2g₁ − 2 − d ∈ δ(E×C/k)")
            .guards(&ELLIPTIC_X)
            .guards(&[Eq("Y.genus", 2), Is("Y.has_rational_weierstrass", true)])
            .then(|_| cover(2, 1, (2, 2), 1, PointCount::One, false, vec![], cs(1, 0..=3))),
        // Two genus-2 curves.
        B::new("gg-genus2-cells", Product, true, "g_C = g_D = 2, ind = 1 ⇒ δ(C×D/k) ⊇ ℕ≥2 ∖ S(type C, type D)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[
                Eq("X.index", 1),
                Eq("Y.index", 1),
                Known("X.has_k_point"),
                Known("Y.has_k_point"),
                Holds {
                    name: "both factors have a type",
                    reads: &["X.has_degree3_point", "Y.has_degree3_point"],
                    test: |v| table_categories(v).is_some(),
                },
            ])
            .then(|v| {
                let (a, b) = table_categories(v)?;
                Contribution::lower(genus2_cell(a, b)).map(|c| c.noted(format!("{a:?} × {b:?}")))
            }),
        B::new("cover-pointed-generic", Product, true, "genus-9 covers of C×D with ≥ 2 points, (n − 1)d < g₁ − n·g₂ ⇒ 2g₁ − 2 − d, 2g₁ − 3 ∈ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Is("X.has_k_point", true), Is("Y.has_k_point", true)])
            .then(|_| {
                let (_, g) = fiber_product_genus(2, 2, 2, 2, 0).ok()?;
                let fam = CoverFamily { genus: g, points: PointCount::AtLeastTwo, nonhyperelliptic: true, pencils: vec![], cs: cs(2, 0..=4) };
                Contribution::lower(fam.without_odd_canonical()).map(|c| c.noted(format!("covers of genus {g}")))
            }),
        B::new("cover-pointed-two-g-minus-one", Product, true, "genus-9 non-hyperelliptic covers with ≥ 2 points ⇒ 2g₁ − 1 = 17 ∈ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Is("X.has_k_point", true), Is("Y.has_k_point", true)])
            .review("17 rests on the covering curves being non-hyperelliptic; only this chain supplies it")
            .then(|_| {
                let fam = CoverFamily { genus: 9, points: PointCount::AtLeastTwo, nonhyperelliptic: true, pencils: vec![], cs: None };
                Contribution::lower(one(fam.odd_canonical_degree()?))
            }),
        B::new("cover-pointed-both-weierstrass", Product, true, "genus-8 covers through Weierstrass points, (n − 1)d < g₁ − n·g₂ ⇒ 2g₁ − 2 − d ∈ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Is("X.has_rational_weierstrass", true), Is("Y.has_rational_weierstrass", true)])
            .then(|_| cover(2, 2, (2, 2), 1, PointCount::One, false, vec![], cs(2, 0..=3))),
        B::new("cover-one-pointless", Product, false, "genus-12 covers with no k-point ⇒ 2g₁ − 1 = 23 ∈ δ(C×D/k), 2g₁ − 2 − d = 19 ∈ δ(C×D/k) for d = 3")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 1), Is("X.has_k_point", false), Is("Y.has_k_point", true)])
            .then(|_| cover(2, 2, (3, 2), 0, PointCount::None, true, vec![], Some(CsWitness { g2: 2, n: 2, degrees: vec![3] }))),
        B::new("cover-both-pointless", Product, true, "genus-36 covers from degree-5 pencils with no k-point ⇒ 71 ∈ δ(C×D/k), ℕ≥72 ⊆ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 1), Eq("Y.index", 1), Is("X.has_k_point", false), Is("Y.has_k_point", false)])
            .then(|_| cover(2, 2, (5, 5), 0, PointCount::None, true, vec![], None)),
        B::new(
            "gg-weierstrass-pair",
            Product,
            true,
            "g_C = g_D = 2, 3 ∈ δ(C/k) ∩ δ(D/k), ≥ 2 rational Weierstrass points on each ⇒ ℕ≥2 ∖ {2, 3, 5} ⊆ δ(C×D/k)",
        )
        .guards(&GENUS_TWO_PAIR)
        .guards(&[
            Is("X.has_degree3_point", true),
            Is("Y.has_degree3_point", true),
            AtLeast("X.rational_weierstrass_count", 2),
            AtLeast("Y.rational_weierstrass_count", 2),
        ])
        .then(|_| Contribution::lower(ge(2).without([2, 3, 5]))),
        B::new("gg-index-two-one", Product, false, "ind(C/k) = 2, ind(D/k) = 1 ⇒ 2ℕ ∖ {2, 6} ⊆ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 2), Eq("Y.index", 1)])
            .then(|_| Contribution::lower(evens_from(4).without([6]))),
        B::new("gg-index-two-one-cubic", Product, false, "ind(C/k) = 2, ind(D/k) = 1, 3 ∈ δ(D/k) ⇒ 6 ∈ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 2), Eq("Y.index", 1), Is("Y.has_degree3_point", true)])
            .then(|_| Contribution::lower(one(6))),
        B::new("gg-index-two-two", Product, true, "ind(C/k) = ind(D/k) = ind(C×D/k) = 2, e = eff-ind ⇒ 4ℕ ∪ 2ℕ≥(e+3)² ⊆ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 2), Eq("Y.index", 2), Eq("CxD.index", 2), Known("CxD.eff_ind")])
            .then(|v| {
                let e = v.uint("CxD.eff_ind");
                Contribution::lower(DegreeSet::multiples(4).union(&evens_from(2 * (e + 3) * (e + 3))))
            }),
        B::new("gg-index-four", Product, true, "ind(C/k) = ind(D/k) = 2, ind(C×D/k) = 4 ⇒ δ(C×D/k) = 4ℕ")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Eq("X.index", 2), Eq("Y.index", 2), Eq("CxD.index", 4)])
            .then(|_| Contribution::exact(DegreeSet::multiples(4))),
        B::new("gg-self-product-jacobian", Product, true, "2δ(Pic⁰_C/k) ⊆ δ(C×C/k), ℕ≥2 ⊆ δ(Pic⁰_C/k)")
            .guards(&[Eq("X.genus", 2), Is("CxD.same_curve", true)])
            .then(|_| Contribution::lower(evens_from(4))),
        B::new("gg-self-product-rank", Product, true, "Pic⁰_C simple, rk Pic⁰_C(k) > 0 ⇒ 2 ∈ δ(C×C/k)")
            .guards(&[Eq("X.genus", 2), Is("CxD.same_curve", true), Is("X.jacobian_simple", true), Is("X.jacobian_rank_zero", false)])
            .then(|_| Contribution::lower(one(2))),
        B::new(
            "gg-quadratic-nondensity",
            Product,
            true,
            "f ≡ −1, g ≡ 1 mod 3, C(ℝ) = D(ℝ) = ∅, C(K), D(K) ≠ ∅ for one quadratic K, rk Pic⁰_C = rk Pic⁰_D = 0 ⇒ 2 ∉ δ(C×D/ℚ)",
        )
        .guards(&[Is("cert.quadratic_nondensity", true)])
        .then(|_| Contribution::upper(nat().without([2]))),
        B::new(
            "gg-cubic-nondensity",
            Product,
            true,
            "unique degree-3 maps φ, ψ, fibers of φ totally real, fibers of ψ with one real point, D(ℚ) ≠ ∅ ⇒ 3 ∉ δ(C×D/ℚ)",
        )
        .guards(&[Is("cert.cubic_nondensity", true)])
        .then(|_| Contribution::upper(nat().without([3]))),
        B::new("gg-quadratic-bombieri-lang", Product, true, "rk Pic⁰_C(k) = rk Pic⁰_D(k) = 0, Bombieri–Lang ⇒ 2 ∉ δ(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .guards(&[Is("X.jacobian_rank_zero", true), Is("Y.jacobian_rank_zero", true)])
            .assume(Assumption::BombieriLang)
            .then(|_| Contribution::upper(nat().without([2]))),
        B::new("local-obstruction", Product, true, "no K with [K : ℚ_p] ≤ 2 has C(K) ≠ ∅ and D(K) ≠ ∅ ⇒ 1, 2 ∉ δ(C×D/ℚ)")
            .guards(&[Is("cert.local_obstruction", true)])
            .then(|_| Contribution::upper(nat().without([1, 2]))),
        // Jacobians of genus-2 curves.
        B::new("jac-lower", Jacobian, false, "ℕ≥2 ⊆ δ(Pic⁰_C/k)")
            .guards(&[Eq("X.genus", 2)])
            .then(|_| Contribution::lower(ge(2))),
        B::new("jac-rational-density", Jacobian, false, "Pic⁰_C simple ⇒ (1 ∈ δ(Pic⁰_C/k) ⇔ rk Pic⁰_C(k) > 0)")
            .guards(&[Eq("X.genus", 2), Is("X.jacobian_simple", true), Is("X.jacobian_rank_zero", false)])
            .then(|_| Contribution::lower(one(1))),
        B::new("jac-rank-zero", Jacobian, false, "rk Pic⁰_C(k) = 0 ⇒ 1 ∉ δ(Pic⁰_C/k)")
            .guards(&[Eq("X.genus", 2), Is("X.jacobian_rank_zero", true)])
            .then(|_| Contribution::upper(ge(2))),
        // Bielliptic surfaces X = (E₁×E₂)/G.
        B::new("bi-lower", Bielliptic, false, "ℕ≥3 ⊆ δ(X/k)")
            .guards(&[Eq("X.genus", 1), Eq("Y.genus", 1)])
            .then(|_| Contribution::lower(ge(3))),
        B::new("bi-upper", Bielliptic, false, "δ(X/k) ⊆ δ(E₁/k)")
            .guards(&[Eq("X.genus", 1), Known("X.index")])
            .then(|v| Contribution::upper(v.upper("X"))),
        B::new("bi-quadratic", Bielliptic, false, "j(E₁), j(E₂) not both 0 and not both 1728, or E₁[2], E₂[2] rational ⇒ 2 ∈ δ(X/k)")
            .guards(&[Is("S.quadratic_condition", true)])
            .then(|_| Contribution::lower(one(2))),
        B::new("bi-quadratic-j", Bielliptic, false, "j(E₁), j(E₂) not both 0 and not both 1728 ⇒ 2 ∈ δ(X/k)")
            .guards(&[Holds { name: "j(E₁), j(E₂) not both 0, not both 1728", reads: &["X.j_invariant", "Y.j_invariant"], test: j_condition }])
            .then(|_| Contribution::lower(one(2))),
        B::new("bi-quadratic-two-torsion", Bielliptic, false, "E₁[2] ⊆ E₁(k), E₂[2] ⊆ E₂(k) ⇒ 2 ∈ δ(X/k)")
            .guards(&[Is("X.full_two_torsion", true), Is("Y.full_two_torsion", true)])
            .then(|_| Contribution::lower(one(2))),
        B::new("bi-no-rational", Bielliptic, false, "rk E₂(K) = 0 for every halving field K ⇒ 1 ∉ δ(X/k)")
            .guards(&[Is("S.halving_fields_rank_zero", true)])
            .then(|_| Contribution::upper(ge(2))),
        // Abelian surfaces isogenous to B.
        B::new("abelian-transfer", Abelian, false, "A ~ B, B = E₁×E₂ or B = Pic⁰_C ⇒ δ(A/k) = δ(B/k)")
            .guards(&[Is("A.isogenous_to_B", true)])
            .then(|v| Contribution::both(v.lower("X"), v.upper("X"))),
        B::new("abelian-three-upwards", Abelian, false, "ℕ≥3 ⊆ δ(A/k)")
            .guards(&[Is("A.isogenous_to_B", true)])
            .then(|_| Contribution::lower(ge(3))),
        B::new("abelian-jacobian-two", Abelian, false, "A ~ Pic⁰_C ⇒ 2 ∈ δ(A/k)")
            .guards(&[Is("A.isogenous_to_B", true), Is("B.is_jacobian", true)])
            .then(|_| Contribution::lower(one(2))),
        // Potential density.
        B::new("pot-upper-intersection", Potential, true, "℘(C×D/k) ⊆ ℘(C/k) ∩ ℘(D/k)")
            .guards(&[Read("X.genus"), Read("Y.genus")])
            .then(|v| Contribution::upper(potential_factor(v.uint("X.genus")).intersect(&potential_factor(v.uint("Y.genus"))))),
        B::new("pot-product-lower", Potential, true, "g_C ≤ 9 ⇒ ℘(C/k)·℘(D/k) ⊆ ℘(C×D/k)")
            .guards(&[AtMost("X.genus", 9), Read("Y.genus")])
            .then(|v| Contribution::lower(potential_factor(v.uint("X.genus")).product(&potential_factor(v.uint("Y.genus"))))),
        B::new("pot-low-genus-factor", Potential, false, "g_C ≤ 1 ⇒ ℘(C×D/k) = ℘(D/k)")
            .guards(&[AtMost("X.genus", 1), Read("Y.genus")])
            .then(|v| Contribution::exact(potential_factor(v.uint("Y.genus")))),
        B::new("pot-genus-two-pair", Potential, true, "g_C = g_D = 2 ⇒ ℕ≥2 ∖ {2, 3, 5} ⊆ ℘(C×D/k)")
            .guards(&GENUS_TWO_PAIR)
            .then(|_| Contribution::lower(ge(2).without([2, 3, 5]))),
        B::new("pot-self-product", Potential, true, "Pic⁰_C geometrically simple ⇒ 2 ∈ ℘(C×C/k)")
            .guards(&[Eq("X.genus", 2), Is("CxD.same_curve", true), Is("X.jacobian_geometrically_simple", true)])
            .then(|_| Contribution::lower(one(2))),
    ];
    v.sort_by_key(|r| r.id);
    v
}
