//! Mechanical checks behind the non-density statements and the conditional
//! cubic-point statement.
//!
//! Each check returns a [`CertificateReport`] listing every sub-condition, so
//! a failure says which hypothesis broke.

use serde::{Deserialize, Serialize};

use crate::curvemodel::{mod3_condition, EllipticCurve, HyperellipticCurve};
use crate::localsolve::surface_qp_empty_mod3;
use crate::polyarith::{is_squarefree_int, rat, ParamPoly, Poly, QuadNumber, Rat};
use crate::rootnumber::{bad_primes, reduction_type, ReductionType};

use super::facts::Fact;
use super::RuleError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub verified: bool,
    pub checks: Vec<Check>,
}

impl CertificateReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        CertificateReport { verified: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

fn check(name: &str, passed: bool) -> Check {
    Check { name: name.to_string(), passed, detail: None }
}

fn check_with(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail: Some(detail) }
}

fn needs(rule: &str, fact: &str) -> RuleError {
    RuleError::NeedsFact { rule: rule.to_string(), fact: fact.to_string() }
}

fn require_plain(c: &HyperellipticCurve, which: &str) -> Result<(), RuleError> {
    if !c.h.is_zero() {
        return Err(RuleError::InvalidInput(format!("{which} must be given as y^2 = f(x)")));
    }
    if c.genus() != 2 {
        return Err(RuleError::InvalidInput(format!("{which} must have genus 2")));
    }
    Ok(())
}

/// A point `(x, y)` with coordinates in `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticPoint {
    pub x: QuadNumber,
    pub y: QuadNumber,
}

impl QuadraticPoint {
    /// Does the point satisfy `y^2 + h(x) y = f(x)` in `Q(√d)`?
    pub fn lies_on(&self, c: &HyperellipticCurve, d: i64) -> bool {
        let lhs = self.y.mul(&self.y, d).add(&QuadNumber::eval(&c.h, &self.x, d).mul(&self.y, d));
        let rhs = QuadNumber::eval(&c.f, &self.x, d);
        lhs == rhs
    }
}

/// Inputs to the quadratic non-density check that cannot be computed here.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticAssertions {
    /// `K = Q(√field)`, the common quadratic field.
    pub field: i64,
    #[serde(default)]
    pub point_c: Option<QuadraticPoint>,
    #[serde(default)]
    pub point_d: Option<QuadraticPoint>,
    #[serde(default)]
    pub c_jacobian_rank_zero: Option<Fact<bool>>,
    #[serde(default)]
    pub d_jacobian_rank_zero: Option<Fact<bool>>,
}

const QUADRATIC_RULE: &str = "gg-quadratic-nondensity";

/// `2 ∉ δ(C×D/Q)` for `C: y^2 = f`, `D: y^2 = g` of genus 2 once
/// (i) `f ≡ -1 mod 3` on Z and in the leading coefficient,
/// (ii) `g ≡ 1 mod 3` likewise, (iii) `C(R) = D(R) = ∅`,
/// (iv) `C(K)` and `D(K)` are nonempty for one quadratic `K`, and
/// (v) both Jacobians have rank 0. The surface `z^2 = f(x1) g(x2)` is also
/// checked to have no `Q_3`-points.
pub fn nondensity_quadratic_certificate(
    c: &HyperellipticCurve,
    d: &HyperellipticCurve,
    asserted: &QuadraticAssertions,
) -> Result<CertificateReport, RuleError> {
    require_plain(c, "C")?;
    require_plain(d, "D")?;
    let point_c = asserted.point_c.as_ref().ok_or_else(|| needs(QUADRATIC_RULE, "point_c"))?;
    let point_d = asserted.point_d.as_ref().ok_or_else(|| needs(QUADRATIC_RULE, "point_d"))?;
    let rank_c = asserted.c_jacobian_rank_zero.as_ref().ok_or_else(|| needs(QUADRATIC_RULE, "c_jacobian_rank_zero"))?;
    let rank_d = asserted.d_jacobian_rank_zero.as_ref().ok_or_else(|| needs(QUADRATIC_RULE, "d_jacobian_rank_zero"))?;

    let k = asserted.field;
    let mut checks = vec![
        check("(i) f = -1 mod 3", mod3_condition(&c.f, -1).unwrap_or(false)),
        check("(ii) g = 1 mod 3", mod3_condition(&d.f, 1).unwrap_or(false)),
        check("(iii) C(R) empty", c.real_points_empty()),
        check("(iii) D(R) empty", d.real_points_empty()),
    ];
    let surface = surface_qp_empty_mod3(&c.f, &d.f);
    checks.push(match surface {
        Ok(b) => check("z^2 = f(x1) g(x2) has no Q_3-point", b),
        Err(e) => check_with("z^2 = f(x1) g(x2) has no Q_3-point", false, e.to_string()),
    });
    let field_ok = k != 1 && is_squarefree_int(k);
    checks.push(check_with("(iv) K is quadratic", field_ok, format!("K = Q(sqrt({k}))")));
    checks.push(check("(iv) point on C over K", field_ok && point_c.lies_on(c, k)));
    checks.push(check("(iv) point on D over K", field_ok && point_d.lies_on(d, k)));
    checks.push(check("(v) Pic0(C) has rank 0", rank_c.value));
    checks.push(check("(v) Pic0(D) has rank 0", rank_d.value));
    Ok(CertificateReport::from_checks(checks))
}

/// Inputs to the cubic non-density check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicAssertions {
    /// `p1` with `φ = y / p1` the degree-3 map on `C`; `p1 | f_C`.
    pub c_pole_cubic: Poly,
    /// `q` with `ψ = y - q` the degree-3 map on `D`.
    pub d_section_cubic: Poly,
    /// Both curves have exactly one degree-3 map to the line (from their
    /// Mordell–Weil groups).
    #[serde(default)]
    pub unique_cubic_maps: Option<Fact<bool>>,
}

const CUBIC_RULE: &str = "gg-cubic-nondensity";

fn t() -> Poly {
    Poly::x()
}

/// Discriminants in `x` of the fibers of `φ` over `t` on `C` and of `ψ` over
/// `t` on `D`, as polynomials in `t`.
pub fn cubic_fiber_discriminants(
    c: &HyperellipticCurve,
    d: &HyperellipticCurve,
    p1: &Poly,
    q: &Poly,
) -> Result<(Poly, Poly), RuleError> {
    let (c_fiber, d_fiber) = cubic_fibers(c, d, p1, q)?;
    Ok((c_fiber.discriminant_x()?, d_fiber.discriminant_x()?))
}

/// `t^2 p1(x) - f_C(x)/p1(x)` and `(q(x) + t)^2 - f_D(x)`.
fn cubic_fibers(
    c: &HyperellipticCurve,
    d: &HyperellipticCurve,
    p1: &Poly,
    q: &Poly,
) -> Result<(ParamPoly, ParamPoly), RuleError> {
    if p1.degree() != Some(3) || q.degree() != Some(3) {
        return Err(RuleError::InvalidInput("both maps need cubic data".into()));
    }
    let (cofactor, rem) = c.f.div_rem(p1)?;
    if !rem.is_zero() {
        return Err(RuleError::InvalidInput("p1 does not divide f_C".into()));
    }
    let t2 = &t() * &t();
    let c_fiber = ParamPoly::from_product(&t2, p1).add(&ParamPoly::from_product(&Poly::constant(rat(-1)), &cofactor));
    let qq = &(q * q) - &d.f;
    let two_t = t().scale(&rat(2));
    let d_fiber = ParamPoly::from_product(&two_t, q)
        .add(&ParamPoly::from_product(&Poly::constant(rat(1)), &qq))
        .add(&ParamPoly::from_product(&t2, &Poly::constant(rat(1))));
    Ok((c_fiber, d_fiber))
}

/// `3 ∉ δ(C×D/Q)`: every fiber of `φ` is totally real (its discriminant is
/// positive for all real `t`, and so is the fiber at infinity), every fiber
/// of `ψ` has a single real point (discriminant `<= 0`, vanishing only at
/// `t = 0`), `D(Q)` is nonempty and the degree-3 maps are unique.
pub fn nondensity_cubic_certificate(
    c: &HyperellipticCurve,
    d: &HyperellipticCurve,
    asserted: &CubicAssertions,
) -> Result<CertificateReport, RuleError> {
    require_plain(c, "C")?;
    require_plain(d, "D")?;
    let unique = asserted.unique_cubic_maps.as_ref().ok_or_else(|| needs(CUBIC_RULE, "unique_cubic_maps"))?;
    let (c_fiber, d_fiber) = cubic_fibers(c, d, &asserted.c_pole_cubic, &asserted.d_section_cubic)?;
    let mut checks = Vec::new();
    checks.push(check("fibers of phi are cubics", c_fiber.degree_x() == Some(3)));
    checks.push(check("fibers of psi are cubics", d_fiber.degree_x() == Some(3)));
    let dc = c_fiber.discriminant_x()?;
    let dd = d_fiber.discriminant_x()?;
    checks.push(check_with("disc of phi-fiber > 0 on R", dc.is_globally_positive(), format!("{dc}")));
    let inf = asserted.c_pole_cubic.discriminant()?;
    checks.push(check_with(
        "fiber of phi at infinity totally real",
        inf > Rat::from_integer(0.into()),
        format!("{inf}"),
    ));
    checks.push(check_with(
        "disc of psi-fiber <= 0 with zeros only at t = 0",
        dd.is_nonpositive_with_zeros(&[Rat::from_integer(0.into())]),
        format!("{dd}"),
    ));
    checks.push(check("D(Q) nonempty", d.has_rational_point_at_infinity() || !d.rational_weierstrass_x().is_empty()));
    checks.push(check("degree-3 maps are unique", unique.value));
    Ok(CertificateReport::from_checks(checks))
}

/// Inputs to the conditional cubic-point statement for `E × C`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityCubicAssertions {
    /// A degree-3 rational map `C → P^1` over Z, defined at the bad primes of
    /// `E`, with a real fiber that is not totally split.
    #[serde(default)]
    pub degree3_map: Option<Fact<bool>>,
}

const PARITY_CUBIC_RULE: &str = "ec-cubic-parity";

/// Hypotheses for `3 ∈ δ(E×C/Q)` under the parity conjecture: `E` has only
/// split multiplicative bad reduction, `C` has good reduction at those
/// primes with `#C(F_p) < p + 1` or `#C(F_p) >= p + 10`, and the asserted
/// degree-3 map exists.
pub fn parity_cubic_hypotheses(
    e: &EllipticCurve,
    c: &HyperellipticCurve,
    asserted: &ParityCubicAssertions,
) -> Result<CertificateReport, RuleError> {
    let map = asserted.degree3_map.as_ref().ok_or_else(|| needs(PARITY_CUBIC_RULE, "degree3_map"))?;
    if c.genus() != 2 {
        return Err(RuleError::InvalidInput("C must have genus 2".into()));
    }
    let primes = bad_primes(e).map_err(|err| RuleError::InvalidInput(err.to_string()))?;
    let mut checks = Vec::new();
    for &p in &primes {
        let kind = reduction_type(e, p).kind;
        checks.push(check_with(
            &format!("E split multiplicative at {p}"),
            kind == ReductionType::SplitMultiplicative,
            format!("{kind:?}"),
        ));
        match c.count_points_mod_p(p) {
            Ok(n) => {
                let ok = n < p + 1 || n >= p + 10;
                checks.push(check_with(
                    &format!("#C(F_{p}) < {} or >= {}", p + 1, p + 10),
                    ok,
                    format!("#C(F_{p}) = {n}"),
                ));
            }
            Err(err) => checks.push(check_with(&format!("C good at {p}"), false, err.to_string())),
        }
    }
    checks.push(check("degree-3 map with a non-split real fiber", map.value));
    Ok(CertificateReport::from_checks(checks))
}
