//! Hyperelliptic curves `y^2 + h(x) y = f(x)` and elliptic curves in long
//! Weierstrass form.
//!
//! Everything numeric goes through the completed-square model
//! `y^2 = F(x) = 4f + h^2`, which is isomorphic away from 2.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::polyarith::{self, rat, rat_mod, Poly, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("model is singular: 4f + h^2 is not squarefree")]
    Singular,
    #[error("model has genus 0: 4f + h^2 must have degree at least 3")]
    GenusZero,
    #[error("prime {0} is bad for this model")]
    BadPrime(u64),
    #[error("point counting needs an odd prime, got {0}")]
    EvenPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial must have integer coefficients")]
    NonIntegral,
    #[error("elliptic curve has zero discriminant")]
    SingularElliptic,
    #[error("expected 5 a-invariants, got {0}")]
    BadAinvs(usize),
}

/// `y^2 + h(x) y = f(x)` over Q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHyper")]
pub struct HyperellipticCurve {
    pub f: Poly,
    #[serde(default, skip_serializing_if = "Poly::is_zero")]
    pub h: Poly,
}

#[derive(Deserialize)]
struct RawHyper {
    f: Poly,
    #[serde(default)]
    h: Poly,
}

impl TryFrom<RawHyper> for HyperellipticCurve {
    type Error = CurveError;
    fn try_from(r: RawHyper) -> Result<Self, CurveError> {
        HyperellipticCurve::new(r.f, r.h)
    }
}

impl HyperellipticCurve {
    pub fn new(f: Poly, h: Poly) -> Result<Self, CurveError> {
        let c = HyperellipticCurve { f, h };
        let big_f = c.model_poly();
        if big_f.degree().unwrap_or(0) < 3 {
            return Err(CurveError::GenusZero);
        }
        if !big_f.is_squarefree() {
            return Err(CurveError::Singular);
        }
        Ok(c)
    }

    /// `y^2 = f(x)`.
    pub fn simple(f: Poly) -> Result<Self, CurveError> {
        Self::new(f, Poly::zero())
    }

    /// `F = 4f + h^2`.
    pub fn model_poly(&self) -> Poly {
        &self.f.scale(&rat(4)) + &(&self.h * &self.h)
    }

    /// `F` scaled by a square so all coefficients are integers.
    pub fn integral_model(&self) -> Vec<BigInt> {
        let f = self.model_poly();
        let l = f.denominator_lcm();
        let s = Rat::from_integer(&l * &l);
        f.scale(&s).integer_coeffs().expect("cleared denominators")
    }

    pub fn genus(&self) -> u32 {
        genus_of_degree(self.model_poly().degree().unwrap_or(0))
    }

    pub fn discriminant(&self) -> Rat {
        self.model_poly().discriminant().expect("nonzero model")
    }

    /// Odd `p` not dividing the leading coefficient or discriminant of the
    /// integral model.
    pub fn is_good_prime(&self, p: u64) -> bool {
        if p == 2 {
            return false;
        }
        let ints = self.integral_model();
        let pb = BigInt::from(p);
        let lc = ints.last().expect("nonzero");
        let disc =
            Poly::new(ints.iter().map(|c| Rat::from_integer(c.clone())).collect()).discriminant().expect("nonzero");
        !(lc % &pb).is_zero() && !(disc.numer() % &pb).is_zero()
    }

    /// Number of points on the smooth projective model over `F_p`.
    pub fn count_points_mod_p(&self, p: u64) -> Result<u64, CurveError> {
        if p == 2 {
            return Err(CurveError::EvenPrime(p));
        }
        if !crate::setalg::is_prime(p) {
            return Err(CurveError::NotPrime(p));
        }
        if !self.is_good_prime(p) {
            return Err(CurveError::BadPrime(p));
        }
        let f = Poly::new(self.integral_model().into_iter().map(Rat::from_integer).collect());
        let mut is_sq = vec![false; p as usize];
        for y in 1..p {
            is_sq[((y * y) % p) as usize] = true;
        }
        let mut n = 0u64;
        for x in 0..p {
            let v = f.eval_mod(x, p).expect("integral");
            n += if v == 0 {
                1
            } else if is_sq[v as usize] {
                2
            } else {
                0
            };
        }
        let deg = f.degree().expect("nonzero");
        n += if deg % 2 == 1 {
            1
        } else if is_sq[rat_mod(&f.lc(), p).expect("integral") as usize] {
            2
        } else {
            0
        };
        Ok(n)
    }

    /// Counts at every good odd prime up to `bound`.
    pub fn point_counts(&self, bound: u64, exec: Exec) -> Vec<(u64, u64)> {
        let primes: Vec<u64> = (3..=bound).filter(|&p| crate::setalg::is_prime(p) && self.is_good_prime(p)).collect();
        exec.map(&primes, |&p| (p, self.count_points_mod_p(p).expect("good prime")))
    }

    /// True iff `C(R)` is empty: `F` has even degree, negative leading
    /// coefficient and no real root.
    pub fn real_points_empty(&self) -> bool {
        let f = self.model_poly();
        if f.degree().unwrap_or(0) % 2 == 1 {
            return false;
        }
        f.lc().is_negative() && f.count_all_real_roots() == Ok(0)
    }

    /// Rational points at infinity exist on the smooth model.
    pub fn has_rational_point_at_infinity(&self) -> bool {
        let f = self.model_poly();
        f.degree().unwrap_or(0) % 2 == 1 || is_rational_square(&f.lc())
    }

    /// Rational roots of `F`, i.e. affine rational Weierstrass points.
    pub fn rational_weierstrass_x(&self) -> Vec<Rat> {
        let ints = self.integral_model();
        rational_roots(&ints)
    }

    /// Rational roots of `F`, plus the point at infinity when `F` has odd
    /// degree.
    pub fn rational_weierstrass_count(&self) -> u64 {
        let odd = self.model_poly().degree().unwrap_or(0) % 2 == 1;
        self.rational_weierstrass_x().len() as u64 + u64::from(odd)
    }

    /// A rational point off the ramification locus: `Some(None)` for a point
    /// at infinity, `Some(Some(x))` for an affine one with `|num x|, den x
    /// <= bound`.
    pub fn non_weierstrass_point(&self, bound: i64) -> Option<Option<Rat>> {
        let f = self.model_poly();
        if f.degree().unwrap_or(0).is_multiple_of(2) && is_rational_square(&f.lc()) {
            return Some(None);
        }
        for den in 1..=bound {
            for num in -bound..=bound {
                if num.gcd(&den) != 1 {
                    continue;
                }
                let x = Rat::new(num.into(), den.into());
                let v = f.eval(&x);
                if !v.is_zero() && is_rational_square(&v) {
                    return Some(Some(x));
                }
            }
        }
        None
    }

    /// A rational Weierstrass point exists (a rational root of `F`, or the
    /// point at infinity when `F` has odd degree).
    pub fn has_rational_weierstrass_point(&self) -> bool {
        self.model_poly().degree().unwrap_or(0) % 2 == 1 || !self.rational_weierstrass_x().is_empty()
    }
}

/// `⌊(deg F - 1) / 2⌋`.
pub fn genus_of_degree(deg: usize) -> u32 {
    (deg.saturating_sub(1) / 2) as u32
}

/// Integer bounds `(p + 1 - ⌈2g√p⌉, p + 1 + ⌊2g√p⌋)` for the point count of
/// a genus-`g` curve over `F_p`.
pub fn weil_interval(g: u32, p: u64) -> (i64, i64) {
    let sq = 4 * (g as u128) * (g as u128) * p as u128;
    let fl = polyarith::isqrt(sq);
    let ce = if fl * fl == sq { fl } else { fl + 1 };
    let base = p as i64 + 1;
    (base - ce as i64, base + fl as i64)
}

/// `f(0), f(1), f(2)` and the leading coefficient are all `target mod 3`.
pub fn mod3_condition(f: &Poly, target: i64) -> Result<bool, CurveError> {
    if f.integer_coeffs().is_none() {
        return Err(CurveError::NonIntegral);
    }
    let t = target.rem_euclid(3) as u64;
    let values = [0u64, 1, 2].map(|x| f.eval_mod(x, 3).expect("integral"));
    let lc = rat_mod(&f.lc(), 3).expect("integral");
    Ok(values.iter().all(|&v| v == t) && lc == t)
}

pub fn is_rational_square(q: &Rat) -> bool {
    if q.is_negative() {
        return false;
    }
    let is_sq = |n: &BigInt| {
        let r = n.sqrt();
        &r * &r == *n
    };
    is_sq(q.numer()) && is_sq(q.denom())
}

fn divisors_big(n: &BigInt) -> Vec<BigInt> {
    let mut ds = vec![BigInt::one()];
    for (p, e) in polyarith::factor_integer(n) {
        let mut next = Vec::new();
        for d in &ds {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        ds = next;
    }
    ds
}

/// Rational roots of an integer polynomial by the rational root theorem.
pub fn rational_roots(c: &[BigInt]) -> Vec<Rat> {
    let poly = Poly::new(c.iter().cloned().map(Rat::from_integer).collect());
    let mut roots = Vec::new();
    let Some(start) = c.iter().position(|x| !x.is_zero()) else {
        return roots;
    };
    if start > 0 {
        roots.push(Rat::zero());
    }
    let (a0, an) = (&c[start], c.last().expect("nonzero"));
    for num in divisors_big(a0) {
        for den in divisors_big(an) {
            for s in [1, -1] {
                let r = Rat::new(&num * BigInt::from(s), den.clone());
                if !roots.contains(&r) && poly.eval(&r).is_zero() {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

// ---------------------------------------------------------------------------

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAinvs", into = "RawAinvs")]
pub struct EllipticCurve {
    pub a1: Rat,
    pub a2: Rat,
    pub a3: Rat,
    pub a4: Rat,
    pub a6: Rat,
}

/// One a-invariant: a JSON integer when integral, otherwise a rational string.
#[derive(Clone)]
struct AinvJson(Rat);

impl Serialize for AinvJson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.is_integer().then(|| self.0.to_integer().to_i64()).flatten() {
            Some(n) => n.serialize(s),
            None => polyarith::rat_string::serialize(&self.0, s),
        }
    }
}

impl<'de> Deserialize<'de> for AinvJson {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        polyarith::rat_string::deserialize(d).map(AinvJson)
    }
}

#[derive(Serialize, Deserialize)]
struct RawAinvs {
    ainvs: Vec<AinvJson>,
}

impl TryFrom<RawAinvs> for EllipticCurve {
    type Error = CurveError;
    fn try_from(r: RawAinvs) -> Result<Self, CurveError> {
        if r.ainvs.len() != 5 {
            return Err(CurveError::BadAinvs(r.ainvs.len()));
        }
        let a: Vec<Rat> = r.ainvs.into_iter().map(|a| a.0).collect();
        EllipticCurve::new([a[0].clone(), a[1].clone(), a[2].clone(), a[3].clone(), a[4].clone()])
    }
}

impl From<EllipticCurve> for RawAinvs {
    fn from(e: EllipticCurve) -> Self {
        RawAinvs { ainvs: e.ainvs().into_iter().map(AinvJson).collect() }
    }
}

impl EllipticCurve {
    pub fn new(a: [Rat; 5]) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = a;
        let e = EllipticCurve { a1, a2, a3, a4, a6 };
        if e.discriminant().is_zero() {
            return Err(CurveError::SingularElliptic);
        }
        Ok(e)
    }

    pub fn from_ints(a: [i64; 5]) -> Result<Self, CurveError> {
        Self::new(a.map(rat))
    }

    pub fn ainvs(&self) -> [Rat; 5] {
        [self.a1.clone(), self.a2.clone(), self.a3.clone(), self.a4.clone(), self.a6.clone()]
    }

    pub fn b2(&self) -> Rat {
        &self.a1 * &self.a1 + rat(4) * &self.a2
    }
    pub fn b4(&self) -> Rat {
        rat(2) * &self.a4 + &self.a1 * &self.a3
    }
    pub fn b6(&self) -> Rat {
        &self.a3 * &self.a3 + rat(4) * &self.a6
    }
    pub fn b8(&self) -> Rat {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        a1 * a1 * a6 + rat(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }
    pub fn c4(&self) -> Rat {
        let b2 = self.b2();
        &b2 * &b2 - rat(24) * self.b4()
    }
    pub fn c6(&self) -> Rat {
        let b2 = self.b2();
        -(&b2 * &b2 * &b2) + rat(36) * &b2 * self.b4() - rat(216) * self.b6()
    }
    pub fn discriminant(&self) -> Rat {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -(&b2 * &b2 * &b8) - rat(8) * &b4 * &b4 * &b4 - rat(27) * &b6 * &b6 + rat(9) * &b2 * &b4 * &b6
    }
    pub fn j_invariant(&self) -> Rat {
        let c4 = self.c4();
        &c4 * &c4 * &c4 / self.discriminant()
    }

    pub fn to_hyperelliptic(&self) -> HyperellipticCurve {
        let f = Poly::new(vec![self.a6.clone(), self.a4.clone(), self.a2.clone(), Rat::one()]);
        let h = Poly::new(vec![self.a3.clone(), self.a1.clone()]);
        HyperellipticCurve::new(f, h).expect("nonsingular elliptic curve")
    }

    /// `#E(F_p)` for an odd prime of good reduction of this model.
    pub fn count_points_mod_p(&self, p: u64) -> Result<u64, CurveError> {
        self.to_hyperelliptic().count_points_mod_p(p)
    }

    /// `a_p = p + 1 - #E(F_p)`.
    pub fn ap(&self, p: u64) -> Result<i64, CurveError> {
        Ok(p as i64 + 1 - self.count_points_mod_p(p)? as i64)
    }

    /// Full rational 2-torsion: the 2-division cubic splits over Q.
    pub fn has_full_two_torsion(&self) -> bool {
        let f = self.to_hyperelliptic().model_poly();
        let l = f.denominator_lcm();
        let ints = f.scale(&Rat::from_integer(l)).integer_coeffs().expect("cleared");
        rational_roots(&ints).len() == 3
    }
}
