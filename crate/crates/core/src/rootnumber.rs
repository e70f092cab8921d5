//! Reduction types and semistable root numbers of elliptic curves over `Q`
//! and quadratic fields, plus the twist search used for parity arguments.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvemodel::{CurveError, EllipticCurve};
use crate::exec::Exec;
use crate::polyarith::{factor_integer, is_squarefree_int, kronecker, legendre, valuation, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootNumberError {
    #[error("not semistable: additive reduction at {0}")]
    NotSemistable(u64),
    #[error("bad prime {p} does not split in Q(sqrt({d}))")]
    NotSplit { p: u64, d: i64 },
    #[error("{0} is not squarefree or is 0/1")]
    BadDiscriminant(i64),
    #[error("no twist with |d| <= {0}")]
    SearchExhausted(u64),
    #[error("bad prime {0} too large to factor")]
    Factorization(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionData {
    pub p: u64,
    #[serde(rename = "type")]
    pub kind: ReductionType,
    pub v_disc: u32,
    /// `None` when `c4 = 0`.
    pub v_c4: Option<u32>,
}

/// Integral `a`-invariants, as integers.
type Ainvs = [BigInt; 5];

fn integral_ainvs(e: &EllipticCurve) -> Ainvs {
    let a = e.ainvs();
    let l = a.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    // scaling x, y by l^2, l^3 multiplies a_i by l^i
    let weights = [1u32, 2, 3, 4, 6];
    let mut out: Ainvs = Default::default();
    for i in 0..5 {
        let v = &a[i] * Rat::from_integer(l.pow(weights[i]));
        out[i] = v.to_integer();
    }
    out
}

fn curve_of(a: &Ainvs) -> EllipticCurve {
    EllipticCurve::new(a.clone().map(Rat::from_integer)).expect("nonsingular")
}

fn vp(n: &BigInt, p: u64) -> Option<u32> {
    valuation(n, p)
}

/// One step `u = p` of the Weierstrass change of variables if some
/// `r mod p^2`, `s mod p`, `t mod p^3` makes the new model integral.
fn reduce_once(a: &Ainvs, p: u64) -> Option<Ainvs> {
    let pb = BigInt::from(p);
    let [a1, a2, a3, a4, a6] = a;
    let u = [pb.clone(), pb.pow(2), pb.pow(3), pb.pow(4), pb.pow(6)];
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    for s in 0..p {
        let s = BigInt::from(s);
        let n1 = a1 + &two * &s;
        if !(&n1 % &u[0]).is_zero() {
            continue;
        }
        for r in 0..p * p {
            let r = BigInt::from(r);
            let n2 = a2 - &s * a1 + &three * &r - &s * &s;
            if !(&n2 % &u[1]).is_zero() {
                continue;
            }
            for t in 0..p.pow(3) {
                let t = BigInt::from(t);
                let n3 = a3 + &r * a1 + &two * &t;
                if !(&n3 % &u[2]).is_zero() {
                    continue;
                }
                let n4 = a4 - &s * a3 + &two * &r * a2 - (&t + &r * &s) * a1 + &three * &r * &r - &two * &s * &t;
                if !(&n4 % &u[3]).is_zero() {
                    continue;
                }
                let n6 = a6 + &r * a4 + &r * &r * a2 + &r * &r * &r - &t * a3 - &t * &t - &r * &t * a1;
                if !(&n6 % &u[4]).is_zero() {
                    continue;
                }
                return Some([&n1 / &u[0], &n2 / &u[1], &n3 / &u[2], &n4 / &u[3], &n6 / &u[4]]);
            }
        }
    }
    None
}

/// `(v(Δ), v(c4), c6)` on a model minimal at `p`.
fn minimal_invariants(e: &EllipticCurve, p: u64) -> (u32, Option<u32>, BigInt) {
    let mut a = integral_ainvs(e);
    if p >= 5 {
        let c = curve_of(&a);
        let (c4, c6, d) = (c.c4().to_integer(), c.c6().to_integer(), c.discriminant().to_integer());
        let vd = vp(&d, p).unwrap_or(0);
        let v4 = vp(&c4, p);
        let v6 = vp(&c6, p);
        let k = [Some(vd / 12), v4.map(|v| v / 4), v6.map(|v| v / 6)].into_iter().flatten().min().unwrap_or(0);
        let pk = BigInt::from(p).pow(k);
        return (vd - 12 * k, v4.map(|v| v - 4 * k), c6 / pk.pow(6));
    }
    loop {
        let c = curve_of(&a);
        let vd = vp(&c.discriminant().to_integer(), p).unwrap_or(0);
        if vd >= 12 {
            if let Some(next) = reduce_once(&a, p) {
                a = next;
                continue;
            }
        }
        return (vd, vp(&c.c4().to_integer(), p), c.c6().to_integer());
    }
}

/// Is a nonzero integer a square in `Q_p`?
pub fn is_square_qp(n: &BigInt, p: u64) -> bool {
    if n.is_zero() {
        return true;
    }
    let v = vp(n, p).unwrap_or(0);
    if v % 2 == 1 {
        return false;
    }
    let unit = n / BigInt::from(p).pow(v);
    if p == 2 {
        unit.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        let r = unit.mod_floor(&BigInt::from(p)).to_u64().expect("small");
        legendre(r, p) == 1
    }
}

/// Is `a ∈ Q_p` a square in `Q_p(√d)`? True iff `a` or `a·d` is a square in
/// `Q_p` (or `d` itself is a square there).
pub fn is_square_in_quadratic(a: &BigInt, d: i64, p: u64) -> bool {
    let db = BigInt::from(d);
    is_square_qp(&db, p) || is_square_qp(a, p) || is_square_qp(&(a * &db), p)
}

pub fn reduction_type(e: &EllipticCurve, p: u64) -> ReductionData {
    let (v_disc, v_c4, c6) = minimal_invariants(e, p);
    let kind = if v_disc == 0 {
        ReductionType::Good
    } else if v_c4 == Some(0) {
        if is_square_qp(&-c6, p) {
            ReductionType::SplitMultiplicative
        } else {
            ReductionType::NonsplitMultiplicative
        }
    } else {
        ReductionType::Additive
    };
    ReductionData { p, kind, v_disc, v_c4 }
}

/// Primes of bad reduction, from the minimal discriminant.
pub fn bad_primes(e: &EllipticCurve) -> Result<Vec<u64>, RootNumberError> {
    let d = curve_of(&integral_ainvs(e)).discriminant().to_integer();
    let mut out = Vec::new();
    for (p, _) in factor_integer(&d.abs()) {
        let p = p.to_u64().ok_or_else(|| RootNumberError::Factorization(p.to_string()))?;
        if reduction_type(e, p).kind != ReductionType::Good {
            out.push(p);
        }
    }
    Ok(out)
}

/// How `p` behaves in `Q(√d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

pub fn splitting(d: i64, p: u64) -> Splitting {
    if p == 2 {
        match d.rem_euclid(8) {
            1 => Splitting::Split,
            5 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    } else {
        match kronecker(d, p as i64) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }
}

fn check_quadratic(d: i64) -> Result<(), RootNumberError> {
    if d == 0 || d == 1 || !is_squarefree_int(d) {
        return Err(RootNumberError::BadDiscriminant(d));
    }
    Ok(())
}

/// Base field of a root-number computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseField {
    Rationals,
    Quadratic(i64),
}

/// `(-1)^(m + u)`: `m` split multiplicative places, `u` archimedean places.
pub fn root_number_semistable(e: &EllipticCurve, field: BaseField) -> Result<i32, RootNumberError> {
    let mut m = 0u32;
    for p in bad_primes(e)? {
        let red = reduction_type(e, p);
        if red.kind == ReductionType::Additive {
            return Err(RootNumberError::NotSemistable(p));
        }
        m += match field {
            BaseField::Rationals => (red.kind == ReductionType::SplitMultiplicative) as u32,
            BaseField::Quadratic(d) => {
                let (_, _, c6) = minimal_invariants(e, p);
                match splitting(d, p) {
                    Splitting::Split => 2 * (red.kind == ReductionType::SplitMultiplicative) as u32,
                    _ => is_square_in_quadratic(&-c6, d, p) as u32,
                }
            }
        };
    }
    let u = match field {
        BaseField::Rationals => 1,
        BaseField::Quadratic(d) => {
            check_quadratic(d)?;
            if d < 0 {
                1
            } else {
                2
            }
        }
    };
    Ok(if (m + u).is_multiple_of(2) { 1 } else { -1 })
}

/// Root number over `Q(√d)` when every bad prime splits: the two places
/// above each bad prime contribute equal factors, leaving `(-1)^(u_L)`.
pub fn splitting_quadratic_root_number(e: &EllipticCurve, d: i64) -> Result<i32, RootNumberError> {
    check_quadratic(d)?;
    for p in bad_primes(e)? {
        if splitting(d, p) != Splitting::Split {
            return Err(RootNumberError::NotSplit { p, d });
        }
    }
    Ok(if d < 0 { -1 } else { 1 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityTwist {
    pub d: i64,
    pub splitting: Vec<(u64, Splitting)>,
    pub root_numbers: [i32; 2],
    pub assumption: String,
}

pub const DEFAULT_TWIST_BOUND: u64 = 10_000;

/// Smallest `|d|` with `d < 0` squarefree and every bad prime of both
/// curves split in `Q(√d)`.
pub fn find_parity_twist(
    e1: &EllipticCurve,
    e2: &EllipticCurve,
    bound: u64,
    exec: Exec,
) -> Result<ParityTwist, RootNumberError> {
    let primes: BTreeSet<u64> = bad_primes(e1)?.into_iter().chain(bad_primes(e2)?).collect();
    let candidates: Vec<i64> = (1..=bound as i64).map(|k| -k).collect();
    let ok =
        |d: &i64| (is_squarefree_int(*d) && primes.iter().all(|&p| splitting(*d, p) == Splitting::Split)).then_some(*d);
    let d = exec.find_first(&candidates, ok).ok_or(RootNumberError::SearchExhausted(bound))?;
    Ok(ParityTwist {
        d,
        splitting: primes.iter().map(|&p| (p, splitting(d, p))).collect(),
        root_numbers: [splitting_quadratic_root_number(e1, d)?, splitting_quadratic_root_number(e2, d)?],
        assumption: "ParityConjecture".into(),
    })
}

/// `p - a_p^2 > 0`, its prime factors all `≡ 1 (mod 3)`, and `p` of order 3
/// in `(Z/7)^× / {±1}`.
pub fn nonpp_prime_check(e: &EllipticCurve, p: u64) -> bool {
    if p.is_multiple_of(7) || p == 2 || reduction_type(e, p).kind != ReductionType::Good {
        return false;
    }
    let Ok(ap) = e.ap(p) else { return false };
    let n = p as i64 - ap * ap;
    if n <= 0 {
        return false;
    }
    let factors_ok = crate::polyarith::factor_u64(n as u64).iter().all(|&(q, _)| q % 3 == 1);
    factors_ok && order_mod7_pm(p) == 3
}

fn order_mod7_pm(p: u64) -> u32 {
    let r = p % 7;
    let mut x = r;
    for k in 1..=3 {
        if x == 1 || x == 6 {
            return k;
        }
        x = x * r % 7;
    }
    unreachable!("(Z/7)^×/±1 has order 3")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11() -> EllipticCurve {
        EllipticCurve::from_ints([0, -1, 1, 0, 0]).unwrap()
    }
    fn e1() -> EllipticCurve {
        EllipticCurve::from_ints([0, 0, 0, 484, 0]).unwrap()
    }
    fn e2() -> EllipticCurve {
        EllipticCurve::from_ints([0, 0, 0, -92, 0]).unwrap()
    }

    #[test]
    fn reduction_of_11a3() {
        let r = reduction_type(&e11(), 11);
        assert_eq!(r.kind, ReductionType::SplitMultiplicative);
        assert_eq!((r.v_disc, r.v_c4), (1, Some(0)));
        assert_eq!(reduction_type(&e11(), 5).kind, ReductionType::Good);
        assert_eq!(bad_primes(&e11()).unwrap(), vec![11]);
    }

    #[test]
    fn additive_and_conductor_supports() {
        assert_eq!(reduction_type(&e1(), 11).kind, ReductionType::Additive);
        assert_eq!(bad_primes(&e1()).unwrap(), vec![2, 11]);
        assert_eq!(bad_primes(&e2()).unwrap(), vec![2, 23]);
    }

    #[test]
    fn minimal_model_search_at_two() {
        // 11a3 with x, y scaled by 4, 8: a_i multiplied by 2^i
        let e = EllipticCurve::from_ints([0, -4, 8, 0, 0]).unwrap();
        assert_eq!(e.discriminant(), e11().discriminant() * Rat::from_integer(BigInt::from(2).pow(12)));
        assert_eq!(reduction_type(&e, 2).kind, ReductionType::Good);
    }

    #[test]
    fn root_numbers() {
        assert_eq!(root_number_semistable(&e11(), BaseField::Rationals), Ok(1));
        assert_eq!(splitting_quadratic_root_number(&e1(), -7), Ok(-1));
        assert_eq!(splitting_quadratic_root_number(&e2(), -7), Ok(-1));
        assert!(matches!(root_number_semistable(&e1(), BaseField::Rationals), Err(RootNumberError::NotSemistable(_))));
        // 11 splits in Q(sqrt(5))? (5|11) = 1, so d = 5 pairs the places
        assert_eq!(splitting_quadratic_root_number(&e11(), 5), Ok(1));
        assert_eq!(root_number_semistable(&e11(), BaseField::Quadratic(5)), Ok(1));
        // over Q(sqrt(-1)) 11 is inert; -c6 = 152 square mod 11 stays split
        assert_eq!(root_number_semistable(&e11(), BaseField::Quadratic(-1)), Ok(1));
    }

    #[test]
    fn parity_twist() {
        let t = find_parity_twist(&e1(), &e2(), DEFAULT_TWIST_BOUND, Exec::Sequential).unwrap();
        assert_eq!(t.d, -7);
        assert_eq!(t.root_numbers, [-1, -1]);
        let t = find_parity_twist(&e11(), &e11(), DEFAULT_TWIST_BOUND, Exec::Parallel).unwrap();
        assert_eq!(t.d, -2);
        assert!(find_parity_twist(&e1(), &e2(), 5, Exec::Sequential).is_err());
    }

    #[test]
    fn nonpp_primes() {
        assert!(nonpp_prime_check(&e11(), 17));
        assert!(!nonpp_prime_check(&e11(), 5));
        assert!(!nonpp_prime_check(&e11(), 7));
        assert!(!nonpp_prime_check(&e11(), 11));
    }
}
