//! Exact univariate polynomials over Q, resultants, discriminants, Sturm
//! sequences and the integer helpers the rest of the crate leans on.
//!
//! Coefficients are stored in ascending order with trailing zeros stripped,
//! so the zero polynomial is the empty vector.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse rational number {0:?}")]
    Parse(String),
    #[error("zero polynomial has no {0}")]
    ZeroPolynomial(&'static str),
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Parse `"7"`, `"-3/4"` or a decimal like `"0.25"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, PolyError> {
    let t = s.trim();
    let bad = || PolyError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| bad())? };
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(fp.len() as u32);
        let v = Rat::new(whole * &den + frac, den);
        return Ok(if neg { -v } else { v });
    }
    Ok(Rat::from_integer(t.parse().map_err(|_| bad())?))
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Rings with exact division, so one determinant routine serves Q and Q[t].

pub trait ExactRing: Clone + PartialEq {
    fn zero_el() -> Self;
    fn one_el() -> Self;
    fn is_zero_el(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn times_int(&self, k: i64) -> Self;
    /// `self / o`, where the caller guarantees the quotient is exact.
    fn div_exact(&self, o: &Self) -> Self;
}

impl ExactRing for Rat {
    fn zero_el() -> Self {
        Zero::zero()
    }
    fn one_el() -> Self {
        One::one()
    }
    fn is_zero_el(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn times_int(&self, k: i64) -> Self {
        self * rat(k)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
}

/// Fraction-free Gaussian elimination (Bareiss). All intermediate divisions
/// are exact in an integral domain.
pub fn determinant<T: ExactRing>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    if n == 0 {
        return T::one_el();
    }
    let mut negate = false;
    let mut prev = T::one_el();
    for k in 0..n - 1 {
        if m[k][k].is_zero_el() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero_el()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return T::zero_el(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].times(&m[k][k]).minus(&m[i][k].times(&m[k][j]));
                m[i][j] = v.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        T::zero_el().minus(&d)
    } else {
        d
    }
}

/// Resultant of two polynomials given by trimmed ascending coefficients.
pub fn resultant_of<T: ExactRing>(p: &[T], q: &[T]) -> T {
    if p.is_empty() || q.is_empty() {
        return T::zero_el();
    }
    let (m, n) = (p.len() - 1, q.len() - 1);
    let size = m + n;
    if size == 0 {
        return T::one_el();
    }
    let mut rows = Vec::with_capacity(size);
    for shift in 0..n {
        let mut row = vec![T::zero_el(); size];
        for (i, c) in p.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![T::zero_el(); size];
        for (i, c) in q.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    determinant(rows)
}

/// `disc(p) = (-1)^(n(n-1)/2) · Res(p, p') / lc(p)` for `n = deg p >= 1`.
/// With this convention `disc(x^2 + bx + c) = b^2 - 4c`.
pub fn discriminant_of<T: ExactRing>(p: &[T]) -> T {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return T::zero_el();
    }
    let dp: Vec<T> = p.iter().enumerate().skip(1).map(|(i, c)| c.times_int(i as i64)).collect();
    let r = resultant_of(p, &dp).div_exact(&p[n]);
    if (n * (n - 1) / 2) % 2 == 1 {
        T::zero_el().minus(&r)
    } else {
        r
    }
}

// ---------------------------------------------------------------------------

/// Polynomial over Q with ascending coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        Poly::new(cs.iter().map(|&c| rat(c)).collect())
    }

    pub fn parse(cs: &[&str]) -> Result<Self, PolyError> {
        Ok(Poly::new(cs.iter().map(|s| parse_rat(s)).collect::<Result<_, _>>()?))
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly::from_ints(&[0, 1])
    }

    /// `c · x^k`.
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rat::one() / self.lc()))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect())
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(Rat::one()), |acc, _| &acc * self)
    }

    /// `self(g(x))`.
    pub fn compose(&self, g: &Poly) -> Poly {
        self.coeffs.iter().rev().fold(Poly::zero(), |acc, c| &(&acc * g) + &Poly::constant(c.clone()))
    }

    /// `x^n · self(1/x)` for `n >= deg`.
    pub fn reversed(&self, n: usize) -> Poly {
        let mut v = vec![Rat::zero(); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[n - i] = c.clone();
        }
        Poly::new(v)
    }

    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly), PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let inv = Rat::one() / d.lc();
        let mut q = vec![Rat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::new(r)))
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).expect("nonzero gcd").0.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == Some(0)
    }

    pub fn resultant(&self, other: &Poly) -> Rat {
        resultant_of(&self.coeffs, &other.coeffs)
    }

    /// Discriminant with the sign convention of [`discriminant_of`].
    pub fn discriminant(&self) -> Result<Rat, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial("discriminant"));
        }
        Ok(discriminant_of(&self.coeffs))
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coefficients, if all coefficients are integral.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }

    /// Value at `x` reduced mod `p`; `None` if `p` divides a denominator.
    pub fn eval_mod(&self, x: u64, p: u64) -> Option<u64> {
        let mut acc = 0u64;
        for c in self.coeffs.iter().rev() {
            let cm = rat_mod(c, p)?;
            acc = ((acc as u128 * x as u128 + cm as u128) % p as u128) as u64;
        }
        Some(acc)
    }

    // Sturm machinery -------------------------------------------------------

    /// Canonical Sturm sequence `p, p', -rem(...), ...`.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone()];
        if self.degree().unwrap_or(0) == 0 {
            return seq;
        }
        seq.push(self.derivative());
        loop {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).expect("nonzero").1;
            if r.is_zero() {
                break;
            }
            seq.push(-&r);
        }
        seq
    }

    /// Number of distinct real roots in the closed interval `[lo, hi]`.
    pub fn count_real_roots(&self, lo: &Bound, hi: &Bound) -> Result<usize, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial("finite root set"));
        }
        if lo.gt(hi) {
            return Ok(0);
        }
        let mut q = self.squarefree_part();
        let mut count = 0;
        for b in [lo, hi] {
            if let Bound::At(a) = b {
                if q.eval(a).is_zero() {
                    count += 1;
                    q = q.div_rem(&Poly::new(vec![-a.clone(), Rat::one()])).expect("linear").0;
                }
            }
        }
        let seq = q.sturm_sequence();
        Ok(count + variations(&seq, lo) - variations(&seq, hi))
    }

    pub fn count_all_real_roots(&self) -> Result<usize, PolyError> {
        self.count_real_roots(&Bound::NegInf, &Bound::PosInf)
    }

    /// Sign of `self` at `x` or at an infinite end.
    pub fn sign_at(&self, b: &Bound) -> i32 {
        match b {
            Bound::At(x) => sign_of(&self.eval(x)),
            Bound::PosInf => sign_of(&self.lc()),
            Bound::NegInf => {
                let s = sign_of(&self.lc());
                if self.degree().unwrap_or(0) % 2 == 1 {
                    -s
                } else {
                    s
                }
            }
        }
    }

    /// True when `self(t) > 0` for every real `t`.
    pub fn is_globally_positive(&self) -> bool {
        !self.is_zero() && self.count_all_real_roots() == Ok(0) && self.sign_at(&Bound::At(Rat::zero())) > 0
    }

    /// True when `self <= 0` on all of R and its real zeros are exactly
    /// `zeros`. Each gap between consecutive zeros is sampled once; since no
    /// other roots exist the sign there is constant.
    pub fn is_nonpositive_with_zeros(&self, zeros: &[Rat]) -> bool {
        if self.is_zero() || zeros.iter().any(|z| !self.eval(z).is_zero()) {
            return false;
        }
        let mut zs = zeros.to_vec();
        zs.sort();
        zs.dedup();
        if self.count_all_real_roots() != Ok(zs.len()) {
            return false;
        }
        let mut samples = Vec::new();
        match (zs.first(), zs.last()) {
            (Some(a), Some(b)) => {
                samples.push(a - Rat::one());
                samples.push(b + Rat::one());
                for w in zs.windows(2) {
                    samples.push((&w[0] + &w[1]) / rat(2));
                }
            }
            _ => samples.push(Rat::zero()),
        }
        samples.iter().all(|s| sign_of(&self.eval(s)) < 0)
    }
}

/// End point of a real interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    At(Rat),
    PosInf,
}

impl Bound {
    fn gt(&self, o: &Bound) -> bool {
        match (self, o) {
            (Bound::NegInf, _) | (_, Bound::PosInf) => false,
            (Bound::PosInf, _) | (_, Bound::NegInf) => true,
            (Bound::At(a), Bound::At(b)) => a > b,
        }
    }
}

fn variations(seq: &[Poly], at: &Bound) -> usize {
    let signs: Vec<i32> = seq.iter().map(|p| p.sign_at(at)).filter(|&s| s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn sign_of(x: &Rat) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

impl ExactRing for Poly {
    fn zero_el() -> Self {
        Poly::zero()
    }
    fn one_el() -> Self {
        Poly::constant(Rat::one())
    }
    fn is_zero_el(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn times_int(&self, k: i64) -> Self {
        self.scale(&rat(k))
    }
    fn div_exact(&self, o: &Self) -> Self {
        let (q, r) = self.div_rem(o).expect("exact division by nonzero polynomial");
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, a) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Int(i64),
    Str(String),
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<NumOrStr>::deserialize(d)?;
        let cs = raw
            .into_iter()
            .map(|c| match c {
                NumOrStr::Int(i) => Ok(rat(i)),
                NumOrStr::Str(s) => parse_rat(&s),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Poly::new(cs))
    }
}

/// Serde adapter for a single rational stored as a decimal string.
pub mod rat_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        r.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Int(i) => Ok(rat(i)),
            NumOrStr::Str(s) => parse_rat(&s).map_err(serde::de::Error::custom),
        }
    }
}

// ---------------------------------------------------------------------------

/// Polynomial in `x` whose coefficients are polynomials in a parameter `t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamPoly {
    coeffs: Vec<Poly>,
}

impl ParamPoly {
    pub fn new(mut coeffs: Vec<Poly>) -> Self {
        while coeffs.last().is_some_and(Poly::is_zero) {
            coeffs.pop();
        }
        ParamPoly { coeffs }
    }

    /// Coefficient of `x^i` as a polynomial in `t`.
    pub fn coeff(&self, i: usize) -> Poly {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn degree_x(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Substitute `t = value`.
    pub fn specialize(&self, value: &Rat) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.eval(value)).collect())
    }

    /// `Σ a_i(t) x^i + Σ b_i(t) x^i`.
    pub fn add(&self, o: &ParamPoly) -> ParamPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ParamPoly::new((0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }

    /// `c(t) · p(x)`.
    pub fn from_product(c: &Poly, p: &Poly) -> ParamPoly {
        ParamPoly::new(p.coeffs().iter().map(|a| c.scale(a)).collect())
    }

    /// Discriminant with respect to `x`, a polynomial in `t`.
    pub fn discriminant_x(&self) -> Result<Poly, PolyError> {
        if self.coeffs.is_empty() {
            return Err(PolyError::ZeroPolynomial("discriminant"));
        }
        Ok(discriminant_of(&self.coeffs))
    }
}

// ---------------------------------------------------------------------------
// Integer helpers.

/// `q mod p` for a rational with denominator prime to `p`.
pub fn rat_mod(q: &Rat, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let n = q.numer().mod_floor(&pb).to_u64()?;
    let d = q.denom().mod_floor(&pb).to_u64()?;
    let dinv = inv_mod(d, p)?;
    Some(((n as u128 * dinv as u128) % p as u128) as u64)
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i128) as u64)
}

/// Legendre symbol `(a | p)` for an odd prime `p`, returned as -1, 0 or 1.
pub fn legendre(a: u64, p: u64) -> i32 {
    match pow_mod(a % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Kronecker symbol `(a | n)` for `n != 0`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    assert!(n != 0, "kronecker symbol needs n != 0");
    let mut a = a as i128;
    let mut n = n as i128;
    let mut t = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            t = -t;
        }
    }
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            t = -t;
        }
    }
    // Jacobi symbol (a | n), n odd positive.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Prime factorization by trial division, ascending. `|n|` is factored.
pub fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut p = BigInt::from(2u32);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor_integer(&BigInt::from(n)).into_iter().map(|(p, e)| (p.to_u64().expect("factor fits"), e)).collect()
}

/// Squarefree kernel with sign: `n = s · k^2`, `s` squarefree.
pub fn squarefree_part_int(n: i64) -> i64 {
    if n == 0 {
        return 0;
    }
    let core: i64 =
        factor_u64(n.unsigned_abs()).into_iter().filter(|(_, e)| e % 2 == 1).map(|(p, _)| p as i64).product();
    core * n.signum()
}

pub fn is_squarefree_int(n: i64) -> bool {
    n != 0 && factor_u64(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// `v_p(n)`, or `None` for `n = 0`.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    Some(v)
}

/// `v_p(q)` for a rational, or `None` for zero.
pub fn valuation_rat(q: &Rat, p: u64) -> Option<i64> {
    Some(valuation(q.numer(), p)? as i64 - valuation(q.denom(), p)? as i64)
}

/// `⌊sqrt(n)⌋`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Sign of a big integer as -1, 0, 1.
pub fn bigint_sign(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

// ---------------------------------------------------------------------------

/// Element `a + b·sqrt(d)` of a quadratic field, `d` squarefree and not 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadNumber {
    #[serde(with = "rat_string")]
    pub a: Rat,
    #[serde(with = "rat_string")]
    pub b: Rat,
}

impl QuadNumber {
    pub fn new(a: Rat, b: Rat) -> Self {
        QuadNumber { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        QuadNumber { a, b: Rat::zero() }
    }

    pub fn add(&self, o: &Self) -> Self {
        QuadNumber::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn mul(&self, o: &Self, d: i64) -> Self {
        QuadNumber::new(&self.a * &o.a + &self.b * &o.b * rat(d), &self.a * &o.b + &self.b * &o.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Horner evaluation of a rational polynomial at this element.
    pub fn eval(p: &Poly, x: &QuadNumber, d: i64) -> QuadNumber {
        p.coeffs()
            .iter()
            .rev()
            .fold(QuadNumber::from_rat(Rat::zero()), |acc, c| acc.mul(x, d).add(&QuadNumber::from_rat(c.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> Poly {
        Poly::from_ints(cs)
    }

    #[test]
    fn cubic_and_quadratic_discriminants() {
        // x^2 + bx + c -> b^2 - 4c
        assert_eq!(p(&[3, 5, 1]).discriminant().unwrap(), rat(25 - 12));
        // x^3 + ax + b -> -4a^3 - 27b^2
        assert_eq!(p(&[2, -3, 0, 1]).discriminant().unwrap(), rat(-4 * -27 - 27 * 4));
        // repeated root
        assert_eq!(p(&[1, -2, 1]).discriminant().unwrap(), rat(0));
    }

    #[test]
    fn parametric_discriminant_matches_specialization() {
        let fiber = ParamPoly::new(vec![
            Poly::from_ints(&[-1, 2, 1]),
            Poly::from_ints(&[0, 2]),
            Poly::zero(),
            Poly::from_ints(&[0, 2]),
        ]);
        let d = fiber.discriminant_x().unwrap();
        for t in -3..=3 {
            let spec = fiber.specialize(&rat(t));
            if spec.degree() == Some(3) {
                assert_eq!(d.eval(&rat(t)), spec.discriminant().unwrap());
            }
        }
    }

    #[test]
    fn division_and_gcd() {
        let a = &p(&[-1, 0, 1]) * &p(&[2, 1]);
        let (q, r) = a.div_rem(&p(&[2, 1])).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, p(&[-1, 0, 1]));
        assert_eq!(a.gcd(&p(&[1, 1])), p(&[1, 1]));
        let sq = &p(&[1, 1]) * &p(&[1, 1]);
        assert_eq!((&sq * &p(&[0, 1])).squarefree_part(), p(&[0, 1, 1]));
        assert!(!sq.is_squarefree());
    }

    #[test]
    fn sturm_counts() {
        let f = &(&p(&[-1, 1]) * &p(&[-2, 1])) * &p(&[1, 0, 1]);
        assert_eq!(f.count_all_real_roots(), Ok(2));
        assert_eq!(f.count_real_roots(&Bound::At(rat(1)), &Bound::At(rat(2))), Ok(2));
        assert_eq!(f.count_real_roots(&Bound::At(rat(0)), &Bound::At(rat(1))), Ok(1));
        assert_eq!(f.count_real_roots(&Bound::At(rat(3)), &Bound::PosInf), Ok(0));
        assert_eq!(p(&[1, 0, 1, 0, 1]).count_all_real_roots(), Ok(0));
        assert_eq!(Poly::zero().count_all_real_roots(), Err(PolyError::ZeroPolynomial("finite root set")));
    }

    #[test]
    fn sign_profiles() {
        assert!(p(&[1, 0, 1]).is_globally_positive());
        assert!(!p(&[-1, 0, 1]).is_globally_positive());
        let q = -&p(&[0, 0, 1]);
        assert!(q.is_nonpositive_with_zeros(&[rat(0)]));
        assert!(!q.is_nonpositive_with_zeros(&[]));
        assert!(!p(&[0, 0, 1]).is_nonpositive_with_zeros(&[rat(0)]));
    }

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker(-7, 11), 1);
        assert_eq!(kronecker(-7, 23), 1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(3, 7), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(1, 2), 1);
        assert_eq!(kronecker(-1, -1), -1);
        assert_eq!(kronecker(6, 3), 0);
    }

    #[test]
    fn integers() {
        assert_eq!(factor_u64(3872), vec![(2, 5), (11, 2)]);
        assert_eq!(squarefree_part_int(-12), -3);
        assert_eq!(valuation_rat(&Rat::new(BigInt::from(18), BigInt::from(5)), 3), Some(2));
        assert_eq!(isqrt(4 * 4 * 11), 13);
        assert_eq!(rat_mod(&Rat::new(BigInt::from(1), BigInt::from(2)), 7), Some(4));
        assert_eq!(parse_rat("-3/6").unwrap(), Rat::new(BigInt::from(-1), BigInt::from(2)));
        assert_eq!(parse_rat("0.25").unwrap(), Rat::new(BigInt::from(1), BigInt::from(4)));
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn serde_round_trip() {
        let f = Poly::parse(&["1/2", "0", "-3"]).unwrap();
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(j, r#"["1/2","0","-3"]"#);
        assert_eq!(serde_json::from_str::<Poly>(&j).unwrap(), f);
        assert_eq!(serde_json::from_str::<Poly>("[1, \"2\", 0]").unwrap(), p(&[1, 2]));
    }

    #[test]
    fn quadratic_numbers() {
        // i^2 + 1 = 0 in Q(i)
        let i = QuadNumber::new(rat(0), rat(1));
        assert!(QuadNumber::eval(&p(&[1, 0, 1]), &i, -1).is_zero());
    }
}
