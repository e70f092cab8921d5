//! Brute-force oracles shared by the integration, property and acceptance
//! targets. Each one works from definitions, not from the library code.

#![allow(dead_code)]

use dendeg::boundrules::{CurveFacts, Fact};
use dendeg::DegreeSet;

pub fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}

/// Table cell sets on `[2, bound]`, written out from the table entries.
pub fn table_cell(c_point: bool, c_cubic: bool, d_point: bool, d_cubic: bool, bound: u64) -> Vec<u64> {
    let pointless = |p: bool| !p;
    let removed_primes_upto = match (pointless(c_point), pointless(d_point)) {
        (false, false) => 11,
        (true, true) => 67,
        _ => 17,
    };
    let ps = primes_upto(removed_primes_upto);
    let nine_removed = (c_point && !c_cubic) || (d_point && !d_cubic);
    let six_removed = c_point && !c_cubic && d_point && !d_cubic;
    (2..=bound)
        .filter(|n| !ps.contains(n))
        .filter(|&n| !(nine_removed && n == 9))
        .filter(|&n| !(six_removed && n == 6))
        .collect()
}

/// The three genus-2 categories with index 1.
pub const CATEGORIES: [(bool, bool); 3] = [(true, true), (true, false), (false, true)];

pub fn genus2_index1(point: bool, cubic: bool) -> CurveFacts {
    let mut f = CurveFacts::with_genus(2);
    f.index = Some(Fact::asserted(1));
    f.has_k_point = Some(Fact::asserted(point));
    f.has_degree3_point = Some(Fact::asserted(cubic));
    f
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Legendre symbol by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn eval_mod(cs: &[i64], x: i64, m: i64) -> i64 {
    cs.iter().rev().fold(0i128, |acc, &c| (acc * x as i128 + c as i128).rem_euclid(m as i128)) as i64
}

/// `#C(F_p)` on the smooth model of `y^2 + h y = f`, `p` odd, by listing
/// `x` and the points at infinity.
pub fn naive_count(f: &[i64], h: &[i64], p: u64) -> u64 {
    let deg = |v: &[i64]| v.iter().rposition(|&c| c != 0).unwrap_or(0);
    let n = deg(f).max(2 * deg(h));
    let big_f: Vec<i64> = (0..=n)
        .map(|i| {
            let hh: i64 = (0..=i).map(|j| h.get(j).copied().unwrap_or(0) * h.get(i - j).copied().unwrap_or(0)).sum();
            4 * f.get(i).copied().unwrap_or(0) + hh
        })
        .collect();
    let pi = p as i64;
    let mut count = 0i64;
    for x in 0..pi {
        count += 1 + legendre(eval_mod(&big_f, x, pi), p);
    }
    let d = deg(&big_f);
    let g = (d - 1) / 2;
    let lc = big_f[d];
    if d == 2 * g + 1 {
        count += 1;
    } else {
        count += 1 + legendre(lc, p);
    }
    count as u64
}

/// `#E(F_p)` for a long Weierstrass equation with integer coefficients.
pub fn naive_elliptic_count(a: [i64; 5], p: u64) -> u64 {
    let pi = p as i64;
    let [a1, a2, a3, a4, a6] = a;
    let mut count = 1;
    for x in 0..pi {
        for y in 0..pi {
            let lhs = (y * y + a1 * x * y + a3 * y).rem_euclid(pi);
            let rhs = (x * x * x + a2 * x * x + a4 * x + a6).rem_euclid(pi);
            if lhs == rhs {
                count += 1;
            }
        }
    }
    count
}

fn valuation(mut n: i64, p: i64, cap: u32) -> u32 {
    if n == 0 {
        return cap;
    }
    let mut v = 0;
    while n % p == 0 && v < cap {
        n /= p;
        v += 1;
    }
    v
}

/// Does `y^2 = F(x)` have a `Q_p` point, decided by residues of `x` modulo
/// `p^n` on both charts? `None` when some residue class is not settled at
/// this precision.
pub fn qp_point_oracle(coeffs: &[i64], p: u64, n: u32) -> Option<bool> {
    let pi = p as i64;
    let m = pi.pow(n);
    let deg = coeffs.iter().rposition(|&c| c != 0).expect("nonzero");
    let even_deg = deg + deg % 2;
    let mut rev: Vec<i64> = vec![0; even_deg + 1];
    for (i, &c) in coeffs.iter().enumerate().take(deg + 1) {
        rev[even_deg - i] = c;
    }
    let deriv = |cs: &[i64]| -> Vec<i64> { cs.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect() };
    let (d_f, d_rev) = (deriv(coeffs), deriv(&rev));
    let mut unsettled = false;
    let mut settle = |cs: &[i64], ds: &[i64], x: i64| -> Option<bool> {
        let v = valuation(eval_mod(cs, x, m), pi, n);
        if v < n {
            let unit = eval_mod(cs, x, m) / pi.pow(v);
            return Some(v.is_multiple_of(2) && legendre(unit, p) == 1);
        }
        let vd = valuation(eval_mod(ds, x, m), pi, n);
        if 2 * vd < n {
            // F(x) ≡ 0 to precision beyond twice v(F'(x)): a root nearby.
            return Some(true);
        }
        unsettled = true;
        None
    };
    for x in 0..m {
        if settle(coeffs, &d_f, x) == Some(true) {
            return Some(true);
        }
    }
    for z in (0..m).step_by(p as usize) {
        if settle(&rev, &d_rev, z) == Some(true) {
            return Some(true);
        }
    }
    if unsettled {
        None
    } else {
        Some(false)
    }
}

/// Every `n <= bound` in the lazily described set, by direct recursion on
/// the set's JSON shape.
pub fn brute_members(s: &DegreeSet, bound: u64) -> Vec<u64> {
    let v = serde_json::to_value(s).unwrap();
    let mut out: Vec<u64> = (1..=bound).filter(|&n| brute_contains(&v, n)).collect();
    out.dedup();
    out
}

pub fn brute_contains(v: &serde_json::Value, n: u64) -> bool {
    let kind = v["kind"].as_str().unwrap();
    let sub = |k: &str, n: u64| brute_contains(&v[k], n);
    match kind {
        "finite" => v["members"].as_array().unwrap().iter().any(|x| x.as_u64() == Some(n)),
        "tail" => {
            let (m, start) = (v["m"].as_u64().unwrap(), v["start"].as_u64().unwrap());
            n >= start && n.is_multiple_of(m)
        }
        "union" => sub("left", n) || sub("right", n),
        "intersect" => sub("left", n) && sub("right", n),
        "difference" => sub("left", n) && !sub("right", n),
        "product" => (1..=n).filter(|d| n.is_multiple_of(*d)).any(|d| sub("left", d) && sub("right", n / d)),
        "scale" => {
            let c = v["factor"].as_u64().unwrap();
            n.is_multiple_of(c) && sub("inner", n / c)
        }
        "saturate" => (1..=n).filter(|d| n.is_multiple_of(*d)).any(|d| sub("inner", d)),
        other => panic!("unknown node {other}"),
    }
}
