//! Lazy expressions over subsets of the positive integers.
//!
//! Leaves are finite sets and arithmetic tails `{n >= start : m | n}`. Inner
//! nodes are union, intersection, difference, the product set
//! `A·B = {ab}`, scaling `c·A` and saturation `A·N`. Membership is decided
//! exactly for any `n`; equality is only ever checked on a window `[1, B]`.
//!
//! Children are reference counted so shared subexpressions form a DAG.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetError {
    #[error("finite members must be strictly increasing positive integers")]
    BadMembers,
    #[error("tail needs m >= 1 and start >= 1")]
    BadTail,
    #[error("scale factor must be at least 1")]
    BadScale,
    #[error("{op} takes {expected} operand(s), got {got}")]
    Arity { op: &'static str, expected: &'static str, got: usize },
}

/// A set of positive integers, stored as an expression tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Node", into = "Node")]
pub struct DegreeSet(Arc<Node>);

/// One node of a [`DegreeSet`]. This is also the JSON schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Finite { members: Vec<u64> },
    Tail { m: u64, start: u64 },
    Union { left: DegreeSet, right: DegreeSet },
    Intersect { left: DegreeSet, right: DegreeSet },
    Difference { left: DegreeSet, right: DegreeSet },
    Product { left: DegreeSet, right: DegreeSet },
    Scale { factor: u64, inner: DegreeSet },
    Saturate { inner: DegreeSet },
}

impl TryFrom<Node> for DegreeSet {
    type Error = SetError;

    fn try_from(node: Node) -> Result<Self, SetError> {
        match &node {
            Node::Finite { members } => {
                if members.first() == Some(&0) || members.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SetError::BadMembers);
                }
            }
            Node::Tail { m, start } => {
                if *m == 0 || *start == 0 {
                    return Err(SetError::BadTail);
                }
            }
            Node::Scale { factor: 0, .. } => return Err(SetError::BadScale),
            _ => {}
        }
        Ok(DegreeSet(Arc::new(node)))
    }
}

impl From<DegreeSet> for Node {
    fn from(s: DegreeSet) -> Node {
        (*s.0).clone()
    }
}

/// Operations accepted by [`combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
    Product,
    Scale(u64),
    Saturate,
}

/// Apply `op` to `args`. Union, intersection and product fold over one or
/// more operands; difference takes two; scale and saturate take one.
pub fn combine(op: SetOp, args: &[DegreeSet]) -> Result<DegreeSet, SetError> {
    let arity = |name, expected, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(SetError::Arity { op: name, expected, got: args.len() })
        }
    };
    match op {
        SetOp::Union | SetOp::Intersect | SetOp::Product => {
            let name = match op {
                SetOp::Union => "union",
                SetOp::Intersect => "intersect",
                _ => "product",
            };
            arity(name, "at least 1", !args.is_empty())?;
            let mut acc = args[0].clone();
            for a in &args[1..] {
                acc = match op {
                    SetOp::Union => acc.union(a),
                    SetOp::Intersect => acc.intersect(a),
                    _ => acc.product(a),
                };
            }
            Ok(acc)
        }
        SetOp::Difference => {
            arity("difference", "2", args.len() == 2)?;
            Ok(args[0].difference(&args[1]))
        }
        SetOp::Scale(c) => {
            arity("scale", "1", args.len() == 1)?;
            if c == 0 {
                return Err(SetError::BadScale);
            }
            Ok(args[0].scale(c))
        }
        SetOp::Saturate => {
            arity("saturate", "1", args.len() == 1)?;
            Ok(args[0].saturate())
        }
    }
}

fn node(n: Node) -> DegreeSet {
    DegreeSet(Arc::new(n))
}

impl DegreeSet {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn empty() -> Self {
        node(Node::Finite { members: Vec::new() })
    }

    /// Finite set from any iterator; zeros are dropped, duplicates merged.
    pub fn finite<I: IntoIterator<Item = u64>>(it: I) -> Self {
        let mut members: Vec<u64> = it.into_iter().filter(|&n| n > 0).collect();
        members.sort_unstable();
        members.dedup();
        node(Node::Finite { members })
    }

    /// `{n >= start : m | n}`.
    pub fn tail(m: u64, start: u64) -> Self {
        assert!(m >= 1 && start >= 1, "tail needs m >= 1 and start >= 1");
        node(Node::Tail { m, start })
    }

    pub fn naturals() -> Self {
        Self::tail(1, 1)
    }

    /// `{n : n >= start}`.
    pub fn at_least(start: u64) -> Self {
        Self::tail(1, start.max(1))
    }

    /// `m·N = {m, 2m, 3m, ...}`.
    pub fn multiples(m: u64) -> Self {
        Self::tail(m, m)
    }

    pub fn primes_up_to(n: u64) -> Self {
        Self::finite((2..=n).filter(|&k| is_prime(k)))
    }

    pub fn union(&self, other: &Self) -> Self {
        match (self.node(), other.node()) {
            (Node::Finite { members: a }, Node::Finite { members: b }) => Self::finite(a.iter().chain(b).copied()),
            _ => node(Node::Union { left: self.clone(), right: other.clone() }),
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        match (self.node(), other.node()) {
            (Node::Finite { members }, o) | (o, Node::Finite { members }) if o.is_leaf() => {
                let keep = if matches!(self.node(), Node::Finite { .. }) { other } else { self };
                Self::finite(members.iter().copied().filter(|&n| keep.contains(n)))
            }
            (Node::Tail { m: m1, start: s1 }, Node::Tail { m: m2, start: s2 }) => Self::tail(m1.lcm(m2), *s1.max(s2)),
            _ => node(Node::Intersect { left: self.clone(), right: other.clone() }),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        match (self.node(), other.node()) {
            (Node::Finite { members }, o) if o.is_leaf() => {
                Self::finite(members.iter().copied().filter(|&n| !other.contains(n)))
            }
            (_, Node::Finite { members }) if members.is_empty() => self.clone(),
            _ => node(Node::Difference { left: self.clone(), right: other.clone() }),
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        node(Node::Product { left: self.clone(), right: other.clone() })
    }

    /// `c·A`. Panics on `c == 0`; use [`combine`] for a checked version.
    pub fn scale(&self, c: u64) -> Self {
        assert!(c >= 1, "scale factor must be at least 1");
        if c == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Finite { members } => Self::finite(members.iter().map(|&n| n * c)),
            Node::Tail { m, start } => Self::tail(m * c, start * c),
            _ => node(Node::Scale { factor: c, inner: self.clone() }),
        }
    }

    /// `A·N`, the closure of `A` under taking multiples.
    pub fn saturate(&self) -> Self {
        node(Node::Saturate { inner: self.clone() })
    }

    /// Remove the listed values.
    pub fn without<I: IntoIterator<Item = u64>>(&self, values: I) -> Self {
        self.difference(&Self::finite(values))
    }

    /// Exact membership test.
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self.node() {
            Node::Finite { members } => members.binary_search(&n).is_ok(),
            Node::Tail { m, start } => n >= *start && n.is_multiple_of(*m),
            Node::Union { left, right } => left.contains(n) || right.contains(n),
            Node::Intersect { left, right } => left.contains(n) && right.contains(n),
            Node::Difference { left, right } => left.contains(n) && !right.contains(n),
            Node::Product { left, right } => divisors(n).into_iter().any(|a| left.contains(a) && right.contains(n / a)),
            Node::Scale { factor, inner } => n.is_multiple_of(*factor) && inner.contains(n / factor),
            Node::Saturate { inner } => divisors(n).into_iter().any(|a| inner.contains(a)),
        }
    }

    /// Members in `[1, bound]`, ascending. Evaluated bottom-up on bitmaps,
    /// independently of [`DegreeSet::contains`].
    pub fn materialize(&self, bound: u64) -> Vec<u64> {
        let bits = self.bitmap(bound as usize);
        (1..=bound).filter(|&n| bits[n as usize]).collect()
    }

    fn bitmap(&self, b: usize) -> Vec<bool> {
        let mut out = vec![false; b + 1];
        match self.node() {
            Node::Finite { members } => {
                for &n in members.iter().take_while(|&&n| n as usize <= b) {
                    out[n as usize] = true;
                }
            }
            Node::Tail { m, start } => {
                let first = (*start).div_ceil(*m) * m;
                let mut n = first as usize;
                while n <= b {
                    out[n] = true;
                    n += *m as usize;
                }
            }
            Node::Union { left, right } | Node::Intersect { left, right } | Node::Difference { left, right } => {
                let (l, r) = (left.bitmap(b), right.bitmap(b));
                for n in 1..=b {
                    out[n] = match self.node() {
                        Node::Union { .. } => l[n] || r[n],
                        Node::Intersect { .. } => l[n] && r[n],
                        _ => l[n] && !r[n],
                    };
                }
            }
            Node::Product { left, right } => {
                let (l, r) = (left.bitmap(b), right.bitmap(b));
                for x in (1..=b).filter(|&x| l[x]) {
                    for y in (1..=b / x).filter(|&y| r[y]) {
                        out[x * y] = true;
                    }
                }
            }
            Node::Scale { factor, inner } => {
                let f = *factor as usize;
                let i = inner.bitmap(b / f);
                for x in (1..i.len()).filter(|&x| i[x]) {
                    out[x * f] = true;
                }
            }
            Node::Saturate { inner } => {
                let i = inner.bitmap(b);
                for x in (1..=b).filter(|&x| i[x]) {
                    for k in (x..=b).step_by(x) {
                        out[k] = true;
                    }
                }
            }
        }
        out
    }

    /// True when both sets agree on `[1, bound]`.
    pub fn equals_on_window(&self, other: &Self, bound: u64) -> bool {
        self.materialize(bound) == other.materialize(bound)
    }

    /// True when `self ∩ [1, bound] ⊆ other`.
    pub fn subset_on_window(&self, other: &Self, bound: u64) -> bool {
        let o = other.bitmap(bound as usize);
        self.materialize(bound).into_iter().all(|n| o[n as usize])
    }

    /// Smallest member in `[1, bound]`.
    pub fn min_on_window(&self, bound: u64) -> Option<u64> {
        self.materialize(bound).first().copied()
    }

    /// Compact rendering of the window, e.g. `4, 6, 8..=200`.
    pub fn window_summary(&self, bound: u64) -> String {
        let ms = self.materialize(bound);
        let mut parts = Vec::new();
        let mut i = 0;
        while i < ms.len() {
            let mut j = i;
            while j + 1 < ms.len() && ms[j + 1] == ms[j] + 1 {
                j += 1;
            }
            if j - i >= 2 {
                parts.push(format!("{}..={}", ms[i], ms[j]));
            } else {
                parts.extend(ms[i..=j].iter().map(u64::to_string));
            }
            i = j + 1;
        }
        if parts.is_empty() {
            "{}".to_string()
        } else {
            parts.join(", ")
        }
    }
}

impl Node {
    fn is_leaf(&self) -> bool {
        matches!(self, Node::Finite { .. } | Node::Tail { .. })
    }
}

impl fmt::Debug for DegreeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DegreeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Finite { members } => {
                let s: Vec<String> = members.iter().map(u64::to_string).collect();
                write!(f, "{{{}}}", s.join(","))
            }
            Node::Tail { m: 1, start } => write!(f, "N>={start}"),
            Node::Tail { m, start } if start == m => write!(f, "{m}N"),
            Node::Tail { m, start } => write!(f, "{m}N∩N>={start}"),
            Node::Union { left, right } => write!(f, "({left} ∪ {right})"),
            Node::Intersect { left, right } => write!(f, "({left} ∩ {right})"),
            Node::Difference { left, right } => write!(f, "({left} ∖ {right})"),
            Node::Product { left, right } => write!(f, "({left}·{right})"),
            Node::Scale { factor, inner } => write!(f, "{factor}·{inner}"),
            Node::Saturate { inner } => write!(f, "sat{inner}"),
        }
    }
}

/// All positive divisors of `n`, unordered.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut a = 1;
    while a * a <= n {
        if n.is_multiple_of(a) {
            out.push(a);
            if a * a != n {
                out.push(n / a);
            }
        }
        a += 1;
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaves_and_tails() {
        let s = DegreeSet::tail(2, 4);
        assert!(!s.contains(2) && s.contains(4) && s.contains(200) && !s.contains(7));
        assert_eq!(DegreeSet::multiples(3).materialize(10), vec![3, 6, 9]);
    }

    #[test]
    fn product_of_naturals_from_two() {
        // composites only
        let n2 = DegreeSet::at_least(2);
        let p = n2.product(&n2);
        let comps: Vec<u64> = (2..=100).filter(|&n| !is_prime(n)).collect();
        assert_eq!(p.materialize(100), comps);
        assert!(!p.contains(97) && p.contains(91));
    }

    #[test]
    fn saturation_examples() {
        let s = DegreeSet::finite([2]).union(&DegreeSet::at_least(4)).saturate();
        assert_eq!(s.materialize(200), (2..=200).filter(|&n| n != 3).collect::<Vec<_>>());
        let p = DegreeSet::primes_up_to(11);
        let out = DegreeSet::at_least(2).difference(&p).saturate();
        assert!(!out.contains(2) && out.contains(4) && !out.contains(11) && out.contains(13) && out.contains(22));
    }

    #[test]
    fn normalization_of_leaves() {
        let a = DegreeSet::tail(2, 3).intersect(&DegreeSet::tail(3, 10));
        assert_eq!(a.node(), &Node::Tail { m: 6, start: 10 });
        let b = DegreeSet::tail(2, 25).scale(2);
        assert_eq!(b.node(), &Node::Tail { m: 4, start: 50 });
        let c = DegreeSet::finite([1, 2, 3, 9]).difference(&DegreeSet::multiples(3));
        assert_eq!(c.node(), &Node::Finite { members: vec![1, 2] });
    }

    #[test]
    fn combine_checks_arity_and_scale() {
        let n = DegreeSet::naturals();
        assert!(matches!(combine(SetOp::Difference, std::slice::from_ref(&n)), Err(SetError::Arity { .. })));
        assert_eq!(combine(SetOp::Scale(0), std::slice::from_ref(&n)), Err(SetError::BadScale));
        let u = combine(SetOp::Union, &[n.clone(), DegreeSet::empty(), n.clone()]).unwrap();
        assert!(u.equals_on_window(&n, 50));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = DegreeSet::at_least(2)
            .difference(&DegreeSet::finite([2, 3, 5]))
            .product(&DegreeSet::tail(2, 4))
            .saturate()
            .scale(3);
        let j = serde_json::to_string(&s).unwrap();
        let back: DegreeSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&DegreeSet::tail(2, 4)).unwrap(), r#"{"kind":"tail","m":2,"start":4}"#);
        assert!(serde_json::from_str::<DegreeSet>(r#"{"kind":"finite","members":[3,2]}"#).is_err());
        assert!(serde_json::from_str::<DegreeSet>(r#"{"kind":"tail","m":0,"start":4}"#).is_err());
        assert!(serde_json::from_str::<DegreeSet>(
            r#"{"kind":"scale","factor":0,"inner":{"kind":"finite","members":[]}}"#
        )
        .is_err());
    }

    #[test]
    fn summary_rendering() {
        let s = DegreeSet::finite([2]).union(&DegreeSet::at_least(4));
        assert_eq!(s.window_summary(10), "2, 4..=10");
        assert_eq!(DegreeSet::empty().window_summary(10), "{}");
    }
}
