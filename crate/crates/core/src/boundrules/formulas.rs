//! Genus counts and degree thresholds for families of covering curves.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::setalg::DegreeSet;

use super::RuleError;

/// Genus of the fiber product of degree `dc` and `dd` maps to the line,
/// `(dc-1)(dd-1) + dc·gd + dd·gc`, and the geometric genus after
/// `nodes` nodes are resolved.
pub fn fiber_product_genus(dc: u64, dd: u64, gc: u64, gd: u64, nodes: u64) -> Result<(u64, u64), RuleError> {
    if dc < 2 || dd < 2 {
        return Err(RuleError::InvalidInput("map degrees must be at least 2".into()));
    }
    let arithmetic = (dc - 1) * (dd - 1) + dc * gd + dd * gc;
    if nodes > arithmetic {
        return Err(RuleError::InvalidInput("more nodes than the arithmetic genus".into()));
    }
    Ok((arithmetic, arithmetic - nodes))
}

/// `2((gonC-1)(gonD-1) + gonC·gD + gonD·gC)`: every degree from here on is
/// dense on a product of two pointed curves.
pub fn n_pointed(gon_c: u64, gon_d: u64, gc: u64, gd: u64) -> u64 {
    2 * ((gon_c - 1) * (gon_d - 1) + gon_c * gd + gon_d * gc)
}

/// Same threshold for an index-1 curve `C` against a pointed `D`, valid only
/// when `gcd(dC, 2·dD·(gC-1)) = 1`.
pub fn n_index1(dc: u64, dd: u64, gc: u64, gd: u64) -> Result<u64, RuleError> {
    let rhs = 2 * dd * gc.saturating_sub(1);
    let g = dc.gcd(&rhs);
    if g != 1 {
        return Err(RuleError::GcdGuard { dc, rhs, gcd: g });
    }
    Ok(2 * ((dc - 1) * (dd - 1) + dc * gd + dd * gc))
}

/// Threshold from the effective index `e`, with
/// `mX = max(2gX, 2gX - 2 + e)`:
/// `2(mC-1)(mD-1) + 2mC·gD + 2mD·gC`.
pub fn n_general(gc: u64, gd: u64, e: u64) -> u64 {
    let m = |g: u64| (2 * g).max((2 * g + e).saturating_sub(2));
    let (mc, md) = (m(gc), m(gd));
    2 * (mc - 1) * (md - 1) + 2 * mc * gd + 2 * md * gc
}

/// Bound on the effective index when `ind(C) = 1`:
/// `4gC·gD + (4gC+2)(indD-1) + 2gC·indD + 2gD + indD`.
pub fn eff_index_bound(gc: u64, gd: u64, ind_d: u64) -> u64 {
    4 * gc * gd + (4 * gc + 2) * (ind_d - 1) + 2 * gc * ind_d + 2 * gd + ind_d
}

/// Castelnuovo–Severi membership: for a degree-`n` map from a genus-`g1`
/// curve to a genus-`g2` curve, `2g1 - 2 - d` is dense provided
/// `(n-1)d < g1 - n·g2`, `d <= g1 - 2` and a suitable effective divisor of
/// degree `d` has been exhibited.
pub fn cs_membership(g1: u64, g2: u64, n: u64, d: u64, divisor_witnessed: bool) -> Option<u64> {
    if !divisor_witnessed || n < 2 {
        return None;
    }
    let rhs = g1 as i128 - (n * g2) as i128;
    if ((n - 1) * d) as i128 >= rhs || d + 2 > g1 {
        return None;
    }
    Some(2 * g1 - 2 - d)
}

/// How many rational points the members of a covering family carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointCount {
    None,
    One,
    AtLeastTwo,
}

/// Divisor data for the Castelnuovo–Severi step: the members map with degree
/// `n` onto a curve of genus `g2`, and divisors of the listed degrees satisfy
/// the non-effectivity condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsWitness {
    pub g2: u64,
    pub n: u64,
    pub degrees: Vec<u64>,
}

/// A family of curves of fixed geometric genus, index 1, sweeping out a
/// surface. Every density degree of a member is a density degree of the
/// surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub genus: u64,
    pub points: PointCount,
    pub nonhyperelliptic: bool,
    /// Degrees of base-point-free pencils known on every member.
    pub pencils: Vec<u64>,
    pub cs: Option<CsWitness>,
}

impl CoverFamily {
    /// `ℕ≥2g`, plus `2g-3` (a point), `2g-1` (two points or none) for
    /// nonhyperelliptic members of genus at least 3, the pencil degrees and
    /// the Castelnuovo–Severi degrees.
    pub fn degrees(&self) -> DegreeSet {
        let g = self.genus;
        let mut s = DegreeSet::at_least((2 * g).max(1));
        let mut extra: Vec<u64> = self.pencils.clone();
        if self.nonhyperelliptic && g >= 3 {
            if self.points != PointCount::None {
                extra.push(2 * g - 3);
            }
            if self.points != PointCount::One {
                extra.push(2 * g - 1);
            }
        }
        if let Some(w) = &self.cs {
            extra.extend(w.degrees.iter().filter_map(|&d| cs_membership(g, w.g2, w.n, d, true)));
        }
        extra.sort_unstable();
        extra.dedup();
        if !extra.is_empty() {
            s = s.union(&DegreeSet::finite(extra));
        }
        s
    }

    /// The `2g-1` member alone (used where that step is flagged).
    pub fn odd_canonical_degree(&self) -> Option<u64> {
        (self.nonhyperelliptic && self.genus >= 3 && self.points != PointCount::One).then(|| 2 * self.genus - 1)
    }

    pub fn without_odd_canonical(&self) -> DegreeSet {
        let all = self.degrees();
        match self.odd_canonical_degree() {
            Some(d) if !self.pencils.contains(&d) && !self.cs_degrees().contains(&d) => all.without([d]),
            _ => all,
        }
    }

    fn cs_degrees(&self) -> Vec<u64> {
        self.cs
            .as_ref()
            .map(|w| w.degrees.iter().filter_map(|&d| cs_membership(self.genus, w.g2, w.n, d, true)).collect())
            .unwrap_or_default()
    }
}
