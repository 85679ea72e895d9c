//! Asymptotic regions I and II, the partition predicate, the II/A/B/C
//! classification of a pair of exponents, and the ten integration domains.
//!
//! Every domain is described twice: as a membership predicate that walks the
//! full chain of conditions in order, and as a list of per-coordinate
//! brackets (`lo(t₁..tᵢ₋₁) ≤ tᵢ < hi(t₁..tᵢ₋₁)`) from which both the static
//! bounding box and the nested sampler are derived.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::SieveParams;

pub const MAX_PARTS: usize = 8;

/// Which asymptotic region a partition must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    I,
    II,
}

/// `I(m, n)`: `m + n ≤ 1/2 + 2ϖ`, or `m ≤ 1/2 − σ` and `n < 1/8 + σ/2 − 5ϖ/2`.
#[inline]
pub fn region_i(p: &SieveParams, m: f64, n: f64) -> bool {
    m + n <= p.type_one_sum_limit() || (m <= 0.5 - p.sigma && n < p.type_one_short_limit())
}

#[inline]
fn in_type_two_window(p: &SieveParams, x: f64) -> bool {
    let (a, b) = p.lower_window();
    let (c, d) = p.upper_window();
    (a <= x && x <= b) || (c <= x && x <= d)
}

/// `II(m, n)`: `m`, `n` or `m + n` in `[1/2 − σ, 1/2 − 2ϖ]`, or
/// `m + n ∈ [1/2 + 2ϖ, 1/2 + σ]`.
#[inline]
pub fn region_ii(p: &SieveParams, m: f64, n: f64) -> bool {
    let (a, b) = p.lower_window();
    let low = |x: f64| a <= x && x <= b;
    low(m) || low(n) || in_type_two_window(p, m + n)
}

#[inline]
pub fn region(p: &SieveParams, target: Target, m: f64, n: f64) -> bool {
    match target {
        Target::I => region_i(p, m, n),
        Target::II => region_ii(p, m, n),
    }
}

/// How "the tuple can be partitioned into (m, n)" is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionRule {
    /// Type-I splits must place every variable in `m` or `n`. Type-II splits
    /// take `m` and `n` from disjoint sub-collections; variables left out
    /// stay with the rough cofactor. For II this is "some subset sum lies in
    /// `[1/2−σ, 1/2−2ϖ] ∪ [1/2+2ϖ, 1/2+σ]`".
    #[default]
    SubsetTypeTwo,
    /// Both targets require every variable to be placed (empty groups
    /// allowed), so `m + n` is always the full sum.
    Exhaustive,
}

impl FromStr for PartitionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subset" | "subset-type-two" => Ok(PartitionRule::SubsetTypeTwo),
            "exhaustive" => Ok(PartitionRule::Exhaustive),
            _ => Err(Error::Parse(format!(
                "unknown partition rule {s:?} (subset|exhaustive)"
            ))),
        }
    }
}

/// [`can_partition_with`] under the default [`PartitionRule`].
pub fn can_partition(p: &SieveParams, ts: &[f64], target: Target) -> bool {
    can_partition_with(p, ts, target, PartitionRule::default())
}

/// Whether `ts` can be split into groups with sums `(m, n)` in the target
/// region, in either order. Groups may be empty.
///
/// Every assignment is visited together with its complement, so iterating
/// `(sum(G), sum(Gᶜ))` over all `2^k` masks covers both orderings.
pub fn can_partition_with(
    p: &SieveParams,
    ts: &[f64],
    target: Target,
    rule: PartitionRule,
) -> bool {
    assert!(ts.len() <= MAX_PARTS, "at most {MAX_PARTS} parts");
    let k = ts.len();
    let full = (1usize << k) - 1;
    let mut sums = [0.0f64; 1 << MAX_PARTS];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + ts[low];
    }
    match (target, rule) {
        (Target::II, PartitionRule::SubsetTypeTwo) => {
            (1..=full).any(|mask| in_type_two_window(p, sums[mask]))
        }
        _ => (0..=full).any(|mask| region(p, target, sums[mask], sums[full ^ mask])),
    }
}

/// Classification of a pair `(t₁, t₂)` after the second Buchstab step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairClass {
    OutOfBase,
    II,
    A,
    B,
    C,
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairClass::OutOfBase => "OutOfBase",
            PairClass::II => "II",
            PairClass::A => "A",
            PairClass::B => "B",
            PairClass::C => "C",
        };
        f.write_str(s)
    }
}

/// `σ−2ϖ ≤ t₁ < 1/2` and `σ−2ϖ ≤ t₂ < min(t₁, (1−t₁)/2)`.
#[inline]
pub fn in_base(p: &SieveParams, t1: f64, t2: f64) -> bool {
    let lo = p.lo();
    lo <= t1 && t1 < 0.5 && lo <= t2 && t2 < t1.min(0.5 * (1.0 - t1))
}

pub fn classify_pair(p: &SieveParams, t1: f64, t2: f64) -> PairClass {
    if !in_base(p, t1, t2) {
        PairClass::OutOfBase
    } else if region_ii(p, t1, t2) {
        PairClass::II
    } else if can_partition(p, &[t1, t2, t2], Target::I) {
        PairClass::A
    } else if region_i(p, t1, t2) && region_i(p, 1.0 - t1 - t2, t2) {
        PairClass::B
    } else {
        PairClass::C
    }
}

/// The ten integration domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainName {
    SA51,
    SA52,
    SA53,
    SA54,
    SB51,
    SB52,
    SB53,
    SC,
    SC2,
    SC4,
}

impl DomainName {
    pub const ALL: [DomainName; 10] = [
        DomainName::SA51,
        DomainName::SA52,
        DomainName::SA53,
        DomainName::SA54,
        DomainName::SB51,
        DomainName::SB52,
        DomainName::SB53,
        DomainName::SC,
        DomainName::SC2,
        DomainName::SC4,
    ];

    pub fn dim(self) -> usize {
        match self {
            DomainName::SA51 => 4,
            DomainName::SA52 => 5,
            DomainName::SA53 => 6,
            DomainName::SA54 => 8,
            DomainName::SB51 => 4,
            DomainName::SB52 => 5,
            DomainName::SB53 => 6,
            DomainName::SC => 2,
            DomainName::SC2 => 3,
            DomainName::SC4 => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DomainName::SA51 => "SA51",
            DomainName::SA52 => "SA52",
            DomainName::SA53 => "SA53",
            DomainName::SA54 => "SA54",
            DomainName::SB51 => "SB51",
            DomainName::SB52 => "SB52",
            DomainName::SB53 => "SB53",
            DomainName::SC => "SC",
            DomainName::SC2 => "SC2",
            DomainName::SC4 => "SC4",
        }
    }

    /// Class the leading pair `(t₁, t₂)` must belong to.
    pub fn pair_class(self) -> PairClass {
        use DomainName::*;
        match self {
            SA51 | SA52 | SA53 | SA54 => PairClass::A,
            SB51 | SB52 | SB53 => PairClass::B,
            SC | SC2 | SC4 => PairClass::C,
        }
    }

    /// Stable small integer used to derive per-domain seeds.
    pub fn index(self) -> u64 {
        DomainName::ALL.iter().position(|&d| d == self).unwrap() as u64
    }
}

impl fmt::Display for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| *c != '_')
            .collect::<String>()
            .to_uppercase();
        DomainName::ALL
            .iter()
            .copied()
            .find(|d| d.as_str() == norm)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

/// Options that change how a domain is transcribed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionOptions {
    /// Bound t₇ by t₆ and t₈ by t₇ in SA54 instead of t₅ for both.
    pub sa54_strict_descent: bool,
    pub partition: PartitionRule,
}

/// Outcome of a membership test: `Ok(())` or the first failing clause.
pub type Membership = std::result::Result<(), &'static str>;

/// A named integration domain.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub name: DomainName,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    params: SieveParams,
    options: RegionOptions,
    // hull of the required pair class as (t1_lo, t1_hi, t2_lo, t2_hi); None if empty
    pair_hull: Option<[f64; 4]>,
}

pub fn domain(p: &SieveParams, name: DomainName) -> RegionSpec {
    domain_with(p, name, RegionOptions::default())
}

pub fn domain_by_name(p: &SieveParams, name: &str) -> Result<RegionSpec> {
    Ok(domain(p, name.parse()?))
}

pub fn domain_with(p: &SieveParams, name: DomainName, options: RegionOptions) -> RegionSpec {
    let dim = name.dim();
    let mut spec = RegionSpec {
        name,
        dim,
        bounds: Vec::new(),
        params: *p,
        options,
        pair_hull: pair_class_hull(p, name.pair_class()),
    };
    spec.bounds = spec.static_box();
    spec
}

const HULL_GRID: usize = 768;
const HULL_PAD_CELLS: f64 = 3.0;

/// Bounding box of `{(t₁, t₂) : classify_pair = class}`, from a grid scan of
/// the base triangle padded by a few cells on every side.
///
/// Class boundaries are lines whose pieces are all far wider than a grid
/// cell, so the padded box contains the whole class; the membership
/// predicate still decides every point exactly.
pub fn pair_class_hull(p: &SieveParams, class: PairClass) -> Option<[f64; 4]> {
    let lo = p.lo();
    let (x0, x1, y0, y1) = (lo, 0.5, lo, 1.0 / 3.0);
    if !(x1 > x0 && y1 > y0) {
        return None;
    }
    let hx = (x1 - x0) / HULL_GRID as f64;
    let hy = (y1 - y0) / HULL_GRID as f64;
    let mut hull: Option<[f64; 4]> = None;
    for i in 0..=HULL_GRID {
        let t1 = x0 + i as f64 * hx;
        for j in 0..=HULL_GRID {
            let t2 = y0 + j as f64 * hy;
            if classify_pair(p, t1, t2) == class {
                let h = hull.get_or_insert([t1, t1, t2, t2]);
                h[0] = h[0].min(t1);
                h[1] = h[1].max(t1);
                h[2] = h[2].min(t2);
                h[3] = h[3].max(t2);
            }
        }
    }
    hull.map(|h| {
        [
            (h[0] - HULL_PAD_CELLS * hx).max(x0),
            (h[1] + HULL_PAD_CELLS * hx).min(x1),
            (h[2] - HULL_PAD_CELLS * hy).max(y0),
            (h[3] + HULL_PAD_CELLS * hy).min(y1),
        ]
    })
}

macro_rules! require {
    ($cond:expr, $clause:expr) => {
        if !$cond {
            return Err($clause);
        }
    };
}

impl RegionSpec {
    pub fn params(&self) -> &SieveParams {
        &self.params
    }

    pub fn options(&self) -> RegionOptions {
        self.options
    }

    pub fn box_volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| (b - a).max(0.0)).product()
    }

    /// Bracket `[lo, hi)` of coordinate `i` given the coordinates before it.
    /// For `i = 0` the prefix is empty.
    pub fn bracket(&self, i: usize, t: &[f64]) -> (f64, f64) {
        let lo = self.params.lo();
        let sum = |k: usize| t[..k].iter().sum::<f64>();
        use DomainName::*;
        match (i, self.name) {
            (0, _) => match self.pair_hull {
                Some(h) => (lo.max(h[0]), h[1].min(0.5)),
                None => (lo, lo),
            },
            (1, _) => match self.pair_hull {
                Some(h) => (lo.max(h[2]), h[3].min(t[0]).min(0.5 * (1.0 - t[0]))),
                None => (lo, lo),
            },
            // A family: descending chain, each below half of what is left
            (2, SA51 | SA52 | SA53 | SA54) | (2, SB51 | SB52 | SB53) => {
                (lo, t[1].min(0.5 * (1.0 - t[0] - t[1])))
            }
            (3, SA51 | SA52 | SA53 | SA54) => (lo, t[2].min(0.5 * (1.0 - sum(3)))),
            (4, SA52) => (t[3], 0.5 * (1.0 - sum(4))),
            (4, SA53 | SA54) => (lo, t[3].min(0.5 * (1.0 - sum(4)))),
            (5, SA53 | SA54) => (lo, t[4].min(0.5 * (1.0 - sum(5)))),
            (6, SA54) => {
                let cap = if self.options.sa54_strict_descent {
                    t[5]
                } else {
                    t[4]
                };
                (lo, cap.min(0.5 * (1.0 - sum(6))))
            }
            (7, SA54) => {
                let cap = if self.options.sa54_strict_descent {
                    t[6]
                } else {
                    t[4]
                };
                (lo, cap.min(0.5 * (1.0 - sum(7))))
            }
            // B family: t₁ is split again after role reversal
            (3, SB51 | SB52 | SB53) => (lo, 0.5 * t[0]),
            (4, SB52) => (t[3], 0.5 * (t[0] - t[3])),
            (4, SB53) => (lo, t[3].min(0.5 * (t[0] - t[3]))),
            (5, SB53) => (lo, t[4].min(0.5 * (t[0] - t[3] - t[4]))),
            // C family: ascending chain above t₂
            (2, SC2 | SC4) => (t[1], 0.5 * (1.0 - t[0] - t[1])),
            (3, SC4) => (t[2], 0.5 * (1.0 - sum(3))),
            _ => unreachable!("coordinate {i} out of range for {}", self.name),
        }
    }

    /// Static hull of the bracket chain, found by propagating interval
    /// bounds through each bracket.
    fn static_box(&self) -> Vec<(f64, f64)> {
        let lo = self.params.lo();
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(self.dim);
        use DomainName::*;
        for i in 0..self.dim {
            let prev = |k: usize| hull[k];
            // lower end of every coordinate is at least σ−2ϖ
            let min_sum = |k: usize| hull[..k].iter().map(|b| b.0).sum::<f64>();
            let b = match (i, self.name) {
                (0, _) => self.bracket(0, &[]),
                (1, _) => match self.pair_hull {
                    Some(h) => (
                        lo.max(h[2]),
                        h[3].min(prev(0).1).min(0.5 * (1.0 - lo)).min(1.0 / 3.0),
                    ),
                    None => (lo, lo),
                },
                (2, SC2 | SC4) => (prev(1).0, 0.5 * (1.0 - min_sum(2))),
                (3, SC4) => (prev(2).0, 0.5 * (1.0 - min_sum(3))),
                (3, SB51 | SB52 | SB53) => (lo, 0.5 * prev(0).1),
                (4, SB52) => (lo, 0.5 * (prev(0).1 - lo)),
                (4, SB53) => (lo, prev(3).1.min(0.5 * (prev(0).1 - lo))),
                (5, SB53) => (lo, prev(4).1.min(0.5 * (prev(0).1 - 2.0 * lo))),
                (4, SA52) => (lo, 0.5 * (1.0 - min_sum(4))),
                (6, SA54) | (7, SA54) if !self.options.sa54_strict_descent => {
                    (lo, prev(4).1.min(0.5 * (1.0 - min_sum(i))))
                }
                _ => {
                    // descending chain: t_i < t_{i-1} and t_i < (1 − Σ_{j<i} t_j)/2;
                    // with t_1 ≥ … ≥ t_i this forces t_i < 1/(i+1)
                    let cap = 1.0 / (i as f64 + 2.0);
                    (lo, prev(i - 1).1.min(0.5 * (1.0 - min_sum(i))).min(cap))
                }
            };
            hull.push(b);
        }
        // the strict-descent variant and the descending A/B chains share the
        // generic rule above; B's third coordinate is a descending step too
        hull
    }

    /// Full membership test, reporting the first clause that fails.
    pub fn check(&self, t: &[f64]) -> Membership {
        require!(t.len() == self.dim, "dimension");
        for (i, (&x, &(a, b))) in t.iter().zip(&self.bounds).enumerate() {
            let _ = i;
            require!(a <= x && x <= b, "bounding box");
        }
        let p = &self.params;
        let lo = p.lo();
        let (t1, t2) = (t[0], t[1]);
        require!(lo <= t1 && t1 < 0.5, "lo <= t1 < 1/2");
        require!(
            lo <= t2 && t2 < t1.min(0.5 * (1.0 - t1)),
            "lo <= t2 < min(t1, (1-t1)/2)"
        );
        let class = classify_pair(p, t1, t2);
        let within = |i: usize| {
            let (a, b) = self.bracket(i, &t[..i]);
            let x = t[i];
            // lower brackets that are a previous coordinate are strict
            let lower_ok = if self.strict_lower(i) { a < x } else { a <= x };
            lower_ok && x < b
        };
        let rule = self.options.partition;
        let part = |ts: &[f64], target| can_partition_with(p, ts, target, rule);
        use DomainName::*;
        match self.name {
            SA51 | SA52 | SA53 | SA54 => {
                require!(class == PairClass::A, "(t1,t2) in A");
                require!(within(2), "t3 bracket");
                require!(
                    !part(&t[..3], Target::II),
                    "(t1,t2,t3) not partitionable into II"
                );
                require!(within(3), "t4 bracket");
                require!(
                    !part(&t[..4], Target::II),
                    "(t1..t4) not partitionable into II"
                );
                let t4_twice = [t[0], t[1], t[2], t[3], t[3]];
                let split_i = part(&t4_twice, Target::I);
                match self.name {
                    SA51 => {
                        require!(!split_i, "(t1..t4,t4) not partitionable into I");
                    }
                    SA52 => {
                        require!(!split_i, "(t1..t4,t4) not partitionable into I");
                        require!(within(4), "t5 bracket");
                        require!(part(&t[..5], Target::II), "(t1..t5) partitionable into II");
                    }
                    _ => {
                        require!(split_i, "(t1..t4,t4) partitionable into I");
                        require!(within(4), "t5 bracket");
                        require!(
                            !part(&t[..5], Target::II),
                            "(t1..t5) not partitionable into II"
                        );
                        require!(within(5), "t6 bracket");
                        require!(
                            !part(&t[..6], Target::II),
                            "(t1..t6) not partitionable into II"
                        );
                        let t6_twice = [t[0], t[1], t[2], t[3], t[4], t[5], t[5]];
                        let split6 = part(&t6_twice, Target::I);
                        if self.name == SA53 {
                            require!(!split6, "(t1..t6,t6) not partitionable into I");
                        } else {
                            require!(split6, "(t1..t6,t6) partitionable into I");
                            require!(within(6), "t7 bracket");
                            require!(
                                !part(&t[..7], Target::II),
                                "(t1..t7) not partitionable into II"
                            );
                            require!(within(7), "t8 bracket");
                            require!(
                                !part(&t[..8], Target::II),
                                "(t1..t8) not partitionable into II"
                            );
                        }
                    }
                }
            }
            SB51 | SB52 | SB53 => {
                require!(class == PairClass::B, "(t1,t2) in B");
                require!(within(2), "t3 bracket");
                require!(
                    !part(&t[..3], Target::II),
                    "(t1,t2,t3) not partitionable into II"
                );
                require!(within(3), "t4 bracket");
                let beta = 1.0 - t[0] - t[1] - t[2];
                let rev = [beta, t[1], t[2], t[3]];
                require!(
                    !part(&rev, Target::II),
                    "(b,t2,t3,t4) not partitionable into II"
                );
                let rev_t4_twice = [beta, t[1], t[2], t[3], t[3]];
                let split_i = part(&rev_t4_twice, Target::I);
                match self.name {
                    SB51 => {
                        require!(!split_i, "(b,t2,t3,t4,t4) not partitionable into I");
                    }
                    SB52 => {
                        require!(!split_i, "(b,t2,t3,t4,t4) not partitionable into I");
                        require!(within(4), "t5 bracket");
                        let rev5 = [beta, t[1], t[2], t[3], t[4]];
                        require!(part(&rev5, Target::II), "(b,t2..t5) partitionable into II");
                    }
                    _ => {
                        require!(split_i, "(b,t2,t3,t4,t4) partitionable into I");
                        require!(within(4), "t5 bracket");
                        let rev5 = [beta, t[1], t[2], t[3], t[4]];
                        require!(
                            !part(&rev5, Target::II),
                            "(b,t2..t5) not partitionable into II"
                        );
                        require!(within(5), "t6 bracket");
                        let rev6 = [beta, t[1], t[2], t[3], t[4], t[5]];
                        require!(
                            !part(&rev6, Target::II),
                            "(b,t2..t6) not partitionable into II"
                        );
                    }
                }
            }
            SC | SC2 | SC4 => {
                require!(class == PairClass::C, "(t1,t2) in C");
                if self.name != SC {
                    require!(within(2), "t3 bracket");
                    let split3 = part(&t[..3], Target::II);
                    if self.name == SC2 {
                        require!(split3, "(t1,t2,t3) partitionable into II");
                    } else {
                        require!(!split3, "(t1,t2,t3) not partitionable into II");
                        require!(within(3), "t4 bracket");
                        require!(part(&t[..4], Target::II), "(t1..t4) partitionable into II");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn member(&self, t: &[f64]) -> bool {
        self.check(t).is_ok()
    }

    // `t_{i-1} < t_i` brackets (SA52's t₅, SB52's t₅, the C family's ascending chain)
    fn strict_lower(&self, i: usize) -> bool {
        use DomainName::*;
        matches!(
            (i, self.name),
            (4, SA52) | (4, SB52) | (2, SC2) | (2, SC4) | (3, SC4)
        )
    }

    /// The tuple whose sum must stay below one: the raw coordinates, or for
    /// the B family the role-reversed `(1−t₁−t₂−t₃, t₂, t₃, t₄, …)`.
    pub fn effective_tuple(&self, t: &[f64]) -> Vec<f64> {
        use DomainName::*;
        match self.name {
            SB51 | SB52 | SB53 => {
                let mut v = vec![1.0 - t[0] - t[1] - t[2]];
                v.extend_from_slice(&t[1..]);
                v
            }
            _ => t.to_vec(),
        }
    }
}
