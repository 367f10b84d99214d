//! Integer cost of each decomposition pattern and the closed-form curves of
//! the known schemes. Everything here is exact; nothing touches `f64`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{transmission_types, DemandSummary, DemandVector, PatternSet};
use crate::error::{Error, Result};
use crate::rational::{from_big, int, ratio, Rational};

/// Binomial coefficient with the degenerate-case convention used by the
/// cost formulas: `C(a, b) = 0` when `a < b` or `b < 0`, and `C(a, 0) = 1`
/// for `a >= 0`.
pub fn binom(a: i64, b: i64) -> BigInt {
    if b < 0 || a < b {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for i in 0..b {
        acc = acc * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    acc
}

fn c(a: usize, b: usize) -> BigInt {
    binom(a as i64, b as i64)
}

/// Unnormalised cost of one pattern set for one demand: rate and per-user
/// memory measured in segments of size `F / C(K, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternCost {
    pub rate_units: BigInt,
    pub memory_units: Vec<BigInt>,
    pub delta_memory_units: Vec<BigInt>,
}

impl PatternCost {
    pub fn max_memory(&self) -> &BigInt {
        self.memory_units.iter().max().expect("at least one user")
    }
}

/// An exact `(M, R)` pair.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TradeoffPoint {
    pub memory: Rational,
    pub rate: Rational,
}

impl TradeoffPoint {
    pub fn new(memory: Rational, rate: Rational) -> Self {
        TradeoffPoint { memory, rate }
    }
}

impl fmt::Debug for TradeoffPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.memory, self.rate)
    }
}

impl fmt::Display for TradeoffPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn rate_uncoded(k: usize, t: usize, n_tilde: usize) -> BigInt {
    BigInt::from((k - t).min(n_tilde)) * c(k, t)
}

fn delta_uncoded(k: usize, t: usize, n_tilde: usize) -> BigInt {
    BigInt::from((k - t).min(n_tilde)) * binom(k as i64 - 1, t as i64 - 1)
}

/// `prod_{n in block} C(m_n, t_n) - prod_{n in block} C(m_n - 1, t_n)`:
/// the number of users sets of this type that contain a leader of `block`.
fn led_count(summary: &DemandSummary, counts: &[usize], block: &[usize]) -> BigInt {
    let all: BigInt = block.iter().map(|&n| c(summary.m(n), counts[n - 1])).product();
    let leaderless: BigInt = block
        .iter()
        .map(|&n| binom(summary.m(n) as i64 - 1, counts[n - 1] as i64))
        .product();
    all - leaderless
}

fn product_outside(summary: &DemandSummary, counts: &[usize], support: &[usize], skip: impl Fn(usize) -> bool) -> BigInt {
    support
        .iter()
        .filter(|&&n| !skip(n))
        .map(|&n| c(summary.m(n), counts[n - 1]))
        .product()
}

/// Rate and memory of pattern `pattern` for demand `d` at parameter `t`.
pub fn pattern_cost(d: &DemandVector, t: usize, pattern: &PatternSet) -> PatternCost {
    let summary = d.summary();
    let (n, k) = (d.files(), d.users());
    let full = BigInt::from(n) * binom(k as i64 - 1, t as i64 - 1);

    if pattern.is_uncoded {
        let delta = delta_uncoded(k, t, summary.n_tilde);
        return PatternCost {
            rate_units: rate_uncoded(k, t, summary.n_tilde),
            memory_units: vec![&full - &delta; k],
            delta_memory_units: vec![delta; k],
        };
    }

    let types = transmission_types(d, t);
    let mut rate = BigInt::zero();
    for ty in &types {
        let support = ty.support();
        let blocks = pattern
            .partition_for(ty)
            .expect("pattern covers every transmission type");
        for block in blocks {
            rate += led_count(&summary, &ty.counts, block)
                * product_outside(&summary, &ty.counts, &support, |x| block.contains(&x));
        }
    }

    let mut delta = vec![BigInt::zero(); k];
    for (user, slot) in (1..=k).zip(delta.iter_mut()) {
        let dk = d.file_of(user);
        for ty in types.iter().filter(|ty| ty.count(dk) > 0) {
            let support = ty.support();
            let own = binom(summary.m(dk) as i64 - 1, ty.count(dk) as i64 - 1);
            for block in pattern.partition_for(ty).expect("pattern covers type") {
                if block.contains(&dk) {
                    continue;
                }
                *slot += &own
                    * led_count(&summary, &ty.counts, block)
                    * product_outside(&summary, &ty.counts, &support, |x| {
                        x == dk || block.contains(&x)
                    });
            }
        }
    }

    PatternCost {
        rate_units: rate,
        memory_units: delta.iter().map(|dm| &full - dm).collect(),
        delta_memory_units: delta,
    }
}

pub fn pattern_rate(d: &DemandVector, t: usize, pattern: &PatternSet) -> BigInt {
    pattern_cost(d, t, pattern).rate_units
}

/// Memory of user `user` (1-based).
pub fn pattern_memory(d: &DemandVector, t: usize, pattern: &PatternSet, user: usize) -> BigInt {
    pattern_cost(d, t, pattern).memory_units[user - 1].clone()
}

/// Weight placed on the uncoded pattern when mixing it with the all-singleton
/// pattern so that every demand class meets the coded-prefetching rate.
pub fn tian_chen_uncoded_alpha(d: &DemandVector, t: usize) -> Rational {
    let s = d.summary();
    let k = d.users() as i64;
    let t = t as i64;
    let n_star = s.n_star as i64;
    let n_tilde = s.n_tilde as i64;
    if n_star == n_tilde {
        return Rational::zero();
    }
    if k - t <= n_tilde {
        ratio(n_tilde - n_star, k - n_star)
    } else {
        ratio((k - t) * (n_tilde - n_star), k * (n_tilde - n_star) + t * n_star)
    }
}

/// The comparison schemes with closed-form achievable points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KnownScheme {
    MaddahAliNiesen,
    Yu,
    TianChen,
    AmiriGunduz,
    GomezVilardebo,
}

impl KnownScheme {
    pub const ALL: [KnownScheme; 5] = [
        KnownScheme::MaddahAliNiesen,
        KnownScheme::Yu,
        KnownScheme::TianChen,
        KnownScheme::AmiriGunduz,
        KnownScheme::GomezVilardebo,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KnownScheme::MaddahAliNiesen => "MN",
            KnownScheme::Yu => "Yu",
            KnownScheme::TianChen => "TianChen",
            KnownScheme::AmiriGunduz => "Amiri",
            KnownScheme::GomezVilardebo => "Gomez",
        }
    }

    /// The Amiri–Gündüz point lies on the time-sharing line between the
    /// `t = 1` points of the Yu and TianChen schemes.
    pub fn is_dominated(self) -> bool {
        matches!(self, KnownScheme::AmiriGunduz)
    }
}

/// Closed-form points of a known scheme. For the Maddah-Ali–Niesen scheme the
/// trivial `(0, N)` point comes first, followed by `t = 0..=K`; the other
/// parameterised schemes are listed in parameter order.
pub fn known_scheme_points(scheme: KnownScheme, n: usize, k: usize) -> Result<Vec<TradeoffPoint>> {
    let (ni, ki) = (n as i64, k as i64);
    let regime = |requirement| Error::Regime {
        scheme: scheme.label(),
        requirement,
        n,
        k,
    };
    let pts = match scheme {
        KnownScheme::MaddahAliNiesen => std::iter::once(TradeoffPoint::new(int(0), int(ni)))
            .chain((0..=ki).map(|t| TradeoffPoint::new(ratio(t * ni, ki), ratio(ki - t, 1 + t))))
            .collect(),
        KnownScheme::Yu => {
            let nt = n.min(k) as i64;
            (0..=ki)
                .map(|t| {
                    let num = binom(ki, t + 1) - binom(ki - nt, t + 1);
                    TradeoffPoint::new(ratio(t * ni, ki), from_big(&num) / from_big(&binom(ki, t)))
                })
                .collect()
        }
        KnownScheme::TianChen => {
            if n > k {
                return Err(regime("N <= K"));
            }
            if k < 2 {
                return Err(regime("K >= 2"));
            }
            (0..=ki)
                .map(|t| {
                    TradeoffPoint::new(
                        ratio(t * ((ni - 1) * t + ki - ni), ki * (ki - 1)),
                        ratio(ni * (ki - t), ki),
                    )
                })
                .collect()
        }
        KnownScheme::AmiriGunduz => {
            if n > k {
                return Err(regime("N <= K"));
            }
            vec![TradeoffPoint::new(ratio(ni - 1, ki), ratio(ni * (2 * ki - ni), 2 * ki))]
        }
        KnownScheme::GomezVilardebo => {
            if n > k {
                return Err(regime("N <= K"));
            }
            (1..=ni)
                .map(|g| {
                    TradeoffPoint::new(
                        ratio(ni, ki * g),
                        int(ni) - ratio(ni * (ni + 1), ki * (g + 1)),
                    )
                })
                .collect()
        }
    };
    Ok(pts)
}

/// Normalised point of a single pattern used on all instances: the largest
/// user memory and the rate, both divided by `C(K, t)`.
pub fn normalized_point(cost: &PatternCost, k: usize, t: usize) -> TradeoffPoint {
    let f = from_big(&c(k, t));
    TradeoffPoint::new(from_big(cost.max_memory()) / &f, from_big(&cost.rate_units) / &f)
}

pub(crate) fn cost_is_nonnegative(cost: &PatternCost) -> bool {
    !cost.rate_units.is_negative()
        && cost.memory_units.iter().all(|m| !m.is_negative())
        && cost.delta_memory_units.iter().all(|m| !m.is_negative())
}
