//! Executable form of the coding scheme: instance planning, rank-metric
//! prefetching, delivery, both decoders and the structural checks.

mod checks;
mod decode;
mod run;

pub use checks::{
    check_hidden_connection, check_reconstruction, check_redundancy_reduction,
    check_separation_independence, check_separation_independence_with, HiddenConnectionReport,
    ReconstructionReport, RedundancyReport, SeparationReport, Symbol,
};
pub use decode::{decode_constructive, decode_oracle, Decoded, OracleOutcome};
pub use run::{
    verify_end_to_end, verify_single_pattern, weighted_point, DemandRun, EndToEndReport, SinglePatternReport,
    UserRun,
};

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{
    subsets_of_size, transmission_types, user_subsets, DemandSummary, DemandVector, PatternSet,
    TransmissionType, UserSet,
};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Gf2m};
use crate::rank_metric::SystematicRankCode;
use crate::rational::{lcm_of_denominators, Rational};
use crate::tradeoff::{binom, pattern_cost};

/// `W^(i)_{n,S}`: instance `i` (1-based), file `n` (1-based), user set `S`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId {
    pub instance: usize,
    pub file: usize,
    pub users: UserSet,
}

impl fmt::Debug for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W({})[{},{:?}]", self.instance, self.file, self.users)
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Dense numbering of all `r N C(K,t)` segments, ordered by instance, then
/// file, then user set in lexicographic order.
#[derive(Clone, Debug)]
pub struct SegmentLayout {
    n: usize,
    k: usize,
    t: usize,
    r: usize,
    subsets: Vec<UserSet>,
    rank: HashMap<UserSet, usize>,
}

impl SegmentLayout {
    pub fn new(n: usize, k: usize, t: usize, r: usize) -> Self {
        let subsets: Vec<UserSet> = user_subsets(k, t).collect();
        let rank = subsets.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        SegmentLayout { n, k, t, r, subsets, rank }
    }

    pub fn files(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn instances(&self) -> usize {
        self.r
    }

    pub fn subsets(&self) -> &[UserSet] {
        &self.subsets
    }

    pub fn total(&self) -> usize {
        self.r * self.n * self.subsets.len()
    }

    pub fn index(&self, id: SegmentId) -> usize {
        let s = self.rank[&id.users];
        ((id.instance - 1) * self.n + (id.file - 1)) * self.subsets.len() + s
    }

    pub fn id(&self, index: usize) -> SegmentId {
        let per = self.subsets.len();
        let users = self.subsets[index % per];
        let rest = index / per;
        SegmentId { instance: rest / self.n + 1, file: rest % self.n + 1, users }
    }

    /// Segments `W_{n,S}` with `user` in `S`, in layout order.
    pub fn user_segments(&self, user: usize) -> Vec<usize> {
        (0..self.total()).filter(|&i| self.id(i).users.contains(user)).collect()
    }

    /// All segments of `file`, ordered by instance and user set.
    pub fn file_segments(&self, file: usize) -> Vec<usize> {
        (1..=self.r)
            .flat_map(|instance| {
                self.subsets.iter().map(move |&users| SegmentId { instance, file, users })
            })
            .map(|id| self.index(id))
            .collect()
    }

    /// Support of `xor_{n in block} xor_{k in B, d_k = n} W^(i)_{n, B \ k}`.
    pub fn piece_support(&self, d: &DemandVector, instance: usize, block: &[usize], b: UserSet) -> Vec<usize> {
        let mut out: Vec<usize> = b
            .iter()
            .filter(|&k| block.contains(&d.file_of(k)))
            .map(|k| self.index(SegmentId { instance, file: d.file_of(k), users: b.without(k) }))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Integer instance counts per demand and pattern set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub demand: DemandVector,
    /// Nonzero counts; the uncoded pattern, if used, comes first.
    pub counts: Vec<(PatternSet, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstancePlan {
    pub t: usize,
    pub r: usize,
    pub entries: Vec<PlanEntry>,
}

impl InstancePlan {
    pub fn entry(&self, d: &DemandVector) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| &e.demand == d)
    }

    /// Pattern set used on instance `i` (1-based) for demand `d`:
    /// consecutive blocks of instances in plan order.
    pub fn pattern_of_instance(&self, d: &DemandVector, instance: usize) -> Option<&PatternSet> {
        let mut end = 0;
        for (p, c) in &self.entry(d)?.counts {
            end += c;
            if instance <= end {
                return Some(p);
            }
        }
        None
    }

    /// `sum_P r_P R_P` for demand `d`.
    pub fn rate_units(&self, d: &DemandVector) -> Option<BigInt> {
        let e = self.entry(d)?;
        Some(e.counts.iter().map(|(p, c)| BigInt::from(*c) * pattern_cost(d, self.t, p).rate_units).sum())
    }

    /// `sum_P r_P M_{P,k}` for every user of demand `d`.
    pub fn memory_units_for(&self, d: &DemandVector) -> Option<Vec<BigInt>> {
        let e = self.entry(d)?;
        let mut acc = vec![BigInt::zero(); d.users()];
        for (p, c) in &e.counts {
            for (a, m) in acc.iter_mut().zip(pattern_cost(d, self.t, p).memory_units) {
                *a += BigInt::from(*c) * m;
            }
        }
        Some(acc)
    }

    /// `sum_P r_P Delta M_{P,k}` for every user of demand `d`.
    pub fn delta_units_for(&self, d: &DemandVector) -> Option<Vec<BigInt>> {
        let e = self.entry(d)?;
        let mut acc = vec![BigInt::zero(); d.users()];
        for (p, c) in &e.counts {
            for (a, m) in acc.iter_mut().zip(pattern_cost(d, self.t, p).delta_memory_units) {
                *a += BigInt::from(*c) * m;
            }
        }
        Some(acc)
    }

    /// Cache size in segments: the largest per-user memory over all demands.
    pub fn memory_units(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|e| self.memory_units_for(&e.demand).unwrap())
            .max()
            .and_then(|m| m.to_usize())
            .unwrap_or(0)
    }
}

/// Scales pattern weights to integer instance counts over `r` instances,
/// `r` being the least common multiple of the weight denominators.
pub fn plan_instances(t: usize, alphas: &[(DemandVector, Vec<(PatternSet, Rational)>)]) -> Result<InstancePlan> {
    let r_big = lcm_of_denominators(alphas.iter().flat_map(|(_, w)| w.iter().map(|(_, a)| a)));
    let r = r_big
        .to_usize()
        .filter(|&r| r <= 1 << 20)
        .ok_or_else(|| Error::InvalidConfig(format!("instance count {r_big} is too large")))?;
    let scale = Rational::from_integer(r_big);
    let entries = alphas
        .iter()
        .map(|(d, weights)| {
            let mut counts = Vec::new();
            let mut total = 0;
            for (p, a) in weights {
                let c = (a * &scale).to_integer().to_usize().ok_or_else(|| {
                    Error::InvalidConfig(format!("negative weight for demand {d}"))
                })?;
                total += c;
                if c > 0 {
                    counts.push((p.clone(), c));
                }
            }
            if total != r {
                return Err(Error::InvalidConfig(format!("weights for demand {d} do not sum to one")));
            }
            counts.sort_by_key(|(p, _)| !p.is_uncoded);
            Ok(PlanEntry { demand: d.clone(), counts })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstancePlan { t, r, entries })
}

/// The parities one user stores, with the segments they encode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserCache {
    pub user: usize,
    /// Segment indices feeding the user's code, in code order.
    pub allocated: Vec<usize>,
    pub parities: Vec<FieldElement>,
}

/// Result of the placement phase. The segment values are the ground truth
/// that decoders are checked against; decoders never read them.
#[derive(Clone, Debug)]
pub struct Prefetch {
    pub layout: SegmentLayout,
    pub code: SystematicRankCode,
    pub segments: Vec<FieldElement>,
    pub caches: Vec<UserCache>,
}

impl Prefetch {
    pub fn segment(&self, id: SegmentId) -> FieldElement {
        self.segments[self.layout.index(id)]
    }
}

/// Draws random segments and stores `memory_units` rank-metric parities of
/// each user's `r N C(K-1,t-1)` segments.
pub fn prefetch(
    n: usize,
    k: usize,
    t: usize,
    r: usize,
    memory_units: usize,
    field: Gf2m,
    seed: u64,
) -> Result<Prefetch> {
    let layout = SegmentLayout::new(n, k, t, r);
    let p = r * n * binom(k as i64 - 1, t as i64 - 1).to_usize().unwrap_or(0);
    let code = SystematicRankCode::new(field, p, p + memory_units)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments: Vec<FieldElement> = (0..layout.total()).map(|_| field.random(&mut rng)).collect();
    let caches = (1..=k)
        .map(|user| {
            let allocated = layout.user_segments(user);
            debug_assert_eq!(allocated.len(), p);
            let info: Vec<FieldElement> = allocated.iter().map(|&i| segments[i]).collect();
            UserCache { user, parities: code.parities(&info), allocated }
        })
        .collect();
    Ok(Prefetch { layout, code, segments, caches })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TransmissionKind {
    Uncoded,
    Decomposed { ty: TransmissionType, block: Vec<usize>, users: UserSet },
}

/// One delivered symbol: the XOR of the segments in `support`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub instance: usize,
    pub kind: TransmissionKind,
    pub support: Vec<usize>,
    pub value: FieldElement,
}

fn users_with_type(summary: &DemandSummary, k: usize, ty: &TransmissionType) -> Vec<UserSet> {
    user_subsets(k, ty.total()).filter(|&b| &summary.type_of(b) == ty).collect()
}

/// Files never cached in full by the users outside `S`: the
/// lexicographically first `N* - K + t` demanded files whose requesters all
/// lie in `s`.
fn fully_inside(summary: &DemandSummary, s: UserSet, size: usize) -> Option<Vec<usize>> {
    let support = summary.support();
    subsets_of_size(support.len(), size)
        .map(|idx| idx.iter().map(|&i| support[i - 1]).collect::<Vec<_>>())
        .find(|files| files.iter().all(|&f| summary.requesters(f).is_subset(s)))
}

/// The delivery for demand `d` under `plan`.
pub fn deliver(d: &DemandVector, plan: &InstancePlan, pre: &Prefetch) -> Result<Vec<Transmission>> {
    let entry = plan.entry(d).ok_or_else(|| Error::PlanMismatch(d.to_string()))?;
    let layout = &pre.layout;
    let (k, t) = (layout.users(), layout.t());
    let summary = d.summary();
    let support = summary.support();
    let n_star = support.len();
    let value = |s: &[usize]| s.iter().map(|&i| pre.segments[i]).sum::<FieldElement>();
    let mut out = Vec::new();
    let mut start = 1;
    for (pattern, count) in &entry.counts {
        let instances = start..start + count;
        start += count;
        if pattern.is_uncoded {
            let mut send = |instance: usize, file: usize, users: UserSet| {
                let idx = layout.index(SegmentId { instance, file, users });
                out.push(Transmission {
                    instance,
                    kind: TransmissionKind::Uncoded,
                    support: vec![idx],
                    value: pre.segments[idx],
                });
            };
            if k - t < n_star {
                for &s in layout.subsets() {
                    let inside = fully_inside(&summary, s, n_star + t - k).ok_or_else(|| {
                        Error::VerificationFailure(format!("no fully covered file set for {s} under {d}"))
                    })?;
                    for i in instances.clone() {
                        for &f in support.iter().filter(|f| !inside.contains(f)) {
                            send(i, f, s);
                        }
                    }
                }
            } else {
                let size = (k - t).min(summary.n_tilde);
                let mut files = support.clone();
                files.extend((1..=layout.files()).filter(|f| !support.contains(f)).take(size - n_star));
                files.sort_unstable();
                for &f in &files {
                    for i in instances.clone() {
                        for &s in layout.subsets() {
                            send(i, f, s);
                        }
                    }
                }
            }
            continue;
        }
        for ty in transmission_types(d, t) {
            let partition = pattern
                .partition_for(&ty)
                .ok_or_else(|| Error::PlanMismatch(format!("pattern misses type {ty} of {d}")))?;
            for block in partition {
                let leaders = summary.leader_set(block);
                for b in users_with_type(&summary, k, &ty) {
                    if b.intersection(leaders).is_empty() {
                        continue;
                    }
                    for i in instances.clone() {
                        let support = layout.piece_support(d, i, block, b);
                        out.push(Transmission {
                            instance: i,
                            kind: TransmissionKind::Decomposed { ty: ty.clone(), block: block.clone(), users: b },
                            value: value(&support),
                            support,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
