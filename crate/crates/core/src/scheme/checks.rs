//! Symbolic checks on single-instance delivery: segments are tracked by
//! `(file, user set)` and combinations by their GF(2) supports.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;

use super::decode::same_shape_subsets;
use super::users_with_type;
use crate::combinatorics::{transmission_types, user_subsets, DemandVector, PatternSet, UserSet};
use crate::error::{Error, Result};
use crate::field::{rank_gf2, BitMatrix, BitRow};

/// A segment `W_{n,S}` without instance index.
pub type Symbol = (usize, UserSet);

fn piece(d: &DemandVector, block: &[usize], b: UserSet) -> Vec<Symbol> {
    let mut out: Vec<Symbol> =
        b.iter().filter(|&k| block.contains(&d.file_of(k))).map(|k| (d.file_of(k), b.without(k))).collect();
    out.sort();
    out
}

/// Unions of one `size`-subset from each `pool`.
fn product_choices(parts: &[(UserSet, usize)]) -> Vec<UserSet> {
    if parts.is_empty() {
        return vec![UserSet::EMPTY];
    }
    parts
        .iter()
        .map(|&(pool, size)| {
            let items = pool.to_vec();
            items
                .iter()
                .copied()
                .combinations(size)
                .map(UserSet::from_users)
                .collect::<Vec<_>>()
        })
        .multi_cartesian_product()
        .map(|sets| sets.into_iter().fold(UserSet::EMPTY, UserSet::union))
        .collect()
}

fn gf2_rank(rows: &[Vec<Symbol>], index: &HashMap<Symbol, usize>) -> usize {
    let bits: Vec<BitRow> = rows
        .iter()
        .map(|r| {
            let mut row = BitRow::zeros(index.len());
            for s in r {
                let i = index[s];
                row.set(i, !row.get(i));
            }
            row
        })
        .collect();
    rank_gf2(&BitMatrix::from_rows(bits, index.len()))
}

fn describe(symbols: &[Symbol]) -> String {
    symbols.iter().map(|(n, s)| format!("W[{n},{s:?}]")).join("+")
}

/// Line-22 style supports for `pattern`: every block and every user set of
/// the block's type that contains one of the block's leaders.
fn delivered_supports(d: &DemandVector, t: usize, pattern: &PatternSet) -> Vec<Vec<Symbol>> {
    let summary = d.summary();
    let mut out = Vec::new();
    for ty in transmission_types(d, t) {
        let partition = pattern.partition_for(&ty).expect("pattern covers every type");
        for block in partition {
            let leaders = summary.leader_set(block);
            for b in users_with_type(&summary, d.users(), &ty) {
                if !b.intersection(leaders).is_empty() {
                    out.push(piece(d, block, b));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundancyReport {
    pub configurations: usize,
}

/// For every type, variable set of files, fixed user set `A` and leaderless
/// choice `Q`, the XOR over all same-shape `V` in `Q` plus leaders of the
/// pieces on `V + A` cancels to zero.
pub fn check_redundancy_reduction(d: &DemandVector, t: usize) -> Result<RedundancyReport> {
    let summary = d.summary();
    let mut configurations = 0;
    for ty in transmission_types(d, t) {
        let support = ty.support();
        for mask in 1u32..1 << support.len() {
            let variable: Vec<usize> =
                support.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &n)| n).collect();
            let fixed: Vec<(UserSet, usize)> = support
                .iter()
                .filter(|n| !variable.contains(n))
                .map(|&n| (summary.requesters(n), ty.count(n)))
                .collect();
            let leaderless: Vec<(UserSet, usize)> = variable
                .iter()
                .map(|&n| (summary.requesters(n).without(summary.leader(n).unwrap()), ty.count(n)))
                .collect();
            if leaderless.iter().any(|&(pool, size)| pool.len() < size) {
                continue;
            }
            let leaders = summary.leader_set(&variable);
            for a in product_choices(&fixed) {
                for q in product_choices(&leaderless) {
                    let mut acc: HashSet<Symbol> = HashSet::new();
                    for v in same_shape_subsets(q.union(leaders), q, &summary.requester_sets) {
                        for sym in piece(d, &variable, v.union(a)) {
                            if !acc.insert(sym) {
                                acc.remove(&sym);
                            }
                        }
                    }
                    if !acc.is_empty() {
                        return Err(Error::IdentityViolation(format!(
                            "demand {d}, type {ty}, files {variable:?}, A={a:?}, Q={q:?}"
                        )));
                    }
                    configurations += 1;
                }
            }
        }
    }
    Ok(RedundancyReport { configurations })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    pub w_sets: usize,
    pub transmissions: usize,
}

pub fn check_separation_independence(d: &DemandVector, t: usize, pattern: &PatternSet) -> Result<SeparationReport> {
    check_separation_independence_with(d, t, pattern, &[])
}

/// Groups the pattern's delivered pieces, plus `extra` supports, by the
/// segment groups they draw from. Fails if two groups share a segment, a
/// support straddles groups, or the supports within a group are dependent.
pub fn check_separation_independence_with(
    d: &DemandVector,
    t: usize,
    pattern: &PatternSet,
    extra: &[Vec<Symbol>],
) -> Result<SeparationReport> {
    assert!(!pattern.is_uncoded, "the uncoded pattern has no segment groups");
    let summary = d.summary();
    let mut owner: HashMap<Symbol, usize> = HashMap::new();
    let mut groups: Vec<String> = Vec::new();
    for ty in transmission_types(d, t) {
        let partition = pattern.partition_for(&ty).expect("pattern covers every type");
        for block in partition {
            let fixed: Vec<(UserSet, usize)> = ty
                .support()
                .into_iter()
                .filter(|n| !block.contains(n))
                .map(|n| (summary.requesters(n), ty.count(n)))
                .collect();
            let variable: Vec<(UserSet, usize)> =
                block.iter().map(|&n| (summary.requesters(n), ty.count(n))).collect();
            for a in product_choices(&fixed) {
                let id = groups.len();
                groups.push(format!("type {ty}, block {block:?}, A={a:?}"));
                for b in product_choices(&variable) {
                    for sym in piece(d, block, b.union(a)) {
                        if let Some(&other) = owner.get(&sym) {
                            if other != id {
                                return Err(Error::DisjointnessViolation(format!(
                                    "W[{},{:?}] in [{}] and [{}]",
                                    sym.0, sym.1, groups[other], groups[id]
                                )));
                            }
                        }
                        owner.insert(sym, id);
                    }
                }
            }
        }
    }

    let delivered = delivered_supports(d, t, pattern);
    let mut members: Vec<Vec<Vec<Symbol>>> = vec![Vec::new(); groups.len()];
    for support in delivered.iter().chain(extra) {
        let ids: BTreeSet<Option<usize>> = support.iter().map(|s| owner.get(s).copied()).collect();
        match (ids.len(), ids.first()) {
            (1, Some(Some(id))) => members[*id].push(support.clone()),
            _ => {
                return Err(Error::DisjointnessViolation(format!(
                    "{} does not lie in a single group",
                    describe(support)
                )))
            }
        }
    }
    for (id, rows) in members.iter().enumerate() {
        let index: HashMap<Symbol, usize> = owner
            .iter()
            .filter(|(_, &o)| o == id)
            .map(|(s, _)| *s)
            .sorted()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        if gf2_rank(rows, &index) != rows.len() {
            return Err(Error::DependenceFound(groups[id].clone()));
        }
    }
    Ok(SeparationReport { w_sets: groups.len(), transmissions: delivered.len() + extra.len() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub delivered: usize,
    pub pieces: usize,
    pub rank: usize,
}

/// Every block piece on every user set of each type, leaderless or not, is
/// in the GF(2) span of the delivered pieces.
pub fn check_reconstruction(d: &DemandVector, t: usize, pattern: &PatternSet) -> Result<ReconstructionReport> {
    let summary = d.summary();
    let delivered = delivered_supports(d, t, pattern);
    let mut all = Vec::new();
    for ty in transmission_types(d, t) {
        for block in pattern.partition_for(&ty).expect("pattern covers every type") {
            for b in users_with_type(&summary, d.users(), &ty) {
                all.push(piece(d, block, b));
            }
        }
    }
    let index: HashMap<Symbol, usize> = (1..=d.files())
        .flat_map(|n| user_subsets(d.users(), t).map(move |s| (n, s)))
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let rank = gf2_rank(&delivered, &index);
    let combined: Vec<Vec<Symbol>> = delivered.iter().chain(&all).cloned().collect();
    if gf2_rank(&combined, &index) != rank {
        return Err(Error::VerificationFailure(format!(
            "pieces of demand {d} are not spanned by the delivered symbols"
        )));
    }
    Ok(ReconstructionReport { delivered: delivered.len(), pieces: all.len(), rank })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenConnectionReport {
    /// Per-file parts of the uncoded-prefetching transmissions.
    pub pieces: usize,
    /// Segment occurrences across those parts.
    pub segment_occurrences: usize,
    /// Distinct parts after removing repeats.
    pub distinct: usize,
    /// Symbols delivered by the all-singleton pattern.
    pub singleton_delivery: usize,
}

/// Splitting every uncoded-prefetching transmission `xor_{k in B} W_{d_k, B \ k}`
/// by file and removing repeats gives exactly the all-singleton delivery.
pub fn check_hidden_connection(d: &DemandVector, t: usize) -> Result<HiddenConnectionReport> {
    let summary = d.summary();
    let mut parts = Vec::new();
    for b in user_subsets(d.users(), t + 1) {
        for n in summary.support() {
            if !b.intersection(summary.requesters(n)).is_empty() {
                parts.push(piece(d, &[n], b));
            }
        }
    }
    let occurrences = parts.iter().map(Vec::len).sum();
    let distinct: BTreeSet<Vec<Symbol>> = parts.iter().cloned().collect();
    let delivered: BTreeSet<Vec<Symbol>> =
        delivered_supports(d, t, &PatternSet::all_singletons(d, t)).into_iter().collect();
    if distinct != delivered {
        let missing: Vec<String> = delivered.symmetric_difference(&distinct).map(|s| describe(s)).collect();
        return Err(Error::MismatchFound(missing.join(", ")));
    }
    Ok(HiddenConnectionReport {
        pieces: parts.len(),
        segment_occurrences: occurrences,
        distinct: distinct.len(),
        singleton_delivery: delivered.len(),
    })
}
