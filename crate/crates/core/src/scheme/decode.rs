use std::collections::HashMap;

use super::{InstancePlan, SegmentId, SegmentLayout, Transmission, TransmissionKind, UserCache};
use crate::combinatorics::{DemandVector, UserSet};
use crate::error::{Error, Result};
use crate::field::{rref_gf2m, BitRow, FieldElement};
use crate::rank_metric::SystematicRankCode;

/// Output of the constructive decoder for one user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// The requested file, in the order of `SegmentLayout::file_segments`.
    pub file: Vec<FieldElement>,
    /// Delivered symbols that only involve the user's own segments.
    pub collected: usize,
    /// GF(2) rank of cached parities plus collected symbols.
    pub rank: usize,
}

/// Decodes in three steps: collect delivered symbols lying entirely in the
/// user's segment space, resolve the user's segments through the rank-metric
/// code, then rebuild each missing segment of the requested file.
pub fn decode_constructive(
    layout: &SegmentLayout,
    code: &SystematicRankCode,
    cache: &UserCache,
    d: &DemandVector,
    plan: &InstancePlan,
    log: &[Transmission],
) -> Result<Decoded> {
    let user = cache.user;
    let p = code.info_len();
    let local: HashMap<usize, usize> = cache.allocated.iter().enumerate().map(|(l, &g)| (g, l)).collect();

    let collected: Vec<&Transmission> =
        log.iter().filter(|tx| tx.support.iter().all(|s| local.contains_key(s))).collect();

    let mut combos: Vec<(BitRow, FieldElement)> = Vec::with_capacity(cache.parities.len() + collected.len());
    for (j, &v) in cache.parities.iter().enumerate() {
        let mut row = BitRow::zeros(code.code_len());
        row.set(p + j, true);
        combos.push((row, v));
    }
    for tx in &collected {
        let mut row = BitRow::zeros(code.code_len());
        for s in &tx.support {
            row.set(local[s], true);
        }
        combos.push((row, tx.value));
    }
    let rank = crate::field::rank_gf2(&crate::field::BitMatrix::from_rows(
        combos.iter().map(|(g, _)| g.clone()).collect(),
        code.code_len(),
    ));
    let info = code.recover(&combos)?;
    let known: HashMap<usize, FieldElement> = cache.allocated.iter().copied().zip(info).collect();

    let mut uncoded: HashMap<usize, FieldElement> = HashMap::new();
    let mut pieces: HashMap<(usize, UserSet, &[usize]), FieldElement> = HashMap::new();
    for tx in log {
        match &tx.kind {
            TransmissionKind::Uncoded => {
                uncoded.insert(tx.support[0], tx.value);
            }
            TransmissionKind::Decomposed { block, users, .. } => {
                pieces.insert((tx.instance, *users, block.as_slice()), tx.value);
            }
        }
    }

    let summary = d.summary();
    let want = d.file_of(user);
    let unresolvable = |id: SegmentId| Error::Unresolvable { user, segment: id.to_string() };
    let mut file = Vec::new();
    for idx in layout.file_segments(want) {
        if let Some(&v) = known.get(&idx) {
            file.push(v);
            continue;
        }
        let id = layout.id(idx);
        let pattern = plan.pattern_of_instance(d, id.instance).ok_or_else(|| unresolvable(id))?;
        if pattern.is_uncoded {
            file.push(*uncoded.get(&idx).ok_or_else(|| unresolvable(id))?);
            continue;
        }
        let b = id.users.with(user);
        let ty = summary.type_of(b);
        let block = pattern
            .partition_for(&ty)
            .and_then(|part| part.iter().find(|blk| blk.contains(&want)))
            .ok_or_else(|| unresolvable(id))?;
        let lookup = |users: UserSet| pieces.get(&(id.instance, users, block.as_slice())).copied();
        let combined = match lookup(b) {
            Some(v) => v,
            None => {
                // No leader of the block in B: rebuild the piece from the
                // delivered pieces on the other user sets of the same shape.
                let members = summary.requesters_of(block);
                let outside = b.difference(members);
                let q = b.intersection(members);
                let pool = q.union(summary.leader_set(block));
                let mut acc = FieldElement::ZERO;
                for v in same_shape_subsets(pool, q, &summary.requester_sets) {
                    if v != q {
                        acc += lookup(v.union(outside)).ok_or_else(|| unresolvable(id))?;
                    }
                }
                acc
            }
        };
        // every other term of the piece contains this user
        let mut value = combined;
        for s in layout.piece_support(d, id.instance, block, b) {
            if s != idx {
                value += *known.get(&s).ok_or_else(|| unresolvable(id))?;
            }
        }
        file.push(value);
    }
    Ok(Decoded { file, collected: collected.len(), rank })
}

/// Subsets `V` of `pool` holding as many requesters of each file as `like`.
pub(crate) fn same_shape_subsets(pool: UserSet, like: UserSet, requesters: &[UserSet]) -> Vec<UserSet> {
    let items = pool.to_vec();
    let target: Vec<usize> = requesters.iter().map(|r| r.intersection(like).len()).collect();
    (0u64..1 << items.len())
        .map(|mask| UserSet::from_users(items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &u)| u)))
        .filter(|v| v.len() == like.len())
        .filter(|v| requesters.iter().zip(&target).all(|(r, &c)| r.intersection(*v).len() == c))
        .collect()
}

/// What plain Gaussian elimination over all segments can determine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    /// One entry per segment of the requested file; `None` if undetermined.
    pub file: Vec<Option<FieldElement>>,
    pub consistent: bool,
}

impl OracleOutcome {
    pub fn complete(&self) -> Option<Vec<FieldElement>> {
        self.file.iter().copied().collect()
    }
}

/// Treats each cached parity (through the parity generator `generator`) and
/// each delivered symbol as a linear equation in every segment and solves.
pub fn decode_oracle(
    layout: &SegmentLayout,
    code: &SystematicRankCode,
    generator: &[Vec<FieldElement>],
    cache: &UserCache,
    d: &DemandVector,
    log: &[Transmission],
) -> OracleOutcome {
    let cols = layout.total();
    let field = code.field();
    let mut rows = Vec::with_capacity(cache.parities.len() + log.len());
    for (coeffs, &v) in generator.iter().zip(&cache.parities) {
        let mut row = vec![FieldElement::ZERO; cols + 1];
        for (&g, &c) in cache.allocated.iter().zip(coeffs) {
            row[g] = c;
        }
        row[cols] = v;
        rows.push(row);
    }
    for tx in log {
        let mut row = vec![FieldElement::ZERO; cols + 1];
        for &s in &tx.support {
            row[s] += FieldElement::ONE;
        }
        row[cols] = tx.value;
        rows.push(row);
    }
    let (reduced, pivots) = rref_gf2m(field, rows, cols);
    let consistent = reduced[pivots.len()..].iter().all(|r| r[cols].is_zero());
    let mut determined: HashMap<usize, FieldElement> = HashMap::new();
    for (row, &c) in reduced.iter().zip(&pivots) {
        if row[..cols].iter().enumerate().all(|(j, v)| j == c || v.is_zero()) {
            determined.insert(c, row[cols]);
        }
    }
    let file = layout
        .file_segments(d.file_of(cache.user))
        .into_iter()
        .map(|i| determined.get(&i).copied())
        .collect();
    OracleOutcome { file, consistent }
}
