//! Users' subsets, demand classes, transmission types and decomposition
//! pattern sets.
//!
//! Files and users are 1-based throughout, matching the way demand vectors
//! are written by hand: `(1,1,2,3)` means users 1 and 2 request file 1, user 3
//! requests file 2 and user 4 requests file 3.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of pattern sets enumerated per demand.
pub const DEFAULT_PATTERN_CAP: usize = 100_000;

/// A set of users encoded as a bitmask; bit `k - 1` is user `k`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserSet(u32);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_users(users: impl IntoIterator<Item = usize>) -> Self {
        let mut set = UserSet::EMPTY;
        for u in users {
            set.insert(u);
        }
        set
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn insert(&mut self, user: usize) {
        debug_assert!((1..=32).contains(&user));
        self.0 |= 1 << (user - 1);
    }

    pub fn with(self, user: usize) -> Self {
        let mut s = self;
        s.insert(user);
        s
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1 << (user - 1)))
    }

    pub fn contains(self, user: usize) -> bool {
        (1..=32).contains(&user) && self.0 & (1 << (user - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: UserSet) -> UserSet {
        UserSet(self.0 | other.0)
    }

    pub fn intersection(self, other: UserSet) -> UserSet {
        UserSet(self.0 & other.0)
    }

    pub fn difference(self, other: UserSet) -> UserSet {
        UserSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |b| self.0 & (1 << b) != 0).map(|b| b + 1)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().join(","))
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.iter().join(","))
    }
}

/// All `size`-subsets of `{1..ground}` in lexicographic order.
pub fn subsets_of_size(ground: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=ground).combinations(size)
}

pub fn user_subsets(ground: usize, size: usize) -> impl Iterator<Item = UserSet> {
    subsets_of_size(ground, size).map(UserSet::from_users)
}

/// Which file each user requests.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DemandVector {
    files: usize,
    entries: Vec<usize>,
}

impl DemandVector {
    pub fn new(files: usize, entries: Vec<usize>) -> Result<Self> {
        if files == 0 || entries.is_empty() {
            return Err(Error::InvalidConfig("demand needs N >= 1 and K >= 1".into()));
        }
        if let Some(bad) = entries.iter().find(|&&e| e == 0 || e > files) {
            return Err(Error::InvalidConfig(format!(
                "demand entry {bad} outside 1..={files}"
            )));
        }
        Ok(DemandVector { files, entries })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// File requested by user `k` (1-based).
    pub fn file_of(&self, user: usize) -> usize {
        self.entries[user - 1]
    }

    pub fn summary(&self) -> DemandSummary {
        DemandSummary::new(self)
    }

    /// Representative of this demand's class.
    pub fn canonical(&self) -> DemandVector {
        let mut mult = self.summary().multiplicities;
        mult.sort_unstable_by(|a, b| b.cmp(a));
        demand_from_multiplicities(self.files, &mult)
    }

    /// Sorted multiplicity vector identifying the demand type.
    pub fn demand_type(&self) -> Vec<usize> {
        let mut mult = self.summary().multiplicities;
        mult.sort_unstable_by(|a, b| b.cmp(a));
        mult
    }
}

impl fmt::Debug for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.entries.iter().join(","))
    }
}

impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Derived per-file quantities of a demand vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSummary {
    /// `m_n`, indexed by `n - 1`.
    pub multiplicities: Vec<usize>,
    /// Users requesting each file, indexed by `n - 1`.
    pub requester_sets: Vec<UserSet>,
    /// Leader (minimum requester) of each requested file.
    pub leaders: Vec<Option<usize>>,
    /// Number of distinct requested files.
    pub n_star: usize,
    /// `min(N, K)`.
    pub n_tilde: usize,
}

impl DemandSummary {
    pub fn new(d: &DemandVector) -> Self {
        let n = d.files();
        let mut multiplicities = vec![0; n];
        let mut requester_sets = vec![UserSet::EMPTY; n];
        for (idx, &file) in d.entries().iter().enumerate() {
            multiplicities[file - 1] += 1;
            requester_sets[file - 1].insert(idx + 1);
        }
        let leaders = requester_sets.iter().map(|s| s.iter().next()).collect();
        let n_star = multiplicities.iter().filter(|&&m| m > 0).count();
        DemandSummary {
            multiplicities,
            requester_sets,
            leaders,
            n_star,
            n_tilde: n.min(d.users()),
        }
    }

    pub fn m(&self, file: usize) -> usize {
        self.multiplicities[file - 1]
    }

    pub fn requesters(&self, file: usize) -> UserSet {
        self.requester_sets[file - 1]
    }

    pub fn leader(&self, file: usize) -> Option<usize> {
        self.leaders[file - 1]
    }

    /// Requested files in increasing order.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.multiplicities.len())
            .filter(|&n| self.multiplicities[n - 1] > 0)
            .collect()
    }

    /// Leaders of the given files.
    pub fn leader_set(&self, files: &[usize]) -> UserSet {
        UserSet::from_users(files.iter().filter_map(|&n| self.leader(n)))
    }

    /// Requesters of the given files.
    pub fn requesters_of(&self, files: &[usize]) -> UserSet {
        files
            .iter()
            .fold(UserSet::EMPTY, |acc, &n| acc.union(self.requesters(n)))
    }

    /// Transmission type of a user set: requesters per file inside it.
    pub fn type_of(&self, users: UserSet) -> TransmissionType {
        TransmissionType {
            counts: self
                .requester_sets
                .iter()
                .map(|s| s.intersection(users).len())
                .collect(),
        }
    }
}

fn demand_from_multiplicities(files: usize, mult: &[usize]) -> DemandVector {
    let entries = mult
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| std::iter::repeat_n(i + 1, m))
        .collect();
    DemandVector { files, entries }
}

fn integer_partitions(total: usize, max_parts: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if total == 0 {
        out.push(prefix.clone());
        return;
    }
    if prefix.len() == max_parts {
        return;
    }
    for part in (1..=max_part.min(total)).rev() {
        prefix.push(part);
        integer_partitions(total - part, max_parts, part, prefix, out);
        prefix.pop();
    }
}

/// One canonical demand vector per demand type, sorted lexicographically.
pub fn representative_demands(n: usize, k: usize) -> Vec<DemandVector> {
    let mut parts = Vec::new();
    integer_partitions(k, n, k, &mut Vec::new(), &mut parts);
    let mut demands: Vec<_> = parts
        .iter()
        .map(|p| demand_from_multiplicities(n, p))
        .collect();
    demands.sort();
    demands
}

/// Per-file requester counts inside a `(t+1)`-subset of users.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransmissionType {
    pub counts: Vec<usize>,
}

impl TransmissionType {
    pub fn new(counts: Vec<usize>) -> Self {
        TransmissionType { counts }
    }

    pub fn count(&self, file: usize) -> usize {
        self.counts[file - 1]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (1..=self.counts.len())
            .filter(|&n| self.counts[n - 1] > 0)
            .collect()
    }
}

impl fmt::Debug for TransmissionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.counts.iter().join(","))
    }
}

impl fmt::Display for TransmissionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All valid transmission types for `(d, t)`, in decreasing lexicographic
/// order (the first file's count varies slowest, largest first).
pub fn transmission_types(d: &DemandVector, t: usize) -> Vec<TransmissionType> {
    let summary = d.summary();
    let mut out = Vec::new();
    let mut counts = vec![0; d.files()];
    fn rec(file: usize, left: usize, mult: &[usize], counts: &mut Vec<usize>, out: &mut Vec<TransmissionType>) {
        if file == mult.len() {
            if left == 0 {
                out.push(TransmissionType::new(counts.clone()));
            }
            return;
        }
        let rest: usize = mult[file + 1..].iter().sum();
        for c in (0..=mult[file].min(left)).rev() {
            if left - c > rest {
                break;
            }
            counts[file] = c;
            rec(file + 1, left - c, mult, counts, out);
        }
        counts[file] = 0;
    }
    rec(0, t + 1, &summary.multiplicities, &mut counts, &mut out);
    out
}

/// A set partition: disjoint sorted blocks ordered by their minimum element.
pub type Partition = Vec<Vec<usize>>;

/// All set partitions of `elements`, enumerated through restricted growth
/// strings in lexicographic order. The single-block partition comes first and
/// the all-singleton partition last.
pub fn set_partitions(elements: &[usize]) -> Vec<Partition> {
    let n = elements.len();
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().copied().unwrap_or(0) + 1;
        let mut partition: Partition = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            partition[b].push(elements[i]);
        }
        out.push(partition);

        // next restricted growth string: rgs[i] <= 1 + max(rgs[..i])
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = rgs[..i].iter().max().copied().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell number `B(n)`.
pub fn bell(n: usize) -> BigInt {
    // Bell triangle
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().cloned().unwrap_or_else(BigInt::one));
        for v in &row {
            let x = next.last().unwrap() + v;
            next.push(x);
        }
        row = next;
    }
    row[0].clone()
}

/// A decomposition pattern for every transmission type of a demand, or the
/// special uncoded delivery strategy.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternSet {
    pub per_type: Vec<(TransmissionType, Partition)>,
    pub is_uncoded: bool,
}

impl PatternSet {
    pub fn uncoded() -> Self {
        PatternSet {
            per_type: Vec::new(),
            is_uncoded: true,
        }
    }

    /// Builds a pattern set by choosing a partition of each type's support.
    pub fn from_fn(d: &DemandVector, t: usize, mut choose: impl FnMut(&TransmissionType) -> Partition) -> Self {
        let per_type = transmission_types(d, t)
            .into_iter()
            .map(|ty| {
                let p = choose(&ty);
                (ty, p)
            })
            .collect();
        PatternSet {
            per_type,
            is_uncoded: false,
        }
    }

    /// Every type keeps its whole support together.
    pub fn no_decomposition(d: &DemandVector, t: usize) -> Self {
        Self::from_fn(d, t, |ty| vec![ty.support()])
    }

    /// Every type is split into single files.
    pub fn all_singletons(d: &DemandVector, t: usize) -> Self {
        Self::from_fn(d, t, |ty| ty.support().into_iter().map(|n| vec![n]).collect())
    }

    pub fn partition_for(&self, ty: &TransmissionType) -> Option<&Partition> {
        self.per_type.iter().find(|(x, _)| x == ty).map(|(_, p)| p)
    }

    /// Checks the pattern against the types of `(d, t)`.
    pub fn validate(&self, d: &DemandVector, t: usize) -> Result<()> {
        if self.is_uncoded {
            if !self.per_type.is_empty() {
                return Err(Error::InvalidConfig("uncoded pattern carries partitions".into()));
            }
            return Ok(());
        }
        let types = transmission_types(d, t);
        if types.len() != self.per_type.len() {
            return Err(Error::InvalidConfig(format!(
                "pattern covers {} types, demand {d} has {}",
                self.per_type.len(),
                types.len()
            )));
        }
        for ty in &types {
            let p = self.partition_for(ty).ok_or_else(|| {
                Error::InvalidConfig(format!("no partition for type {ty}"))
            })?;
            let mut seen: Vec<usize> = p.iter().flatten().copied().collect();
            if p.iter().any(|b| b.is_empty()) {
                return Err(Error::InvalidConfig(format!("empty block for type {ty}")));
            }
            seen.sort_unstable();
            if seen != ty.support() {
                return Err(Error::InvalidConfig(format!(
                    "blocks {p:?} do not partition supp{ty}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_uncoded {
            return write!(f, "uncoded");
        }
        let parts = self.per_type.iter().map(|(ty, p)| {
            let blocks = p
                .iter()
                .map(|b| format!("{{{}}}", b.iter().join(",")))
                .join(",");
            format!("{ty}:{{{blocks}}}")
        });
        write!(f, "[{}]", parts.format("; "))
    }
}

impl fmt::Display for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Number of pattern sets `1 + prod_t Bell(|supp t|)` for `(d, t)`.
pub fn pattern_set_count(d: &DemandVector, t: usize) -> BigInt {
    let product = transmission_types(d, t)
        .iter()
        .fold(BigInt::one(), |acc, ty| acc * bell(ty.support().len()));
    product + 1
}

/// The uncoded pattern followed by every combination of per-type set
/// partitions (first type varies slowest).
pub fn pattern_sets(d: &DemandVector, t: usize, cap: usize) -> Result<Vec<PatternSet>> {
    let required = pattern_set_count(d, t);
    if required.to_usize().is_none_or(|r| r > cap) {
        return Err(Error::EnumerationOverflow {
            required: required.to_string(),
            cap,
        });
    }
    let types = transmission_types(d, t);
    let choices: Vec<Vec<Partition>> = types.iter().map(|ty| set_partitions(&ty.support())).collect();

    let mut out = vec![PatternSet::uncoded()];
    if types.is_empty() {
        out.push(PatternSet {
            per_type: Vec::new(),
            is_uncoded: false,
        });
        return Ok(out);
    }
    for combo in choices.iter().map(|c| c.iter()).multi_cartesian_product() {
        let per_type = types
            .iter()
            .cloned()
            .zip(combo.into_iter().cloned())
            .collect();
        out.push(PatternSet {
            per_type,
            is_uncoded: false,
        });
    }
    Ok(out)
}
