use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{
    decode_constructive, decode_oracle, deliver, plan_instances, prefetch, InstancePlan, PlanEntry, Prefetch,
};
use crate::combinatorics::{representative_demands, DemandVector, PatternSet};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Gf2m};
use crate::rational::{from_big, Rational};
use crate::tradeoff::{binom, pattern_cost};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRun {
    pub user: usize,
    pub collected: usize,
    pub expected_collected: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandRun {
    pub demand: DemandVector,
    pub transmissions: usize,
    pub expected_transmissions: usize,
    pub users: Vec<UserRun>,
}

fn to_usize(v: BigInt) -> usize {
    v.to_usize().expect("count fits in usize")
}

fn failure(msg: String) -> Error {
    Error::VerificationFailure(msg)
}

/// Delivers `d`, decodes every user both ways and checks every count.
fn run_demand(pre: &Prefetch, plan: &InstancePlan, generator: &[Vec<FieldElement>], d: &DemandVector) -> Result<DemandRun> {
    let log = deliver(d, plan, pre)?;
    let expected_transmissions = to_usize(plan.rate_units(d).ok_or_else(|| Error::PlanMismatch(d.to_string()))?);
    if log.len() != expected_transmissions {
        return Err(failure(format!(
            "demand {d}: {} transmissions, expected {expected_transmissions}",
            log.len()
        )));
    }
    let deltas = plan.delta_units_for(d).expect("entry exists");
    let p = pre.code.info_len();
    let users = pre
        .caches
        .par_iter()
        .map(|cache| {
            let user = cache.user;
            let source: Vec<FieldElement> =
                pre.layout.file_segments(d.file_of(user)).iter().map(|&i| pre.segments[i]).collect();
            let decoded = decode_constructive(&pre.layout, &pre.code, cache, d, plan, &log)?;
            let expected_collected = to_usize(deltas[user - 1].clone());
            if decoded.collected != expected_collected {
                return Err(failure(format!(
                    "demand {d}, user {user}: collected {}, expected {expected_collected}",
                    decoded.collected
                )));
            }
            if cache.parities.len() + decoded.collected < p || decoded.rank < p {
                return Err(failure(format!("demand {d}, user {user}: rank {} below {p}", decoded.rank)));
            }
            if decoded.file != source {
                return Err(failure(format!("demand {d}, user {user}: constructive decoder output differs")));
            }
            let oracle = decode_oracle(&pre.layout, &pre.code, generator, cache, d, &log);
            if !oracle.consistent || oracle.complete().as_ref() != Some(&source) {
                return Err(failure(format!("demand {d}, user {user}: elimination oracle disagrees")));
            }
            Ok(UserRun { user, collected: decoded.collected, expected_collected, rank: decoded.rank })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DemandRun { demand: d.clone(), transmissions: log.len(), expected_transmissions, users })
}

#[derive(Clone, Debug)]
pub struct EndToEndReport {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub degree: u32,
    pub seed: u64,
    pub plan: InstancePlan,
    pub info_symbols: usize,
    pub parities: usize,
    pub demands: Vec<DemandRun>,
    /// Achieved `(M, R)`: cache size and worst delivery over `r C(K,t)`.
    pub memory: Rational,
    pub rate: Rational,
}

/// The weighted pair `max_{d,k} sum alpha M / C(K,t)`, `max_d sum alpha R / C(K,t)`.
pub fn weighted_point(t: usize, alphas: &[(DemandVector, Vec<(PatternSet, Rational)>)]) -> (Rational, Rational) {
    let mut memory = Rational::from_integer(0.into());
    let mut rate = memory.clone();
    for (d, weights) in alphas {
        let scale = from_big(&binom(d.users() as i64, t as i64));
        let costs: Vec<_> = weights.iter().map(|(p, _)| pattern_cost(d, t, p)).collect();
        let r: Rational = weights.iter().zip(&costs).map(|((_, a), c)| a * from_big(&c.rate_units)).sum();
        rate = rate.max(r / &scale);
        for user in 0..d.users() {
            let m: Rational =
                weights.iter().zip(&costs).map(|((_, a), c)| a * from_big(&c.memory_units[user])).sum();
            memory = memory.max(m / &scale);
        }
    }
    (memory, rate)
}

/// Plans, prefetches once, then delivers and decodes every representative
/// demand for every user.
pub fn verify_end_to_end(
    n: usize,
    k: usize,
    t: usize,
    alphas: &[(DemandVector, Vec<(PatternSet, Rational)>)],
    field: Gf2m,
    seed: u64,
) -> Result<EndToEndReport> {
    let plan = plan_instances(t, alphas)?;
    let demands = representative_demands(n, k);
    if let Some(d) = demands.iter().find(|d| plan.entry(d).is_none()) {
        return Err(Error::PlanMismatch(d.to_string()));
    }
    let memory_units = plan.memory_units();
    let pre = prefetch(n, k, t, plan.r, memory_units, field, seed)?;
    for cache in &pre.caches {
        if cache.parities.len() != memory_units {
            return Err(failure(format!("user {} caches {} parities", cache.user, cache.parities.len())));
        }
    }
    let generator = pre.code.parity_generator();
    let runs = demands
        .par_iter()
        .map(|d| run_demand(&pre, &plan, &generator, d))
        .collect::<Result<Vec<_>>>()?;
    let scale = from_big(&(BigInt::from(plan.r) * binom(k as i64, t as i64)));
    let memory = Rational::from_integer(memory_units.into()) / &scale;
    let worst = runs.iter().map(|r| r.transmissions).max().unwrap_or(0);
    let rate = Rational::from_integer(worst.into()) / &scale;
    let (wm, wr) = weighted_point(t, alphas);
    if memory != wm || rate != wr {
        return Err(failure(format!("achieved ({memory}, {rate}) differs from weighted ({wm}, {wr})")));
    }
    Ok(EndToEndReport {
        n,
        k,
        t,
        degree: field.degree(),
        seed,
        info_symbols: pre.code.info_len(),
        parities: memory_units,
        plan,
        demands: runs,
        memory,
        rate,
    })
}

#[derive(Clone, Debug)]
pub struct SinglePatternReport {
    pub demand: DemandVector,
    pub info_symbols: usize,
    pub parities: usize,
    pub run: DemandRun,
}

/// One instance, one demand, one pattern set: the cache holds exactly the
/// memory this pattern needs.
pub fn verify_single_pattern(
    d: &DemandVector,
    t: usize,
    pattern: &PatternSet,
    field: Gf2m,
    seed: u64,
) -> Result<SinglePatternReport> {
    let plan = InstancePlan {
        t,
        r: 1,
        entries: vec![PlanEntry { demand: d.clone(), counts: vec![(pattern.clone(), 1)] }],
    };
    let memory_units = plan.memory_units();
    let pre = prefetch(d.files(), d.users(), t, 1, memory_units, field, seed)?;
    let generator = pre.code.parity_generator();
    let run = run_demand(&pre, &plan, &generator, d)?;
    Ok(SinglePatternReport { demand: d.clone(), info_symbols: pre.code.info_len(), parities: memory_units, run })
}
