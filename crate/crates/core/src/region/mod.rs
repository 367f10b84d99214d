//! The achievable region for a fixed `t` as a family of per-demand linear
//! programs over pattern weights, its lower boundary, and the convex closure
//! across `t`.

pub mod simplex;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::combinatorics::{pattern_sets, representative_demands, DemandVector, PatternSet};
use crate::error::{Error, Result};
use crate::rational::{from_big, int, to_exact_string, Rational};
use crate::tradeoff::{
    binom, tian_chen_uncoded_alpha, cost_is_nonnegative, known_scheme_points, pattern_cost, KnownScheme, PatternCost,
    TradeoffPoint,
};
use simplex::{check_certificate, Constraint, LinearProgram, LpOutcome, LpSolution, Relation};

const REFINEMENT_BUDGET: usize = 10_000;

/// Candidate pattern sets of one representative demand with their costs.
/// Pattern sets with identical cost vectors are represented once, by the
/// first in enumeration order.
#[derive(Clone, Debug)]
pub struct DemandPatterns {
    pub demand: DemandVector,
    pub patterns: Vec<PatternSet>,
    pub costs: Vec<PatternCost>,
}

#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub demands: Vec<DemandPatterns>,
}

impl RegionSpec {
    pub fn build(n: usize, k: usize, t: usize, cap: usize) -> Result<Self> {
        if n == 0 || k == 0 || t > k {
            return Err(Error::InvalidConfig(format!("need N, K >= 1 and t <= K (N={n}, K={k}, t={t})")));
        }
        let demands = representative_demands(n, k)
            .into_par_iter()
            .map(|d| {
                let mut seen = HashSet::new();
                let mut patterns = Vec::new();
                let mut costs = Vec::new();
                for p in pattern_sets(&d, t, cap)? {
                    let cost = pattern_cost(&d, t, &p);
                    if !cost_is_nonnegative(&cost) {
                        return Err(Error::VerificationFailure(format!("negative cost for {d} under {p}")));
                    }
                    if seen.insert((cost.rate_units.clone(), cost.memory_units.clone())) {
                        patterns.push(p);
                        costs.push(cost);
                    }
                }
                Ok(DemandPatterns { demand: d, patterns, costs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionSpec { n, k, t, demands })
    }

    /// `C(K, t)`, the number of segments per file per instance.
    pub fn subpacketization(&self) -> BigInt {
        binom(self.k as i64, self.t as i64)
    }

    /// Memory at which every pattern fits, `tN/K`.
    pub fn saturation_memory(&self) -> Rational {
        from_big(&(BigInt::from(self.n) * binom(self.k as i64 - 1, self.t as i64 - 1)))
            / from_big(&self.subpacketization())
    }
}

/// Optimal pattern weights for one demand at a given memory.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandCertificate {
    pub demand: DemandVector,
    /// Nonzero weights only, in enumeration order.
    pub weights: Vec<(PatternSet, Rational)>,
    /// Optimal `sum alpha R` in segment units.
    pub rate_units: Rational,
    /// Derivative of the normalised rate with respect to `M`, from the duals.
    pub slope: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateCertificate {
    pub memory: Rational,
    pub rate: Rational,
    /// A subgradient of the boundary at `memory`.
    pub slope: Rational,
    pub demands: Vec<DemandCertificate>,
}

impl RateCertificate {
    pub fn point(&self) -> TradeoffPoint {
        TradeoffPoint::new(self.memory.clone(), self.rate.clone())
    }

    pub fn weights_for(&self, d: &DemandVector) -> Option<&[(PatternSet, Rational)]> {
        self.demands.iter().find(|c| &c.demand == d).map(|c| c.weights.as_slice())
    }
}

fn one() -> Rational {
    int(1)
}

/// `min sum alpha R` s.t. `sum alpha = 1`, `sum alpha M_k <= cap` for each user.
fn demand_lp(dp: &DemandPatterns, k: usize, cap_units: &Rational) -> LinearProgram {
    let objective = dp.costs.iter().map(|c| from_big(&c.rate_units)).collect();
    let mut constraints = vec![Constraint {
        coeffs: vec![one(); dp.costs.len()],
        relation: Relation::Eq,
        rhs: one(),
    }];
    for user in 0..k {
        constraints.push(Constraint {
            coeffs: dp.costs.iter().map(|c| from_big(&c.memory_units[user])).collect(),
            relation: Relation::Le,
            rhs: cap_units.clone(),
        });
    }
    LinearProgram { objective, constraints }
}

fn solve_checked(lp: &LinearProgram) -> Result<Option<LpSolution>> {
    match lp.solve() {
        LpOutcome::Optimal(sol) => {
            check_certificate(lp, &sol).map_err(Error::VerificationFailure)?;
            Ok(Some(sol))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::VerificationFailure("pattern LP is unbounded".into())),
    }
}

fn demand_certificate(spec: &RegionSpec, dp: &DemandPatterns, memory: &Rational) -> Result<DemandCertificate> {
    let cap_units = memory * from_big(&spec.subpacketization());
    let lp = demand_lp(dp, spec.k, &cap_units);
    let sol = solve_checked(&lp)?.ok_or_else(|| Error::Infeasible {
        demand: dp.demand.to_string(),
        memory: to_exact_string(memory),
    })?;
    let weights = dp
        .patterns
        .iter()
        .zip(&sol.x)
        .filter(|(_, a)| !a.is_zero())
        .map(|(p, a)| (p.clone(), a.clone()))
        .collect();
    let slope = sol.duals[1..].iter().sum();
    Ok(DemandCertificate { demand: dp.demand.clone(), weights, rate_units: sol.objective, slope })
}

/// Smallest `R` with `(M, R)` in the region, with optimal weights for every
/// demand.
pub fn min_rate_for_memory(spec: &RegionSpec, memory: &Rational) -> Result<RateCertificate> {
    if memory.is_negative() || *memory > int(spec.n as i64) {
        return Err(Error::InvalidConfig(format!("memory {memory} outside [0, {}]", spec.n)));
    }
    let demands = spec
        .demands
        .par_iter()
        .map(|dp| demand_certificate(spec, dp, memory))
        .collect::<Result<Vec<_>>>()?;
    let scale = from_big(&spec.subpacketization());
    let worst = demands
        .iter()
        .enumerate()
        .fold(0, |best, (i, c)| if c.rate_units > demands[best].rate_units { i } else { best });
    Ok(RateCertificate {
        memory: memory.clone(),
        rate: &demands[worst].rate_units / &scale,
        slope: demands[worst].slope.clone(),
        demands,
    })
}

/// Smallest memory any pattern mix supports for every demand.
pub fn min_memory(spec: &RegionSpec) -> Result<Rational> {
    let per_demand = spec
        .demands
        .par_iter()
        .map(|dp| {
            // min z s.t. sum alpha = 1, sum alpha M_k - z <= 0
            let width = dp.costs.len() + 1;
            let mut objective = vec![Rational::zero(); width];
            objective[width - 1] = one();
            let mut norm = vec![one(); width];
            norm[width - 1] = Rational::zero();
            let mut constraints = vec![Constraint { coeffs: norm, relation: Relation::Eq, rhs: one() }];
            for user in 0..spec.k {
                let mut coeffs: Vec<Rational> =
                    dp.costs.iter().map(|c| from_big(&c.memory_units[user])).collect();
                coeffs.push(int(-1));
                constraints.push(Constraint { coeffs, relation: Relation::Le, rhs: Rational::zero() });
            }
            let sol = solve_checked(&LinearProgram { objective, constraints })?
                .ok_or_else(|| Error::VerificationFailure("memory LP infeasible".into()))?;
            Ok(sol.objective)
        })
        .collect::<Result<Vec<_>>>()?;
    let top = per_demand.into_iter().max().unwrap_or_else(Rational::zero);
    Ok(top / from_big(&spec.subpacketization()))
}

/// A piecewise-linear, convex, non-increasing lower boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionCurve {
    pub vertices: Vec<TradeoffPoint>,
}

impl RegionCurve {
    /// Boundary rate at `memory`, or `None` left of the first vertex.
    pub fn rate_at(&self, memory: &Rational) -> Option<Rational> {
        let first = self.vertices.first()?;
        if *memory < first.memory {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if *memory <= b.memory {
                let frac = (memory - &a.memory) / (&b.memory - &a.memory);
                return Some(&a.rate + frac * (&b.rate - &a.rate));
            }
        }
        Some(self.vertices.last().unwrap().rate.clone())
    }

    pub fn is_convex(&self) -> bool {
        self.vertices.windows(3).all(|w| cross(&w[0], &w[1], &w[2]) >= Rational::zero())
            && self.vertices.windows(2).all(|w| w[0].memory < w[1].memory && w[0].rate >= w[1].rate)
    }
}

/// Twice the signed area of the triangle `a b c`; positive for a left turn.
fn cross(a: &TradeoffPoint, b: &TradeoffPoint, c: &TradeoffPoint) -> Rational {
    (&b.memory - &a.memory) * (&c.rate - &a.rate) - (&b.rate - &a.rate) * (&c.memory - &a.memory)
}

/// Lower convex hull of `points`, cut off once the rate stops decreasing.
fn lower_envelope(mut points: Vec<TradeoffPoint>) -> Vec<TradeoffPoint> {
    points.sort();
    points.dedup_by(|b, a| a.memory == b.memory);
    let mut hull: Vec<TradeoffPoint> = Vec::new();
    for p in points {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= Rational::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    if let Some(min_rate) = hull.iter().map(|p| p.rate.clone()).min() {
        let end = hull.iter().position(|p| p.rate == min_rate).unwrap();
        hull.truncate(end + 1);
    }
    hull
}

struct Probe {
    memory: Rational,
    rate: Rational,
    slope: Rational,
}

fn probe(spec: &RegionSpec, memory: &Rational) -> Result<Probe> {
    let cert = min_rate_for_memory(spec, memory)?;
    Ok(Probe { memory: cert.memory, rate: cert.rate, slope: cert.slope })
}

/// Pushes the breakpoints strictly between `a` and `b` in increasing order.
fn refine(spec: &RegionSpec, a: &Probe, b: &Probe, out: &mut Vec<TradeoffPoint>, budget: &mut usize) -> Result<()> {
    if a.slope == b.slope {
        return Ok(());
    }
    // where the supporting lines at a and b meet
    let c = (&b.rate - &a.rate + &a.slope * &a.memory - &b.slope * &b.memory) / (&a.slope - &b.slope);
    if c <= a.memory || c >= b.memory {
        return Ok(());
    }
    if *budget == 0 {
        return Err(Error::VerificationFailure("boundary refinement did not converge".into()));
    }
    *budget -= 1;
    let mid = probe(spec, &c)?;
    let support = &a.rate + &a.slope * (&c - &a.memory);
    if mid.rate == support {
        out.push(TradeoffPoint::new(mid.memory, mid.rate));
        return Ok(());
    }
    refine(spec, a, &mid, out, budget)?;
    out.push(TradeoffPoint::new(mid.memory.clone(), mid.rate.clone()));
    refine(spec, &mid, b, out, budget)
}

/// Exact lower boundary of the region for `spec.t`, found by refining
/// supporting lines from the LP duals between the smallest feasible memory
/// and `tN/K`.
pub fn region_boundary(spec: &RegionSpec) -> Result<RegionCurve> {
    let lo = min_memory(spec)?;
    let hi = spec.saturation_memory().max(lo.clone());
    let left = probe(spec, &lo)?;
    if lo == hi {
        return Ok(RegionCurve { vertices: vec![TradeoffPoint::new(left.memory, left.rate)] });
    }
    let right = probe(spec, &hi)?;
    let mut points = vec![TradeoffPoint::new(left.memory.clone(), left.rate.clone())];
    let mut budget = REFINEMENT_BUDGET;
    refine(spec, &left, &right, &mut points, &mut budget)?;
    points.push(TradeoffPoint::new(right.memory, right.rate));
    Ok(RegionCurve { vertices: lower_envelope(points) })
}

/// Lower convex envelope of the union of all curve vertices.
pub fn convex_closure(curves: &[RegionCurve]) -> RegionCurve {
    let points = curves.iter().flat_map(|c| c.vertices.iter().cloned()).collect();
    RegionCurve { vertices: lower_envelope(points) }
}

/// Boundaries for every `t = 0..=K` and their convex closure.
pub fn closure_over_t(n: usize, k: usize, cap: usize) -> Result<(Vec<RegionCurve>, RegionCurve)> {
    let curves = (0..=k)
        .into_par_iter()
        .map(|t| region_boundary(&RegionSpec::build(n, k, t, cap)?))
        .collect::<Result<Vec<_>>>()?;
    let closure = convex_closure(&curves);
    Ok((curves, closure))
}

/// One known-scheme point shown to lie in the region for its `t`.
#[derive(Clone, Debug)]
pub struct MembershipWitness {
    pub scheme: KnownScheme,
    pub t: usize,
    pub point: TradeoffPoint,
    /// Minimum LP rate at the point's memory; never above `point.rate`.
    pub lp_rate: Rational,
    pub weights: Vec<(DemandVector, Vec<(PatternSet, Rational)>)>,
}

/// Checks explicit weights against every region constraint exactly and then
/// confirms membership by LP.
fn witness_point(
    scheme: KnownScheme,
    n: usize,
    k: usize,
    t: usize,
    point: TradeoffPoint,
    cap: usize,
    choose: impl Fn(&DemandVector) -> Vec<(PatternSet, Rational)>,
) -> Result<MembershipWitness> {
    let scale = from_big(&binom(k as i64, t as i64));
    let fail = |d: &DemandVector, what: String| {
        Error::VerificationFailure(format!("{} point {point} at t={t}, demand {d}: {what}", scheme.label()))
    };
    let mut weights = Vec::new();
    for d in representative_demands(n, k) {
        let w = choose(&d);
        if w.iter().any(|(_, a)| a.is_negative()) {
            return Err(fail(&d, "negative weight".into()));
        }
        if w.iter().map(|(_, a)| a.clone()).sum::<Rational>() != one() {
            return Err(fail(&d, "weights do not sum to one".into()));
        }
        let costs: Vec<PatternCost> = w.iter().map(|(p, _)| pattern_cost(&d, t, p)).collect();
        let rate: Rational = w.iter().zip(&costs).map(|((_, a), c)| a * from_big(&c.rate_units)).sum();
        if rate > &point.rate * &scale {
            return Err(fail(&d, format!("rate {} exceeds {}", rate / &scale, point.rate)));
        }
        for user in 0..k {
            let mem: Rational =
                w.iter().zip(&costs).map(|((_, a), c)| a * from_big(&c.memory_units[user])).sum();
            if mem > &point.memory * &scale {
                return Err(fail(&d, format!("memory of user {} is {}", user + 1, mem / &scale)));
            }
        }
        weights.push((d, w));
    }
    let spec = RegionSpec::build(n, k, t, cap)?;
    let lp_rate = min_rate_for_memory(&spec, &point.memory)?.rate;
    if lp_rate > point.rate {
        return Err(Error::VerificationFailure(format!(
            "{} point {point} at t={t}: LP minimum rate {lp_rate} is larger",
            scheme.label()
        )));
    }
    Ok(MembershipWitness { scheme, t, point, lp_rate, weights })
}

/// Every coded-prefetching-free point of the Yu scheme lies in the region
/// for its `t`, witnessed by the no-decomposition pattern.
pub fn verify_yu_points(n: usize, k: usize, cap: usize) -> Result<Vec<MembershipWitness>> {
    let points = known_scheme_points(KnownScheme::Yu, n, k)?;
    points
        .into_iter()
        .enumerate()
        .map(|(t, point)| {
            witness_point(KnownScheme::Yu, n, k, t, point, cap, |d| {
                vec![(PatternSet::no_decomposition(d, t), one())]
            })
        })
        .collect()
}

/// Every Tian–Chen point lies in the region for its `t`, witnessed by the
/// all-singleton pattern mixed with the uncoded pattern.
pub fn verify_tian_chen_points(n: usize, k: usize, cap: usize) -> Result<Vec<MembershipWitness>> {
    let points = known_scheme_points(KnownScheme::TianChen, n, k)?;
    points
        .into_iter()
        .enumerate()
        .map(|(t, point)| {
            witness_point(KnownScheme::TianChen, n, k, t, point, cap, |d| {
                let alpha = tian_chen_uncoded_alpha(d, t);
                let singles = (PatternSet::all_singletons(d, t), one() - &alpha);
                if alpha.is_zero() {
                    vec![singles]
                } else {
                    vec![(PatternSet::uncoded(), alpha), singles]
                }
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct KnownPointsReport {
    pub yu: Vec<MembershipWitness>,
    pub tian_chen: Vec<MembershipWitness>,
}

/// Both membership checks; fails with a regime error when `N > K`.
pub fn verify_known_points(n: usize, k: usize, cap: usize) -> Result<KnownPointsReport> {
    let tian_chen = verify_tian_chen_points(n, k, cap)?;
    let yu = verify_yu_points(n, k, cap)?;
    Ok(KnownPointsReport { yu, tian_chen })
}
