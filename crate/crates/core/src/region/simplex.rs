//! Two-phase primal simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Minimise `objective . x` subject to `constraints` and `x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

/// An optimal primal point with a dual vector of matching value. Duals of
/// `<=` rows are nonpositive and duals of `>=` rows nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
    pub duals: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[row].clone();
        for (r, cur) in self.rows.iter_mut().enumerate() {
            if r == row || cur[col].is_zero() {
                continue;
            }
            let factor = cur[col].clone();
            for (v, pv) in cur.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &[Rational], col: usize) -> Rational {
        let mut d = cost[col].clone();
        for (r, &b) in self.basis.iter().enumerate() {
            if !cost[b].is_zero() && !self.rows[r][col].is_zero() {
                d -= &cost[b] * &self.rows[r][col];
            }
        }
        d
    }

    /// Runs simplex iterations on columns `allowed`. Returns false when
    /// unbounded.
    fn optimise(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.width)
                .filter(|&j| allowed(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars();
        let m = self.constraints.len();
        // Normalise to nonnegative right-hand sides.
        let mut sign = Vec::with_capacity(m);
        let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
        for c in &self.constraints {
            assert_eq!(c.coeffs.len(), n, "constraint width mismatch");
            if c.rhs.is_negative() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                rows.push((c.coeffs.iter().map(|v| -v).collect(), rel, -&c.rhs));
                sign.push(-1);
            } else {
                rows.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
                sign.push(1);
            }
        }

        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + slack_count + art_count;
        let art_start = n + slack_count;
        let mut tab = Tableau { rows: Vec::with_capacity(m), basis: Vec::with_capacity(m), width };
        let mut identity_col = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, art_start);
        for (coeffs, rel, rhs) in rows {
            let mut row = coeffs;
            row.resize(width + 1, Rational::zero());
            row[width] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::from_integer(1.into());
                    identity_col.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = Rational::from_integer((-1).into());
                    next_slack += 1;
                    row[next_art] = Rational::from_integer(1.into());
                    identity_col.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::from_integer(1.into());
                    identity_col.push(next_art);
                    next_art += 1;
                }
            }
            tab.basis.push(*identity_col.last().unwrap());
            tab.rows.push(row);
        }

        if art_count > 0 {
            let mut phase1 = vec![Rational::zero(); width];
            for c in phase1.iter_mut().skip(art_start) {
                *c = Rational::from_integer(1.into());
            }
            tab.optimise(&phase1, |_| true);
            let infeasibility: Rational = tab
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= art_start)
                .map(|(r, _)| tab.rhs(r).clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis where possible.
            for r in 0..m {
                if tab.basis[r] >= art_start {
                    if let Some(col) = (0..art_start).find(|&j| !tab.rows[r][j].is_zero()) {
                        tab.pivot(r, col);
                    }
                }
            }
        }

        let mut cost = self.objective.clone();
        cost.resize(width, Rational::zero());
        if !tab.optimise(&cost, |j| j < art_start) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![Rational::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(r).clone();
            }
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        let duals = (0..m)
            .map(|i| {
                let y: Rational = tab
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(r, &b)| &cost[b] * &tab.rows[r][identity_col[i]])
                    .sum();
                if sign[i] < 0 { -y } else { y }
            })
            .collect();
        LpOutcome::Optimal(LpSolution { x, objective, duals })
    }
}

/// Confirms optimality from first principles: primal feasibility, dual
/// feasibility and equal objective values.
pub fn check_certificate(lp: &LinearProgram, sol: &LpSolution) -> Result<(), String> {
    let n = lp.num_vars();
    if sol.x.len() != n || sol.duals.len() != lp.constraints.len() {
        return Err("certificate has wrong dimensions".into());
    }
    if let Some(j) = sol.x.iter().position(|v| v.is_negative()) {
        return Err(format!("x[{j}] is negative"));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs: Rational = c.coeffs.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        };
        if !ok {
            return Err(format!("row {i} violated: {lhs} vs {}", c.rhs));
        }
        let y = &sol.duals[i];
        let sign_ok = match c.relation {
            Relation::Le => !y.is_positive(),
            Relation::Ge => !y.is_negative(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(format!("dual {i} has the wrong sign: {y}"));
        }
    }
    for j in 0..n {
        let aty: Rational = lp.constraints.iter().zip(&sol.duals).map(|(c, y)| &c.coeffs[j] * y).sum();
        if aty > lp.objective[j] {
            return Err(format!("dual constraint {j} violated: {aty} > {}", lp.objective[j]));
        }
    }
    let primal: Rational = lp.objective.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
    let dual: Rational = lp.constraints.iter().zip(&sol.duals).map(|(c, y)| &c.rhs * y).sum();
    if primal != dual || primal != sol.objective {
        return Err(format!("objective gap: primal {primal}, dual {dual}"));
    }
    Ok(())
}
