//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `maximize c·x` subject to linear constraints and `x ≥ 0`.
//! Generic over the scalar so the same code runs in `f64` (with a pivot
//! tolerance) and in exact rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::rational::Rational;

pub const DEFAULT_ITERATION_LIMIT: usize = 100_000;

/// Tolerance used by the `f64` instance.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub trait LpScalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Greater than zero beyond the tolerance.
    fn is_pos(&self) -> bool;
    /// Less than zero beyond the tolerance.
    fn is_neg(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `maximize objective·x` subject to `constraints`, all variables `≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {limit} pivots (phase {phase})")]
    IterationLimit { limit: usize, phase: u8 },
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    Shape { row: usize, found: usize, expected: usize },
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        LinearProgram { objective, constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coefficients: Vec<T>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint { coefficients, relation, rhs });
    }

    /// Same program with every coefficient mapped through `f`.
    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> LinearProgram<U> {
        LinearProgram {
            objective: self.objective.iter().map(&f).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coefficients: c.coefficients.iter().map(&f).collect(),
                    relation: c.relation,
                    rhs: f(&c.rhs),
                })
                .collect(),
        }
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        self.solve_with_limit(DEFAULT_ITERATION_LIMIT)
    }

    pub fn solve_with_limit(&self, limit: usize) -> Result<LpSolution<T>, LpError> {
        let n = self.n_vars();
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::Shape { row, found: c.coefficients.len(), expected: n });
            }
        }
        Tableau::build(self).run(&self.objective, limit)
    }
}

struct Tableau<T> {
    /// `m` rows of `width + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    n_structural: usize,
    first_artificial: usize,
    width: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let n = lp.n_vars();
        // Flip rows with negative right-hand side so every basic start is
        // nonnegative.
        let normalized: Vec<(Vec<T>, Relation, T)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_neg() {
                    let relation = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|a| -a.clone()).collect(), relation, -c.rhs.clone())
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let width = first_artificial + n_art;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (coefficients, relation, rhs) in normalized {
            let mut row = coefficients;
            row.resize(width + 1, T::zero());
            row[width] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = T::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, n_structural: n, first_artificial, width }
    }

    /// Reduced-cost row `c_j − c_B B⁻¹ A_j`, with `−c_B x_B` in the last slot.
    fn cost_row(&self, costs: &[T]) -> Vec<T> {
        let mut r: Vec<T> = (0..=self.width).map(|j| costs.get(j).cloned().unwrap_or_else(T::zero)).collect();
        r[self.width] = T::zero();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = costs.get(b).cloned().unwrap_or_else(T::zero);
            if cb.is_pos() || cb.is_neg() {
                for (rj, aj) in r.iter_mut().zip(row) {
                    *rj = rj.clone() - cb.clone() * aj.clone();
                }
            }
        }
        r
    }

    fn pivot(&mut self, cost: &mut [T], p: usize, q: usize) {
        let pivot = self.rows[p][q].clone();
        for a in self.rows[p].iter_mut() {
            *a = a.clone() / pivot.clone();
        }
        let pivot_row = self.rows[p].clone();
        let eliminate = |target: &mut Vec<T>| {
            let factor = target[q].clone();
            if factor.is_pos() || factor.is_neg() {
                for (t, a) in target.iter_mut().zip(&pivot_row) {
                    *t = t.clone() - factor.clone() * a.clone();
                }
            }
            // Keep the pivot column exactly clean in floating mode.
            target[q] = T::zero();
        };
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != p {
                eliminate(row);
            }
        }
        let mut cost_vec = cost.to_vec();
        eliminate(&mut cost_vec);
        cost.clone_from_slice(&cost_vec);
        self.basis[p] = q;
    }

    /// Bland's rule: lowest-index improving column, then lowest basis index
    /// among minimum-ratio rows.
    fn optimize(&mut self, cost: &mut [T], allowed: usize, limit: usize, phase: u8, iterations: &mut usize) -> Result<(), LpError> {
        loop {
            let Some(q) = (0..allowed).find(|&j| cost[j].is_pos()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (k, row) in self.rows.iter().enumerate() {
                if !row[q].is_pos() {
                    continue;
                }
                let ratio = row[self.width].clone() / row[q].clone();
                let better = match &leave {
                    None => true,
                    Some((best, best_ratio)) => {
                        let diff = ratio.clone() - best_ratio.clone();
                        diff.is_neg() || (!diff.is_pos() && self.basis[k] < self.basis[*best])
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
            let Some((p, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            if *iterations >= limit {
                return Err(LpError::IterationLimit { limit, phase });
            }
            *iterations += 1;
            self.pivot(cost, p, q);
        }
    }

    fn run(mut self, objective: &[T], limit: usize) -> Result<LpSolution<T>, LpError> {
        let mut iterations = 0;
        if self.first_artificial < self.width {
            let mut phase_one = vec![T::zero(); self.width];
            for c in phase_one.iter_mut().skip(self.first_artificial) {
                *c = -T::one();
            }
            let mut cost = self.cost_row(&phase_one);
            self.optimize(&mut cost, self.width, limit, 1, &mut iterations)?;
            // cost[width] = Σ artificials at the optimum.
            if cost[self.width].is_pos() {
                return Err(LpError::Infeasible);
            }
            // Drive zero-valued artificials out where possible.
            for p in 0..self.rows.len() {
                if self.basis[p] >= self.first_artificial {
                    if let Some(q) = (0..self.first_artificial).find(|&j| self.rows[p][j].is_pos() || self.rows[p][j].is_neg()) {
                        self.pivot(&mut cost, p, q);
                    }
                }
            }
        }
        let mut cost = self.cost_row(objective);
        self.optimize(&mut cost, self.first_artificial, limit, 2, &mut iterations)?;
        let mut x = vec![T::zero(); self.n_structural];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_structural {
                x[b] = row[self.width].clone();
            }
        }
        Ok(LpSolution { value: -cost[self.width].clone(), x, iterations })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Best objective over all basic solutions of `A x ≤ b, x ≥ 0` (plus
    /// equality rows that are always tight), by brute force.
    pub(crate) fn vertex_enumeration(lp: &LinearProgram<f64>) -> Option<f64> {
        let n = lp.n_vars();
        let mut equalities = Vec::new();
        let mut inequalities: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &lp.constraints {
            match c.relation {
                Relation::Eq => equalities.push((c.coefficients.clone(), c.rhs)),
                Relation::Le => inequalities.push((c.coefficients.clone(), c.rhs)),
                Relation::Ge => inequalities.push((c.coefficients.iter().map(|a| -a).collect(), -c.rhs)),
            }
        }
        for j in 0..n {
            let mut row = vec![0.0; n];
            row[j] = -1.0;
            inequalities.push((row, 0.0));
        }
        let free = n.checked_sub(equalities.len())?;
        let mut best: Option<f64> = None;
        let mut chosen = Vec::with_capacity(free);
        subsets(inequalities.len(), free, 0, &mut chosen, &mut |set| {
            let system: Vec<(Vec<f64>, f64)> = equalities.iter().cloned().chain(set.iter().map(|&k| inequalities[k].clone())).collect();
            if let Some(x) = solve_square(system) {
                let feasible = lp.constraints.iter().all(|c| {
                    let lhs: f64 = c.coefficients.iter().zip(&x).map(|(a, v)| a * v).sum();
                    match c.relation {
                        Relation::Le => lhs <= c.rhs + 1e-7,
                        Relation::Ge => lhs >= c.rhs - 1e-7,
                        Relation::Eq => (lhs - c.rhs).abs() <= 1e-7,
                    }
                }) && x.iter().all(|&v| v >= -1e-7);
                if feasible {
                    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    if best.is_none_or(|b| value > b) {
                        best = Some(value);
                    }
                }
            }
        });
        best
    }

    fn subsets(len: usize, size: usize, start: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if chosen.len() == size {
            visit(chosen);
            return;
        }
        for k in start..len {
            if len - k < size - chosen.len() {
                break;
            }
            chosen.push(k);
            subsets(len, size, k + 1, chosen, visit);
            chosen.pop();
        }
    }

    /// Gaussian elimination with partial pivoting; `None` when singular.
    fn solve_square(mut system: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
        let n = system.len();
        for col in 0..n {
            let p = (col..n).max_by(|&a, &b| system[a].0[col].abs().total_cmp(&system[b].0[col].abs()))?;
            if system[p].0[col].abs() < 1e-10 {
                return None;
            }
            system.swap(col, p);
            let (pivot_row, pivot_rhs) = system[col].clone();
            for (k, (row, rhs)) in system.iter_mut().enumerate() {
                if k != col {
                    let f = row[col] / pivot_row[col];
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a -= f * b;
                    }
                    *rhs -= f * pivot_rhs;
                }
            }
        }
        Some(system.iter().enumerate().map(|(k, (row, rhs))| rhs / row[k]).collect())
    }

    #[test]
    fn two_box_constraints() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(vec![1.0, 0.0], Relation::Le, 1.0);
        lp.push(vec![0.0, 1.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert_eq!(s.x, vec![1.0, 1.0]);
    }

    #[test]
    fn tighter_of_two_caps() {
        let mut lp = LinearProgram::new(vec![Rational::one()]);
        lp.push(vec![Rational::one()], Relation::Le, Rational::from_integer(3));
        lp.push(vec![Rational::one()], Relation::Le, Rational::from_integer(5));
        assert_eq!(lp.solve().unwrap().value, Rational::from_integer(3));
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x − y, x + y = 1, y ≥ 1/4 → 1/2 at (3/4, 1/4).
        let q = Rational::new;
        let mut lp = LinearProgram::new(vec![q(1, 1), q(-1, 1)]);
        lp.push(vec![q(1, 1), q(1, 1)], Relation::Eq, q(1, 1));
        lp.push(vec![q(0, 1), q(1, 1)], Relation::Ge, q(1, 4));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, q(1, 2));
        assert_eq!(s.x, vec![q(3, 4), q(1, 4)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![1.0], Relation::Le, 1.0);
        lp.push(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.push(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // −x ≤ −2 means x ≥ 2; max −x → −2.
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.push(vec![-1.0], Relation::Le, -2.0);
        lp.push(vec![1.0], Relation::Le, 10.0);
        assert!((lp.solve().unwrap().value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_reported() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(vec![1.0, 0.0], Relation::Le, 1.0);
        lp.push(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve_with_limit(1).unwrap_err(), LpError::IterationLimit { limit: 1, phase: 2 });
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Shape { row: 0, .. })));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example: cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(vec![0.75, -150.0, 0.02, -6.0]);
        lp.push(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.push(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.push(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn random_small_lps_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=6);
            let mut lp = LinearProgram::new((0..n).map(|_| rng.gen_range(-5..=5) as f64).collect());
            for _ in 0..m {
                let row = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
                let relation = if rng.gen_bool(0.8) { Relation::Le } else { Relation::Ge };
                lp.push(row, relation, rng.gen_range(-3..=10) as f64);
            }
            // Bounded box keeps every program bounded.
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                lp.push(row, Relation::Le, 4.0);
            }
            let oracle = vertex_enumeration(&lp);
            let exact = lp.map(|&a| Rational::from_integer(a as i64)).solve();
            match (lp.solve(), oracle) {
                (Ok(s), Some(best)) => {
                    assert!((s.value - best).abs() < 1e-9, "simplex {} vs oracle {best}", s.value);
                    assert!((exact.unwrap().value.to_f64() - best).abs() < 1e-9);
                }
                (Err(LpError::Infeasible), None) => assert_eq!(exact.unwrap_err(), LpError::Infeasible),
                (got, want) => panic!("simplex {got:?} vs oracle {want:?}"),
            }
        }
    }
}
