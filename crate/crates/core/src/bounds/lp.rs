//! Certifying lower bounds by linear programming over grid lotteries.
//!
//! Variables are the probability masses `w[p][k]` a mechanism puts on
//! `k/grid` at profile `p`, plus the guaranteed fraction `t` of the
//! optimum. Maximizing `t` subject to the gadget's truthfulness links
//! gives the best ratio any grid-supported strategy-proof mechanism can
//! reach on the gadget; `1/t*` is the certified bound.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::gadget::Gadget;
use super::simplex::{LinearProgram, LpError, LpScalar, Relation};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// `f64` pivoting with tolerance `1e-9`.
    Floating,
    /// Exact rational pivoting.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("grid denominator must be at least 2, got {0}")]
    Grid(u32),
    #[error("gadget linear program failed: {0}")]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub gadget: String,
    pub grid: u32,
    pub mode: SolveMode,
    pub t_star: f64,
    /// Present in exact mode.
    pub exact_t_star: Option<Rational>,
    pub bound: f64,
    pub reference_bound: Option<f64>,
    pub iterations: usize,
    pub status: &'static str,
    /// Optimal masses, one row per profile over `k/grid`, `k = 0..=grid`.
    #[serde(skip)]
    pub masses: Vec<Vec<Rational>>,
}

impl BoundCertificate {
    pub fn exact_bound(&self) -> Option<Rational> {
        self.exact_t_star.as_ref().map(Rational::recip)
    }

    pub fn margin(&self) -> Option<f64> {
        self.reference_bound.map(|r| self.bound - r)
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "gadget: {}", self.gadget);
        let _ = writeln!(out, "grid: {}", self.grid);
        let _ = writeln!(out, "mode: {}", if self.mode == SolveMode::Exact { "exact" } else { "floating" });
        match &self.exact_t_star {
            Some(t) => {
                let _ = writeln!(out, "t*: {t} ({})", t.to_decimal_string(6));
                let b = t.recip();
                let _ = writeln!(out, "bound: {b} ({})", b.to_decimal_string(6));
            }
            None => {
                let _ = writeln!(out, "t*: {:.9}", self.t_star);
                let _ = writeln!(out, "bound: {:.9}", self.bound);
            }
        }
        match (self.reference_bound, self.margin()) {
            (Some(r), Some(m)) => {
                let _ = writeln!(out, "paper bound: {r:.6}");
                let _ = writeln!(out, "margin: {m:+.6}");
            }
            _ => {
                let _ = writeln!(out, "paper bound: none");
            }
        }
        out
    }
}

fn grid_points(grid: u32) -> Vec<Rational> {
    let den = i64::from(grid);
    (0..=den).map(|k| Rational::new(k, den)).collect()
}

/// The exact LP; variable `p*(grid+1) + k` is `w[p][k]`, the last is `t`.
pub fn gadget_lp(gadget: &Gadget, grid: u32) -> LinearProgram<Rational> {
    let points = grid_points(grid);
    let m = points.len();
    let n_vars = gadget.profiles.len() * m + 1;
    let t = n_vars - 1;
    let mut objective = vec![Rational::zero(); n_vars];
    objective[t] = Rational::one();
    let mut lp = LinearProgram::new(objective);
    for (p, profile) in gadget.profiles.iter().enumerate() {
        let mut row = vec![Rational::zero(); n_vars];
        for w in &mut row[p * m..(p + 1) * m] {
            *w = Rational::one();
        }
        lp.push(row, Relation::Eq, Rational::one());

        // t·opt − Σ_k SS_p(y_k) w[p][k] ≤ 0
        let mut row = vec![Rational::zero(); n_vars];
        for (k, y) in points.iter().enumerate() {
            row[p * m + k] = -profile.ss_at(y).expect("grid point in [0,1]");
        }
        row[t] = gadget.opt[p].clone();
        lp.push(row, Relation::Le, Rational::zero());
    }
    for e in &gadget.edges {
        // Σ_k s(y_k) (w[to][k] − w[from][k]) ≤ 0, with s the deviator's
        // true satisfaction.
        let truth = &gadget.profiles[e.from];
        let mut row = vec![Rational::zero(); n_vars];
        for (k, y) in points.iter().enumerate() {
            let s = truth.satisfaction(e.agent, y).expect("grid point in [0,1]");
            row[e.from * m + k] = &row[e.from * m + k] - &s;
            row[e.to * m + k] = &row[e.to * m + k] + &s;
        }
        lp.push(row, Relation::Le, Rational::zero());
    }
    lp
}

fn solve_in<T: LpScalar>(lp: &LinearProgram<T>) -> Result<(T, Vec<T>, usize), LpError> {
    let s = lp.solve()?;
    Ok((s.value, s.x, s.iterations))
}

pub fn lp_lower_bound(gadget: &Gadget, grid: u32, mode: SolveMode) -> Result<BoundCertificate, BoundError> {
    if grid < 2 {
        return Err(BoundError::Grid(grid));
    }
    let lp = gadget_lp(gadget, grid);
    let m = grid as usize + 1;
    let (t_star, exact_t_star, x, iterations) = match mode {
        SolveMode::Exact => {
            let (value, x, iterations) = solve_in(&lp)?;
            (value.to_f64(), Some(value), x, iterations)
        }
        SolveMode::Floating => {
            let (value, x, iterations) = solve_in(&lp.map(|a| a.to_f64()))?;
            let x = x.iter().map(|&v| Rational::from_f64(v).unwrap_or_else(Rational::zero)).collect();
            (value, None, x, iterations)
        }
    };
    let masses = (0..gadget.profiles.len()).map(|p| x[p * m..(p + 1) * m].to_vec()).collect();
    Ok(BoundCertificate {
        gadget: gadget.name.clone(),
        grid,
        mode,
        t_star,
        exact_t_star,
        bound: 1.0 / t_star,
        reference_bound: gadget.reference_bound,
        iterations,
        status: "optimal",
        masses,
    })
}

/// The tail inequality behind the max-variant curve. One of the two
/// endpoint agents in `c = (ε, 1−ε)` expects distance at most 1/2 from
/// `f(c)`; the link to that agent's deviation then caps how much mass the
/// deviated profile may put on the far side: `q ≤ 1/(2(1−2ε))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailCheck {
    /// True when the second agent's branch applies.
    pub mirrored: bool,
    pub q: Rational,
    pub bound: Rational,
}

impl TailCheck {
    pub fn holds(&self, slack: &Rational) -> bool {
        self.q <= &self.bound + slack
    }
}

/// Evaluates the tail inequality on masses for the three profiles of
/// [`max_variant_gadget`](super::gadget::max_variant_gadget).
pub fn max_variant_tail_check(epsilon: &Rational, grid: u32, masses: &[Vec<Rational>]) -> TailCheck {
    assert_eq!(masses.len(), 3, "masses for c, c′ and c″");
    let points = grid_points(grid);
    let far = Rational::one() - epsilon;
    let expected_gap: Rational = points.iter().zip(&masses[0]).map(|(y, w)| y.dist(epsilon) * w).sum();
    let bound = (Rational::from_integer(2) * (Rational::one() - Rational::from_integer(2) * epsilon)).recip();
    if expected_gap <= Rational::half() {
        let q = points.iter().zip(&masses[1]).filter(|(y, _)| **y >= far).map(|(_, w)| w.clone()).sum();
        TailCheck { mirrored: false, q, bound }
    } else {
        let q = points.iter().zip(&masses[2]).filter(|(y, _)| *y <= epsilon).map(|(_, w)| w.clone()).sum();
        TailCheck { mirrored: true, q, bound }
    }
}
