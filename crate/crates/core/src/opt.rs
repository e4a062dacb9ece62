//! Exact optimal facility locations.
//!
//! Every agent's satisfaction is piecewise linear in the facility position,
//! with kinks only at her locations (sum variant) or her midpoint (max
//! variant). The social satisfaction is therefore maximized at a kink or an
//! endpoint. The minimum satisfaction can also peak where two agents' linear
//! pieces cross, so for it we refine further by all pairwise crossings.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{Instance, Objective, Variant};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub location: Rational,
    pub value: Rational,
    pub objective: Objective,
    pub candidates_examined: usize,
}

/// Kinks of every agent's satisfaction plus the endpoints 0 and 1.
pub fn breakpoints(instance: &Instance) -> Vec<Rational> {
    let mut points = BTreeSet::new();
    points.insert(Rational::zero());
    points.insert(Rational::one());
    for agent in instance.agents() {
        match instance.variant() {
            Variant::Sum => points.extend(agent.locations().iter().cloned()),
            Variant::Max => {
                points.insert(agent.midpoint());
            }
        }
    }
    points.into_iter().collect()
}

/// A finite, sorted set of positions guaranteed to contain an optimum.
pub fn candidate_points(instance: &Instance, objective: Objective) -> Vec<Rational> {
    let kinks = breakpoints(instance);
    if objective == Objective::Ss {
        return kinks;
    }
    let scales = instance.scales();
    let values: Vec<Vec<Rational>> = kinks.iter().map(|y| instance.satisfactions_at(&scales, y)).collect();
    let mut points: BTreeSet<Rational> = kinks.iter().cloned().collect();
    for (k, window) in kinks.windows(2).enumerate() {
        let (a, b) = (&window[0], &window[1]);
        let (at_a, at_b) = (&values[k], &values[k + 1]);
        for i in 0..instance.n() {
            for j in (i + 1)..instance.n() {
                let gap_a = &at_a[i] - &at_a[j];
                let gap_b = &at_b[i] - &at_b[j];
                let crosses = (gap_a.is_positive() && gap_b.is_negative()) || (gap_a.is_negative() && gap_b.is_positive());
                if crosses {
                    // Both functions are linear on [a, b]; their difference
                    // vanishes at a + (b - a) * gap_a / (gap_a - gap_b).
                    let t = &gap_a / (&gap_a - &gap_b);
                    points.insert(a + &((b - a) * t));
                }
            }
        }
    }
    points.into_iter().collect()
}

fn best_over(instance: &Instance, objective: Objective, points: &[Rational]) -> OptResult {
    let scales = instance.scales();
    let mut best: Option<(Rational, Rational)> = None;
    for y in points {
        let sats = instance.satisfactions_at(&scales, y);
        let value = match objective {
            Objective::Ss => sats.into_iter().sum(),
            Objective::Ms => sats.into_iter().min().expect("n >= 1"),
        };
        // Strict improvement only, so the earliest (smallest) maximizer wins.
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((y.clone(), value));
        }
    }
    let (location, value) = best.expect("candidate set is never empty");
    OptResult { location, value, objective, candidates_examined: points.len() }
}

/// Maximizer of the social satisfaction (smallest one on ties).
pub fn solve_ss(instance: &Instance) -> OptResult {
    best_over(instance, Objective::Ss, &candidate_points(instance, Objective::Ss))
}

/// Maximizer of the minimum satisfaction (smallest one on ties).
pub fn solve_ms(instance: &Instance) -> OptResult {
    best_over(instance, Objective::Ms, &candidate_points(instance, Objective::Ms))
}

pub fn solve(instance: &Instance, objective: Objective) -> OptResult {
    match objective {
        Objective::Ss => solve_ss(instance),
        Objective::Ms => solve_ms(instance),
    }
}

/// Every candidate point attaining the optimum. When the objective is
/// flat between two such points the whole segment is optimal; only its
/// candidate endpoints are listed.
pub fn argmax_set(instance: &Instance, objective: Objective) -> Vec<Rational> {
    let best = solve(instance, objective);
    candidate_points(instance, objective)
        .into_iter()
        .filter(|y| instance.objective_at(objective, y).expect("candidate in [0,1]") == best.value)
        .collect()
}

/// Brute force over `k / grid_denominator`, `k = 0..=grid_denominator`.
/// Independent of the candidate construction above; used as a test oracle.
pub fn grid_oracle(instance: &Instance, objective: Objective, grid_denominator: u32) -> OptResult {
    assert!(grid_denominator >= 1, "grid denominator must be positive");
    let den = i64::from(grid_denominator);
    let points: Vec<Rational> = (0..=den).map(|k| Rational::new(k, den)).collect();
    best_over(instance, objective, &points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Outcome, Setting};

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    #[test]
    fn candidates_ss_sum() {
        let inst = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(0, 1), (1, 2)], &[(1, 2), (1, 1)]]);
        assert_eq!(candidate_points(&inst, Objective::Ss), vec![q(0, 1), q(1, 2), q(1, 1)]);
    }

    #[test]
    fn candidates_ss_max_are_midpoints() {
        let inst = Instance::from_fractions(Setting::Obnoxious, Variant::Max, &[&[(1, 10)], &[(9, 10)]]);
        assert_eq!(candidate_points(&inst, Objective::Ss), vec![q(0, 1), q(1, 10), q(9, 10), q(1, 1)]);
        let inst = Instance::from_fractions(Setting::Obnoxious, Variant::Max, &[&[(0, 1), (1, 5)], &[(4, 5), (1, 1)]]);
        assert_eq!(candidate_points(&inst, Objective::Ss), vec![q(0, 1), q(1, 10), q(9, 10), q(1, 1)]);
    }

    #[test]
    fn candidates_ms_include_crossings() {
        for setting in [Setting::Desirable, Setting::Obnoxious] {
            let inst = Instance::from_fractions(setting, Variant::Sum, &[&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]]);
            let oracle = grid_oracle(&inst, Objective::Ms, 1000);
            assert!(candidate_points(&inst, Objective::Ms).contains(&oracle.location));
            assert!(candidate_points(&inst, Objective::Ms).contains(&q(1, 2)));
        }
    }

    #[test]
    fn ss_examples() {
        let gadget = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(1, 6), (1, 6), (5, 6)], &[(5, 6), (5, 6), (5, 6)]]);
        let r = solve_ss(&gadget);
        assert_eq!((r.location, r.value), (q(0, 1), q(10, 7)));

        let pair = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(0, 1), (1, 2)], &[(1, 2), (1, 1)]]);
        let r = solve_ss(&pair);
        assert_eq!((r.location, r.value), (q(1, 2), q(2, 1)));

        let single = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(1, 5), (2, 5), (3, 5), (4, 5)]]);
        let r = solve_ss(&single);
        assert_eq!((r.location, r.value), (q(2, 5), q(1, 1)));
    }

    #[test]
    fn ms_examples() {
        let triple = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(0, 1), (1, 2)], &[(0, 1), (1, 1)], &[(1, 2), (1, 1)]]);
        let r = solve_ms(&triple);
        assert_eq!((r.location, r.value), (q(1, 2), q(1, 1)));

        let ends = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]]);
        let r = solve_ms(&ends);
        assert_eq!((r.location.clone(), r.value.clone()), (q(1, 2), q(1, 2)));
        let g = grid_oracle(&ends, Objective::Ms, 1000);
        assert_eq!((g.location, g.value), (r.location, r.value));

        let single = Instance::from_fractions(Setting::Desirable, Variant::Max, &[&[(1, 5), (3, 10), (9, 10)]]);
        let r = solve_ms(&single);
        assert_eq!((r.location, r.value), (q(11, 20), q(1, 1)));
    }

    #[test]
    fn oracle_grid_one_is_endpoints() {
        let inst = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(1, 3)], &[(1, 4), (1, 2)]]);
        let g = grid_oracle(&inst, Objective::Ss, 1);
        assert_eq!(g.candidates_examined, 2);
        let best01 = std::cmp::max(inst.ss_at(&q(0, 1)).unwrap(), inst.ss_at(&q(1, 1)).unwrap());
        assert_eq!(g.value, best01);
    }

    #[test]
    fn gadget_oracle_matches() {
        let gadget = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(1, 6), (1, 6), (5, 6)], &[(5, 6), (5, 6), (5, 6)]]);
        let g = grid_oracle(&gadget, Objective::Ss, 1000);
        assert_eq!((g.location, g.value.clone()), (q(0, 1), q(10, 7)));
        assert_eq!(solve_ss(&gadget).value, g.value);
    }

    #[test]
    fn result_value_consistent_with_evaluate() {
        let inst = Instance::from_fractions(Setting::Desirable, Variant::Max, &[&[(0, 1), (1, 3)], &[(1, 2), (3, 4)], &[(9, 10)]]);
        for objective in [Objective::Ss, Objective::Ms] {
            let r = solve(&inst, objective);
            let sp = evaluate(&Outcome::Point(r.location.clone()), &inst);
            assert_eq!(&r.value, sp.objective(objective));
        }
    }

    #[test]
    fn argmax_set_reports_plateau_ends() {
        // One agent with a flat optimal stretch on [1/4, 3/4].
        let inst = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(1, 4), (3, 4)]]);
        assert_eq!(argmax_set(&inst, Objective::Ss), vec![q(1, 4), q(3, 4)]);
        assert_eq!(solve_ss(&inst).location, q(1, 4));
    }
}
