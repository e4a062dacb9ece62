//! Exhaustive search for profitable misreports.
//!
//! The mechanisms' outputs depend on each agent only through one statistic
//! (median, midpoint, or which side she leans to). A constant profile
//! `(v, ..., v)` has median, midpoint and mean all equal to `v`, so sweeping
//! `v` over every value that can reorder the deviator against the others'
//! statistics and the mechanisms' fixed thresholds reaches every output a
//! misreport could produce.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::mechanisms::{Mechanism, Statistic};
use crate::model::{expected_satisfaction_for, AgentProfile, Extremes, Instance, Outcome};
use crate::rational::Rational;

/// Default cap on joint deviations examined by [`check_gsp`].
pub const DEFAULT_GSP_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Misreport {
    pub deviators: Vec<usize>,
    /// Reported profile of each deviator, aligned with `deviators`.
    pub reports: Vec<AgentProfile>,
    pub outcome: Outcome,
    /// True-profile satisfaction of each deviator when truthful.
    pub before: Vec<Rational>,
    /// True-profile satisfaction of each deviator after the deviation.
    pub after: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SpHolds,
    Violated,
    /// The deviation budget ran out before the search finished.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpReport {
    pub verdict: Verdict,
    pub witness: Option<Misreport>,
    pub candidates_tried: usize,
}

fn statistic_of(stat: Statistic, agent: &AgentProfile) -> Option<Rational> {
    match stat {
        Statistic::Median => Some(agent.left_median().clone()),
        Statistic::Midpoint => Some(agent.midpoint()),
        Statistic::Mean => Some(agent.sum_of_locations() / Rational::from(agent.len())),
        Statistic::SumSide | Statistic::MidpointSide | Statistic::Constant => None,
    }
}

/// Reported profiles (all of length `ω_agent`) to try for `agent`.
pub fn misreport_candidates<M: Mechanism + ?Sized>(
    mechanism: &M,
    instance: &Instance,
    agent: usize,
    grid_denominator: u32,
) -> Vec<AgentProfile> {
    assert!(agent < instance.n(), "agent index out of range");
    assert!(grid_denominator >= 2, "grid denominator must be at least 2");
    let omega = instance.agent(agent).len();
    let stat = mechanism.statistic();
    let fixed = [(0, 1), (1, 5), (1, 2), (4, 5), (1, 1)].map(|(p, q)| Rational::new(p, q));

    let values: Vec<Rational> = match stat {
        Statistic::SumSide | Statistic::MidpointSide | Statistic::Constant => {
            // One profile per side, plus the closed boundary 1/2 (on the
            // "prefers 0" side for sums, the "left half" side for midpoints).
            vec![Rational::zero(), Rational::half(), Rational::one()]
        }
        Statistic::Median | Statistic::Midpoint | Statistic::Mean => {
            let mut base: BTreeSet<Rational> = fixed.into_iter().collect();
            base.extend(instance.agents().iter().filter_map(|a| statistic_of(stat, a)));
            let den = i64::from(grid_denominator);
            base.extend((0..=den).map(|k| Rational::new(k, den)));
            let sorted: Vec<Rational> = base.iter().cloned().collect();
            base.extend(sorted.windows(2).map(|w| (&w[0] + &w[1]) * Rational::half()));
            base.into_iter().collect()
        }
    };
    values
        .into_iter()
        .map(|v| AgentProfile::constant(v, omega).expect("candidate values lie in [0,1]"))
        .collect()
}

struct Truth {
    scales: Vec<Extremes>,
    baseline: Vec<Rational>,
}

impl Truth {
    fn new<M: Mechanism + ?Sized>(mechanism: &M, instance: &Instance) -> Self {
        let scales = instance.scales();
        let outcome = mechanism.outcome(instance);
        let baseline = (0..instance.n())
            .map(|i| expected_satisfaction_for(&outcome, instance.agent(i), &scales[i], instance.setting(), instance.variant()))
            .collect();
        Truth { scales, baseline }
    }

    fn satisfaction(&self, instance: &Instance, i: usize, outcome: &Outcome) -> Rational {
        expected_satisfaction_for(outcome, instance.agent(i), &self.scales[i], instance.setting(), instance.variant())
    }

    /// Runs the joint deviation; returns the witness if every deviator
    /// strictly gains.
    fn try_deviation<M: Mechanism + ?Sized>(
        &self,
        mechanism: &M,
        instance: &Instance,
        deviators: &[usize],
        reports: &[&AgentProfile],
    ) -> Option<Misreport> {
        let mut reported = instance.clone();
        for (&i, &p) in deviators.iter().zip(reports) {
            reported = reported.with_agent(i, p.clone()).expect("deviator index valid");
        }
        let outcome = mechanism.outcome(&reported);
        let mut after = Vec::with_capacity(deviators.len());
        for &i in deviators {
            let s = self.satisfaction(instance, i, &outcome);
            if s <= self.baseline[i] {
                return None;
            }
            after.push(s);
        }
        Some(Misreport {
            deviators: deviators.to_vec(),
            reports: reports.iter().map(|&p| p.clone()).collect(),
            outcome,
            before: deviators.iter().map(|&i| self.baseline[i].clone()).collect(),
            after,
        })
    }
}

/// Single-agent strategy-proofness over the candidate misreports.
pub fn check_sp<M: Mechanism + ?Sized>(mechanism: &M, instance: &Instance, grid_denominator: u32) -> SpReport {
    let truth = Truth::new(mechanism, instance);
    let trials: Vec<(usize, AgentProfile)> = (0..instance.n())
        .flat_map(|i| {
            misreport_candidates(mechanism, instance, i, grid_denominator)
                .into_iter()
                .map(move |p| (i, p))
        })
        .collect();
    let witness = trials
        .par_iter()
        .find_map_first(|(i, p)| truth.try_deviation(mechanism, instance, &[*i], &[p]));
    SpReport {
        verdict: if witness.is_some() { Verdict::Violated } else { Verdict::SpHolds },
        witness,
        candidates_tried: trials.len(),
    }
}

/// All subsets of `0..n` of size `1..=max_size`, by size then
/// lexicographically.
fn coalitions(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            extend(i + 1, n, size, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        extend(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Group strategy-proofness with the default deviation budget.
pub fn check_gsp<M: Mechanism + ?Sized>(
    mechanism: &M,
    instance: &Instance,
    max_coalition_size: usize,
    grid_denominator: u32,
) -> SpReport {
    check_gsp_with_budget(mechanism, instance, max_coalition_size, grid_denominator, DEFAULT_GSP_BUDGET)
}

/// Searches coalitions of up to `max_coalition_size` agents for a joint
/// misreport under which every member is strictly better off. Stops with
/// [`Verdict::Inconclusive`] once `budget` joint deviations have been tried
/// without finding one.
pub fn check_gsp_with_budget<M: Mechanism + ?Sized>(
    mechanism: &M,
    instance: &Instance,
    max_coalition_size: usize,
    grid_denominator: u32,
    budget: usize,
) -> SpReport {
    let truth = Truth::new(mechanism, instance);
    let per_agent: Vec<Vec<AgentProfile>> = (0..instance.n())
        .map(|i| misreport_candidates(mechanism, instance, i, grid_denominator))
        .collect();
    let mut tried = 0usize;
    for coalition in coalitions(instance.n(), max_coalition_size) {
        let radices: Vec<usize> = coalition.iter().map(|&i| per_agent[i].len()).collect();
        let total: usize = radices.iter().product();
        let remaining = budget - tried;
        let span = total.min(remaining);
        let witness = (0..span).into_par_iter().find_map_first(|mut index| {
            // Mixed-radix decode; the last member varies fastest.
            let mut reports = vec![&per_agent[0][0]; coalition.len()];
            for (slot, (&i, &radix)) in coalition.iter().zip(&radices).enumerate().rev() {
                reports[slot] = &per_agent[i][index % radix];
                index /= radix;
            }
            truth.try_deviation(mechanism, instance, &coalition, &reports)
        });
        tried += span;
        if witness.is_some() {
            return SpReport { verdict: Verdict::Violated, witness, candidates_tried: tried };
        }
        if span < total {
            return SpReport { verdict: Verdict::Inconclusive, witness: None, candidates_tried: tried };
        }
    }
    SpReport { verdict: Verdict::SpHolds, witness: None, candidates_tried: tried }
}

/// Re-runs a witness from scratch and confirms every deviator strictly
/// gains and the recorded numbers are exact.
pub fn verify_witness<M: Mechanism + ?Sized>(mechanism: &M, instance: &Instance, witness: &Misreport) -> bool {
    let mut reported = instance.clone();
    for (&i, p) in witness.deviators.iter().zip(&witness.reports) {
        if p.len() != instance.agent(i).len() {
            return false;
        }
        reported = match reported.with_agent(i, p.clone()) {
            Ok(r) => r,
            Err(_) => return false,
        };
    }
    let truthful = mechanism.outcome(instance);
    let deviated = mechanism.outcome(&reported);
    if deviated != witness.outcome {
        return false;
    }
    witness.deviators.iter().enumerate().all(|(k, &i)| {
        let before = crate::model::agent_expected_satisfaction(&truthful, instance, i);
        let after = crate::model::agent_expected_satisfaction(&deviated, instance, i);
        before == witness.before[k] && after == witness.after[k] && after > before
    })
}
