//! The seven strategy-proof mechanisms.
//!
//! Each mechanism is a pure map from an instance to an [`Outcome`].
//! Randomized mechanisms return their lottery symbolically; nothing here
//! samples.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, Objective, Outcome, Setting, Variant};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MechanismId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mechanism `{0}` (expected M1..M7)")]
pub struct UnknownMechanism(pub String);

impl MechanismId {
    pub const ALL: [MechanismId; 7] = [
        MechanismId::M1,
        MechanismId::M2,
        MechanismId::M3,
        MechanismId::M4,
        MechanismId::M5,
        MechanismId::M6,
        MechanismId::M7,
    ];

    pub fn descriptor(self) -> MechanismDescriptor {
        use MechanismId::*;
        use Setting::*;
        let (setting, variants, objective, ratio, kind, statistic): (_, &'static [Variant], _, _, _, _) = match self {
            M1 => (Desirable, &[Variant::Sum], Objective::Ss, (2, 1), Kind::Deterministic, Statistic::Median),
            M2 => (Desirable, &[Variant::Sum, Variant::Max], Objective::Ms, (2, 1), Kind::Deterministic, Statistic::Constant),
            M3 => (Desirable, &[Variant::Max], Objective::Ss, (5, 4), Kind::Deterministic, Statistic::Midpoint),
            M4 => (Obnoxious, &[Variant::Sum], Objective::Ss, (2, 1), Kind::Deterministic, Statistic::SumSide),
            M5 => (Obnoxious, &[Variant::Sum], Objective::Ss, (4, 3), Kind::Randomized, Statistic::SumSide),
            M6 => (Obnoxious, &[Variant::Max], Objective::Ss, (2, 1), Kind::Deterministic, Statistic::MidpointSide),
            M7 => (Obnoxious, &[Variant::Max], Objective::Ss, (4, 3), Kind::Randomized, Statistic::MidpointSide),
        };
        MechanismDescriptor {
            id: self,
            setting,
            variants,
            objective,
            proven_ratio: ratio,
            kind,
            group_sp: true,
            statistic,
        }
    }

    pub fn run(self, instance: &Instance) -> Outcome {
        match self {
            MechanismId::M1 => mech1_median_of_medians(instance),
            MechanismId::M2 => mech2_half(instance),
            MechanismId::M3 => mech3_clamped_median_midpoint(instance),
            MechanismId::M4 => mech4_majority_endpoint(instance),
            MechanismId::M5 => mech5_proportional_lottery(instance),
            MechanismId::M6 => mech6_midpoint_majority(instance),
            MechanismId::M7 => mech7_midpoint_lottery(instance),
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for MechanismId {
    type Err = UnknownMechanism;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownMechanism(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Deterministic,
    Randomized,
}

/// The per-agent quantity a mechanism's output depends on. Misreport
/// search only needs to move this quantity around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Left median of the agent's locations.
    Median,
    /// Midpoint of the agent's extreme locations.
    Midpoint,
    /// Whether the agent's locations sum to at least half their count.
    SumSide,
    /// Whether the agent's midpoint is at most 1/2.
    MidpointSide,
    /// Mean of the agent's locations.
    Mean,
    /// The output ignores reports.
    Constant,
}

#[derive(Debug, Clone, Serialize)]
pub struct MechanismDescriptor {
    pub id: MechanismId,
    pub setting: Setting,
    pub variants: &'static [Variant],
    pub objective: Objective,
    /// Proven approximation ratio as `(numerator, denominator)`.
    proven_ratio: (i64, i64),
    pub kind: Kind,
    pub group_sp: bool,
    pub statistic: Statistic,
}

impl MechanismDescriptor {
    pub fn proven_ratio(&self) -> Rational {
        Rational::new(self.proven_ratio.0, self.proven_ratio.1)
    }

    /// Whether the instance's setting and variant are ones the mechanism
    /// was designed (and its ratio proven) for.
    pub fn is_on_label(&self, instance: &Instance) -> bool {
        self.setting == instance.setting() && self.variants.contains(&instance.variant())
    }
}

/// Anything that maps instances to outcomes, including strawmen used in
/// negative tests.
pub trait Mechanism: Sync {
    fn name(&self) -> String;
    fn outcome(&self, instance: &Instance) -> Outcome;
    fn statistic(&self) -> Statistic;
}

impl Mechanism for MechanismId {
    fn name(&self) -> String {
        self.to_string()
    }

    fn outcome(&self, instance: &Instance) -> Outcome {
        self.run(instance)
    }

    fn statistic(&self) -> Statistic {
        self.descriptor().statistic
    }
}

/// Facility at the mean of all reported coordinates. Not strategy-proof:
/// an agent can drag the mean toward her median by exaggerating.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanStrawman;

impl Mechanism for MeanStrawman {
    fn name(&self) -> String {
        "mean-strawman".to_string()
    }

    fn outcome(&self, instance: &Instance) -> Outcome {
        let total: Rational = instance.agents().iter().map(|a| a.sum_of_locations()).sum();
        Outcome::Point(total / Rational::from(instance.total_locations()))
    }

    fn statistic(&self) -> Statistic {
        Statistic::Mean
    }
}

/// Result of [`run_mechanism`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismRun {
    pub outcome: Outcome,
    /// Set when the instance's setting or variant is not one the
    /// mechanism's ratio guarantee covers.
    pub off_label: bool,
}

pub fn run_mechanism(id: MechanismId, instance: &Instance) -> MechanismRun {
    MechanismRun {
        outcome: id.run(instance),
        off_label: !id.descriptor().is_on_label(instance),
    }
}

/// Like [`run_mechanism`], resolving the id from its public name.
pub fn run_mechanism_named(name: &str, instance: &Instance) -> Result<MechanismRun, UnknownMechanism> {
    Ok(run_mechanism(name.parse()?, instance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionStats {
    /// Agents whose locations sum to at least `Σ(1 - x)`; they prefer 0.
    pub n1: usize,
    pub n2: usize,
    /// Agents with midpoint in `[0, 1/2]`.
    pub s1: usize,
    pub s2: usize,
}

pub fn partition_stats(instance: &Instance) -> PartitionStats {
    let n = instance.n();
    let n1 = instance.agents().iter().filter(|a| prefers_zero(a)).count();
    let s1 = instance.agents().iter().filter(|a| midpoint_in_left_half(a)).count();
    PartitionStats { n1, n2: n - n1, s1, s2: n - s1 }
}

pub(crate) fn prefers_zero(agent: &crate::model::AgentProfile) -> bool {
    agent.sum_of_locations() >= agent.sum_of_complements()
}

pub(crate) fn midpoint_in_left_half(agent: &crate::model::AgentProfile) -> bool {
    agent.midpoint() <= Rational::half()
}

/// Left median of a list, `⌈n/2⌉`-th smallest. Sorting is stable, so equal
/// values keep agent order.
fn left_median_of(mut values: Vec<Rational>) -> Rational {
    values.sort();
    let k = values.len().div_ceil(2) - 1;
    values.swap_remove(k)
}

/// Median (left) of the agents' left medians.
pub fn mech1_median_of_medians(instance: &Instance) -> Outcome {
    let medians = instance.agents().iter().map(|a| a.left_median().clone()).collect();
    Outcome::Point(left_median_of(medians))
}

/// Always 1/2.
pub fn mech2_half(_instance: &Instance) -> Outcome {
    Outcome::Point(Rational::half())
}

/// Median midpoint, clamped into `[1/5, 4/5]`.
pub fn mech3_clamped_median_midpoint(instance: &Instance) -> Outcome {
    let m = left_median_of(instance.agents().iter().map(|a| a.midpoint()).collect());
    let low = Rational::new(1, 5);
    let high = Rational::new(4, 5);
    Outcome::Point(if m <= low {
        low
    } else if m >= high {
        high
    } else {
        m
    })
}

/// 0 if at least half the agents prefer 0, else 1.
pub fn mech4_majority_endpoint(instance: &Instance) -> Outcome {
    let stats = partition_stats(instance);
    Outcome::Point(if stats.n1 >= stats.n2 { Rational::zero() } else { Rational::one() })
}

/// 0 with probability `n1/n`, 1 with probability `n2/n`.
pub fn mech5_proportional_lottery(instance: &Instance) -> Outcome {
    let stats = partition_stats(instance);
    endpoint_lottery(stats.n1, stats.n2)
}

/// 1 if at least half the midpoints lie in `[0, 1/2]`, else 0.
pub fn mech6_midpoint_majority(instance: &Instance) -> Outcome {
    let stats = partition_stats(instance);
    Outcome::Point(if stats.s1 >= stats.s2 { Rational::one() } else { Rational::zero() })
}

/// 1 with probability `s1/n`, 0 with probability `s2/n`.
pub fn mech7_midpoint_lottery(instance: &Instance) -> Outcome {
    let stats = partition_stats(instance);
    endpoint_lottery(stats.s2, stats.s1)
}

/// 0 with weight `at_zero`, 1 with weight `at_one`.
fn endpoint_lottery(at_zero: usize, at_one: usize) -> Outcome {
    let n = Rational::from(at_zero + at_one);
    Outcome::lottery(vec![
        (Rational::zero(), Rational::from(at_zero) / &n),
        (Rational::one(), Rational::from(at_one) / &n),
    ])
    .expect("weights are non-negative and sum to one")
}
