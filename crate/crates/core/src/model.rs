//! Instances, distances and satisfactions.
//!
//! An agent owns a sorted multiset of locations in `[0, 1]`. Her distance
//! to a facility at `y` is either the total distance to her locations
//! ([`Variant::Sum`]) or the distance to the farthest one
//! ([`Variant::Max`]). Satisfaction rescales that distance by the best and
//! worst distances the agent could possibly see, so it always lies in
//! `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("location {0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("an agent must own at least one location")]
    EmptyProfile,
    #[error("an instance needs at least one agent")]
    NoAgents,
    #[error("invalid lottery: {0}")]
    InvalidLottery(String),
    #[error("agent index {index} out of range for {n} agents")]
    NoSuchAgent { index: usize, n: usize },
}

/// Whether agents want the facility near (`Desirable`) or far (`Obnoxious`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Desirable,
    Obnoxious,
}

/// Total distance (`Sum`) or farthest-location distance (`Max`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sum,
    Max,
}

/// Social objective: sum of satisfactions or minimum satisfaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Ss,
    Ms,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown {} `{}` (expected one of: {})",
                        stringify!($ty).to_lowercase(),
                        other,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Setting { Desirable => "desirable", Obnoxious => "obnoxious" });
keyword_enum!(Variant { Sum => "sum", Max => "max" });
keyword_enum!(Objective { Ss => "ss", Ms => "ms" });

/// One agent's reported locations, sorted non-decreasing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct AgentProfile {
    locations: Vec<Rational>,
}

impl AgentProfile {
    pub fn new(mut locations: Vec<Rational>) -> Result<Self, ModelError> {
        if locations.is_empty() {
            return Err(ModelError::EmptyProfile);
        }
        if let Some(bad) = locations.iter().find(|x| !x.in_unit_interval()) {
            return Err(ModelError::OutOfRange(bad.clone()));
        }
        locations.sort();
        Ok(AgentProfile { locations })
    }

    /// `count` copies of `v`.
    pub fn constant(v: Rational, count: usize) -> Result<Self, ModelError> {
        AgentProfile::new(vec![v; count])
    }

    /// Shorthand for tests and fixtures: each pair is `(num, den)`.
    pub fn from_fractions(fractions: &[(i64, i64)]) -> Result<Self, ModelError> {
        AgentProfile::new(fractions.iter().map(|&(p, q)| Rational::new(p, q)).collect())
    }

    pub fn locations(&self) -> &[Rational] {
        &self.locations
    }

    /// Number of locations, `ω_i`.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn first(&self) -> &Rational {
        &self.locations[0]
    }

    pub fn last(&self) -> &Rational {
        &self.locations[self.locations.len() - 1]
    }

    /// `(first + last) / 2`
    pub fn midpoint(&self) -> Rational {
        (self.first() + self.last()) * Rational::half()
    }

    /// The `⌈ω/2⌉`-th smallest location (1-indexed).
    pub fn left_median(&self) -> &Rational {
        &self.locations[self.locations.len().div_ceil(2) - 1]
    }

    /// Half the spread of the locations.
    pub fn half_spread(&self) -> Rational {
        (self.last() - self.first()) * Rational::half()
    }

    pub fn sum_of_locations(&self) -> Rational {
        self.locations.iter().sum()
    }

    /// `Σ (1 - x_j)`
    pub fn sum_of_complements(&self) -> Rational {
        Rational::from(self.len()) - self.sum_of_locations()
    }

    /// Total distance from `y` to every location.
    pub fn d1(&self, y: &Rational) -> Result<Rational, ModelError> {
        check_location(y)?;
        Ok(self.d1_unchecked(y))
    }

    /// Distance from `y` to the farthest location.
    pub fn d2(&self, y: &Rational) -> Result<Rational, ModelError> {
        check_location(y)?;
        Ok(self.d2_unchecked(y))
    }

    pub fn distance(&self, y: &Rational, variant: Variant) -> Result<Rational, ModelError> {
        check_location(y)?;
        Ok(self.distance_unchecked(y, variant))
    }

    pub(crate) fn d1_unchecked(&self, y: &Rational) -> Rational {
        self.locations.iter().map(|x| y.dist(x)).sum()
    }

    pub(crate) fn d2_unchecked(&self, y: &Rational) -> Rational {
        std::cmp::max(y.dist(self.first()), y.dist(self.last()))
    }

    pub(crate) fn distance_unchecked(&self, y: &Rational, variant: Variant) -> Rational {
        match variant {
            Variant::Sum => self.d1_unchecked(y),
            Variant::Max => self.d2_unchecked(y),
        }
    }

    /// Smallest and largest distance over all facility positions in `[0, 1]`.
    pub fn distance_extremes(&self, variant: Variant) -> Extremes {
        match variant {
            Variant::Sum => {
                let min = self.d1_unchecked(self.left_median());
                let max = std::cmp::max(self.sum_of_locations(), self.sum_of_complements());
                Extremes { min, max }
            }
            Variant::Max => {
                let min = self.half_spread();
                let c = self.midpoint();
                let reach = std::cmp::max(c.clone(), Rational::one() - c);
                Extremes { max: reach + &min, min }
            }
        }
    }

    /// True when every facility position gives the same distance. Only
    /// possible for the sum variant, with equally many locations at 0 and 1.
    pub fn is_degenerate(&self, variant: Variant) -> bool {
        self.distance_extremes(variant).is_degenerate()
    }

    /// Satisfaction with a facility at `y`; see [`Extremes::satisfaction`].
    pub fn satisfaction(&self, y: &Rational, setting: Setting, variant: Variant) -> Result<Rational, ModelError> {
        check_location(y)?;
        let extremes = self.distance_extremes(variant);
        Ok(extremes.satisfaction(&self.distance_unchecked(y, variant), setting))
    }
}

impl fmt::Debug for AgentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.locations.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

fn check_location(y: &Rational) -> Result<(), ModelError> {
    if y.in_unit_interval() {
        Ok(())
    } else {
        Err(ModelError::OutOfRange(y.clone()))
    }
}

/// `δ` and `Δ` of one agent under one variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremes {
    pub min: Rational,
    pub max: Rational,
}

impl Extremes {
    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    /// Maps a distance to satisfaction. Degenerate agents are fully
    /// satisfied everywhere, in both settings.
    pub fn satisfaction(&self, distance: &Rational, setting: Setting) -> Rational {
        if self.is_degenerate() {
            return Rational::one();
        }
        let worse = (distance - &self.min) / (&self.max - &self.min);
        match setting {
            Setting::Desirable => Rational::one() - worse,
            Setting::Obnoxious => worse,
        }
    }
}

/// Setting, variant and the agents' profiles.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Instance {
    setting: Setting,
    variant: Variant,
    agents: Vec<AgentProfile>,
}

impl Instance {
    pub fn new(setting: Setting, variant: Variant, agents: Vec<AgentProfile>) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        Ok(Instance { setting, variant, agents })
    }

    /// Builds an instance from `(num, den)` coordinates. Panics on invalid
    /// input; intended for fixtures.
    pub fn from_fractions(setting: Setting, variant: Variant, agents: &[&[(i64, i64)]]) -> Self {
        let agents = agents
            .iter()
            .map(|p| AgentProfile::from_fractions(p).expect("valid fixture profile"))
            .collect();
        Instance::new(setting, variant, agents).expect("valid fixture instance")
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn agents(&self) -> &[AgentProfile] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentProfile {
        &self.agents[i]
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// Total number of locations across agents.
    pub fn total_locations(&self) -> usize {
        self.agents.iter().map(AgentProfile::len).sum()
    }

    pub fn with_setting(&self, setting: Setting) -> Instance {
        Instance { setting, ..self.clone() }
    }

    pub fn with_variant(&self, variant: Variant) -> Instance {
        Instance { variant, ..self.clone() }
    }

    /// Copy of the instance with agent `i` reporting `profile` instead.
    pub fn with_agent(&self, i: usize, profile: AgentProfile) -> Result<Instance, ModelError> {
        if i >= self.n() {
            return Err(ModelError::NoSuchAgent { index: i, n: self.n() });
        }
        let mut next = self.clone();
        next.agents[i] = profile;
        Ok(next)
    }

    pub fn has_degenerate_agent(&self) -> bool {
        self.agents.iter().any(|a| a.is_degenerate(self.variant))
    }

    /// Per-agent `δ`/`Δ`, for evaluating many facility positions.
    pub fn scales(&self) -> Vec<Extremes> {
        self.agents.iter().map(|a| a.distance_extremes(self.variant)).collect()
    }

    pub fn satisfaction(&self, i: usize, y: &Rational) -> Result<Rational, ModelError> {
        self.agents[i].satisfaction(y, self.setting, self.variant)
    }

    /// All agents' satisfactions at a point, using precomputed scales.
    pub(crate) fn satisfactions_at(&self, scales: &[Extremes], y: &Rational) -> Vec<Rational> {
        self.agents
            .iter()
            .zip(scales)
            .map(|(a, e)| e.satisfaction(&a.distance_unchecked(y, self.variant), self.setting))
            .collect()
    }

    /// Social satisfaction at a point.
    pub fn ss_at(&self, y: &Rational) -> Result<Rational, ModelError> {
        check_location(y)?;
        Ok(self.satisfactions_at(&self.scales(), y).into_iter().sum())
    }

    /// Minimum satisfaction at a point.
    pub fn ms_at(&self, y: &Rational) -> Result<Rational, ModelError> {
        check_location(y)?;
        Ok(self.satisfactions_at(&self.scales(), y).into_iter().min().expect("n >= 1"))
    }

    pub fn objective_at(&self, objective: Objective, y: &Rational) -> Result<Rational, ModelError> {
        match objective {
            Objective::Ss => self.ss_at(y),
            Objective::Ms => self.ms_at(y),
        }
    }
}

/// Canonical one-line form, e.g. `obnoxious/sum:[1/6 1/6 5/6|5/6 5/6 5/6]`.
impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}:[", self.setting, self.variant)?;
        for (i, agent) in self.agents.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (k, x) in agent.locations().iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Instance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, body) = s.trim().split_once(':').ok_or("missing `:` after setting/variant")?;
        let (setting, variant) = head.split_once('/').ok_or("expected `setting/variant`")?;
        let setting: Setting = setting.trim().parse()?;
        let variant: Variant = variant.trim().parse()?;
        let body = body
            .trim()
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or("agents must be enclosed in `[...]`")?;
        let agents = body
            .split('|')
            .map(|chunk| {
                let locations = chunk
                    .split_whitespace()
                    .map(|x| x.parse::<Rational>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                AgentProfile::new(locations).map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(setting, variant, agents).map_err(|e| e.to_string())
    }
}

/// Facility decision: a point, or a finite lottery over points.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Point(Rational),
    /// Sorted by point; points distinct; probabilities positive and
    /// summing to 1; at least two entries.
    Lottery(Vec<(Rational, Rational)>),
}

impl Outcome {
    pub fn point(y: Rational) -> Result<Self, ModelError> {
        check_location(&y)?;
        Ok(Outcome::Point(y))
    }

    /// Canonicalizes: merges repeated points, drops zero-probability
    /// entries, and collapses a single remaining point to [`Outcome::Point`].
    pub fn lottery(entries: Vec<(Rational, Rational)>) -> Result<Self, ModelError> {
        let mut total = Rational::zero();
        for (y, p) in &entries {
            check_location(y)?;
            if p.is_negative() {
                return Err(ModelError::InvalidLottery(format!("negative probability {p} at {y}")));
            }
            total = total + p;
        }
        if total != Rational::one() {
            return Err(ModelError::InvalidLottery(format!("probabilities sum to {total}")));
        }
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(entries.len());
        let mut sorted = entries;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (y, p) in sorted {
            match merged.last_mut() {
                Some((last, mass)) if *last == y => *mass = &*mass + &p,
                _ => merged.push((y, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        if merged.len() == 1 {
            Ok(Outcome::Point(merged.pop().expect("one entry").0))
        } else {
            Ok(Outcome::Lottery(merged))
        }
    }

    /// `(point, probability)` pairs; a point has probability 1.
    pub fn support(&self) -> Vec<(Rational, Rational)> {
        match self {
            Outcome::Point(y) => vec![(y.clone(), Rational::one())],
            Outcome::Lottery(entries) => entries.clone(),
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Outcome::Lottery(_))
    }

    /// Expected facility position.
    pub fn mean(&self) -> Rational {
        self.support().iter().map(|(y, p)| y * p).sum()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Point(y) => write!(f, "{y}"),
            Outcome::Lottery(entries) => {
                write!(f, "{{")?;
                for (k, (y, p)) in entries.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{y}: {p}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Expected satisfaction of every agent plus the two aggregates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatisfactionProfile {
    pub per_agent: Vec<Rational>,
    pub ss: Rational,
    pub ms: Rational,
}

impl SatisfactionProfile {
    pub fn objective(&self, objective: Objective) -> &Rational {
        match objective {
            Objective::Ss => &self.ss,
            Objective::Ms => &self.ms,
        }
    }
}

/// Expected satisfactions under `outcome`.
pub fn evaluate(outcome: &Outcome, instance: &Instance) -> SatisfactionProfile {
    let scales = instance.scales();
    let mut per_agent = vec![Rational::zero(); instance.n()];
    for (y, p) in outcome.support() {
        for (acc, s) in per_agent.iter_mut().zip(instance.satisfactions_at(&scales, &y)) {
            *acc = &*acc + &(s * &p);
        }
    }
    let ss = per_agent.iter().sum();
    let ms = per_agent.iter().min().cloned().expect("n >= 1");
    SatisfactionProfile { per_agent, ss, ms }
}

/// Expected satisfaction of agent `i` only.
pub fn agent_expected_satisfaction(outcome: &Outcome, instance: &Instance, i: usize) -> Rational {
    let agent = instance.agent(i);
    let extremes = agent.distance_extremes(instance.variant());
    expected_satisfaction_for(outcome, agent, &extremes, instance.setting(), instance.variant())
}

pub(crate) fn expected_satisfaction_for(
    outcome: &Outcome,
    agent: &AgentProfile,
    extremes: &Extremes,
    setting: Setting,
    variant: Variant,
) -> Rational {
    match outcome {
        Outcome::Point(y) => extremes.satisfaction(&agent.distance_unchecked(y, variant), setting),
        Outcome::Lottery(entries) => entries
            .iter()
            .map(|(y, p)| extremes.satisfaction(&agent.distance_unchecked(y, variant), setting) * p)
            .sum(),
    }
}
