//! Small families of profiles linked by single-agent misreports. Any
//! strategy-proof mechanism must respect every link, which caps how close
//! it can get to the optimum on all profiles at once.

use serde::Serialize;
use thiserror::Error;

use super::alpha::{max_variant_constant, optimal_epsilon, EpsilonOutOfRange};
use crate::model::{agent_expected_satisfaction, evaluate, AgentProfile, Instance, Outcome, Setting, Variant};
use crate::opt::solve_ss;
use crate::rational::Rational;

/// Agent `agent` whose truth is profile `from` can report as in `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeviationEdge {
    pub from: usize,
    pub to: usize,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("gadget needs at least one profile")]
    Empty,
    #[error("profile {0} has a different setting, variant or agent count")]
    Mismatch(usize),
    #[error("edge {from}->{to} for agent {agent}: profiles must differ in exactly that agent's report")]
    BadEdge { from: usize, to: usize, agent: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Gadget {
    pub name: String,
    pub profiles: Vec<Instance>,
    pub edges: Vec<DeviationEdge>,
    /// Optimal social satisfaction per profile.
    pub opt: Vec<Rational>,
    /// Lower bound the construction is known to give analytically.
    pub reference_bound: Option<f64>,
}

impl Gadget {
    pub fn new(name: impl Into<String>, profiles: Vec<Instance>, edges: Vec<DeviationEdge>) -> Result<Self, GadgetError> {
        let first = profiles.first().ok_or(GadgetError::Empty)?;
        for (k, p) in profiles.iter().enumerate() {
            if p.setting() != first.setting() || p.variant() != first.variant() || p.n() != first.n() {
                return Err(GadgetError::Mismatch(k));
            }
        }
        for e in &edges {
            let bad = GadgetError::BadEdge { from: e.from, to: e.to, agent: e.agent };
            let (Some(a), Some(b)) = (profiles.get(e.from), profiles.get(e.to)) else {
                return Err(bad);
            };
            if e.agent >= a.n() {
                return Err(bad);
            }
            let differs_elsewhere = (0..a.n()).any(|i| i != e.agent && a.agent(i) != b.agent(i));
            if differs_elsewhere || a.agent(e.agent) == b.agent(e.agent) {
                return Err(bad);
            }
        }
        let opt = profiles.iter().map(|p| solve_ss(p).value).collect();
        Ok(Gadget { name: name.into(), profiles, edges, opt, reference_bound: None })
    }

    pub fn setting(&self) -> Setting {
        self.profiles[0].setting()
    }

    pub fn variant(&self) -> Variant {
        self.profiles[0].variant()
    }

    /// The sub-gadget on `keep` (in that order) with the edges among them.
    pub fn restricted(&self, keep: &[usize]) -> Gadget {
        let position = |k: usize| keep.iter().position(|&j| j == k);
        let edges = self
            .edges
            .iter()
            .filter_map(|e| Some(DeviationEdge { from: position(e.from)?, to: position(e.to)?, agent: e.agent }))
            .collect();
        Gadget {
            name: format!("{} restricted to {:?}", self.name, keep),
            profiles: keep.iter().map(|&k| self.profiles[k].clone()).collect(),
            edges,
            opt: keep.iter().map(|&k| self.opt[k].clone()).collect(),
            reference_bound: None,
        }
    }

    /// Whether one outcome per profile satisfies every misreport link and
    /// reaches `t` times the optimum on every profile.
    pub fn admits(&self, outcomes: &[Outcome], t: &Rational) -> bool {
        assert_eq!(outcomes.len(), self.profiles.len(), "one outcome per profile");
        let performs = self
            .profiles
            .iter()
            .zip(outcomes)
            .zip(&self.opt)
            .all(|((p, o), opt)| evaluate(o, p).ss >= t * opt);
        let truthful = self.edges.iter().all(|e| {
            let truth = &self.profiles[e.from];
            agent_expected_satisfaction(&outcomes[e.from], truth, e.agent)
                >= agent_expected_satisfaction(&outcomes[e.to], truth, e.agent)
        });
        performs && truthful
    }
}

fn both_ways(a: usize, b: usize, agent: usize) -> [DeviationEdge; 2] {
    [DeviationEdge { from: a, to: b, agent }, DeviationEdge { from: b, to: a, agent }]
}

/// Obnoxious/sum gadget: `x = ((1/6,1/6,5/6),(5/6,5/6,5/6))`, `x′` where
/// the first agent reports `(1/6,1/6,1/6)`, and the mirror image `x″` of
/// `x` reached from `x′` by the second agent reporting `(1/6,5/6,5/6)`.
pub fn sum_variant_gadget() -> Gadget {
    let sixths = |ks: &[i64]| AgentProfile::new(ks.iter().map(|&k| Rational::new(k, 6)).collect()).expect("in range");
    let profile = |a: &[i64], b: &[i64]| {
        Instance::new(Setting::Obnoxious, Variant::Sum, vec![sixths(a), sixths(b)]).expect("two agents")
    };
    let profiles = vec![profile(&[1, 1, 5], &[5, 5, 5]), profile(&[1, 1, 1], &[5, 5, 5]), profile(&[1, 1, 1], &[1, 5, 5])];
    let edges = [both_ways(0, 1, 0), both_ways(2, 1, 1)].concat();
    let mut gadget = Gadget::new("sum-variant", profiles, edges).expect("well-formed construction");
    gadget.reference_bound = Some(17.0 / 16.0);
    gadget
}

/// `ε` on the `1/grid` lattice nearest the curve's maximizer.
pub fn default_max_epsilon(grid_denominator: u32) -> Rational {
    Rational::nearest_on_grid(optimal_epsilon(), grid_denominator)
}

/// Obnoxious/max gadget with single-location agents: `c = (ε, 1−ε)`,
/// `c′ = (0, 1−ε)` (first agent moves to 0) and `c″ = (ε, 1)` (second
/// agent moves to 1).
pub fn max_variant_gadget(epsilon: &Rational) -> Result<Gadget, EpsilonOutOfRange> {
    if !epsilon.is_positive() || *epsilon >= Rational::half() {
        return Err(EpsilonOutOfRange(epsilon.to_string()));
    }
    let point = |y: Rational| AgentProfile::new(vec![y]).expect("in range");
    let profile = |a: Rational, b: Rational| {
        Instance::new(Setting::Obnoxious, Variant::Max, vec![point(a), point(b)]).expect("two agents")
    };
    let far = Rational::one() - epsilon;
    let profiles = vec![
        profile(epsilon.clone(), far.clone()),
        profile(Rational::zero(), far),
        profile(epsilon.clone(), Rational::one()),
    ];
    let edges = [both_ways(0, 1, 0), both_ways(0, 2, 1)].concat();
    let mut gadget = Gadget::new(format!("max-variant(eps={epsilon})"), profiles, edges).expect("well-formed construction");
    gadget.reference_bound = Some(max_variant_constant());
    Ok(gadget)
}
