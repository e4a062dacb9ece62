//! Approximation ratios: exact measurement, the registry of tight
//! instances, seeded random sweeps and a hill-climbing adversary.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::mechanisms::MechanismId;
use crate::model::{evaluate, AgentProfile, Instance, Objective, Setting, Variant};
use crate::opt::solve;
use crate::rational::Rational;

/// Optimal value over mechanism value. `Unbounded` when the mechanism
/// scores 0 against a positive optimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RatioValue {
    Finite(Rational),
    Unbounded,
}

impl RatioValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            RatioValue::Finite(r) => Some(r),
            RatioValue::Unbounded => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, RatioValue::Unbounded)
    }
}

impl Ord for RatioValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RatioValue::Finite(a), RatioValue::Finite(b)) => a.cmp(b),
            (RatioValue::Finite(_), RatioValue::Unbounded) => Ordering::Less,
            (RatioValue::Unbounded, RatioValue::Finite(_)) => Ordering::Greater,
            (RatioValue::Unbounded, RatioValue::Unbounded) => Ordering::Equal,
        }
    }
}

impl PartialOrd for RatioValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RatioValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(r) => write!(f, "{r}"),
            RatioValue::Unbounded => write!(f, "unbounded"),
        }
    }
}

impl Serialize for RatioValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `opt / mechanism`, with 0/0 read as 1.
pub fn ratio_of_values(opt: &Rational, mechanism: &Rational) -> RatioValue {
    if mechanism.is_zero() {
        if opt.is_zero() {
            RatioValue::Finite(Rational::one())
        } else {
            RatioValue::Unbounded
        }
    } else {
        RatioValue::Finite(opt / mechanism)
    }
}

/// Exact approximation ratio of `id` on `instance` for `objective`.
pub fn ratio(id: MechanismId, instance: &Instance, objective: Objective) -> RatioValue {
    let opt = solve(instance, objective).value;
    let achieved = evaluate(&id.run(instance), instance);
    ratio_of_values(&opt, achieved.objective(objective))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeneratorConfig {
    pub n_max: usize,
    pub omega_max: usize,
    /// Coordinates are drawn from `{k / coordinate_grid}`.
    pub coordinate_grid: u32,
    pub setting: Setting,
    pub variant: Variant,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(setting: Setting, variant: Variant, seed: u64) -> Self {
        GeneratorConfig { n_max: 5, omega_max: 4, coordinate_grid: 60, setting, variant, seed }
    }

    /// Generator matching `id`'s intended setting (and first intended
    /// variant).
    pub fn on_label(id: MechanismId, seed: u64) -> Self {
        let d = id.descriptor();
        GeneratorConfig::new(d.setting, d.variants[0], seed)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Draws one instance: `n` uniform in `1..=n_max`, each `ω` uniform in
/// `1..=omega_max`, coordinates uniform on the grid.
pub fn random_instance<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Instance {
    assert!(config.n_max >= 1 && config.omega_max >= 1 && config.coordinate_grid >= 1);
    let den = i64::from(config.coordinate_grid);
    let n = rng.gen_range(1..=config.n_max);
    let agents = (0..n)
        .map(|_| {
            let omega = rng.gen_range(1..=config.omega_max);
            let locations = (0..omega).map(|_| Rational::new(rng.gen_range(0..=den), den)).collect();
            AgentProfile::new(locations).expect("grid coordinates lie in [0,1]")
        })
        .collect();
    Instance::new(config.setting, config.variant, agents).expect("n >= 1")
}

/// `count` instances drawn in sequence from the config's seed.
pub fn random_instances(config: &GeneratorConfig, count: usize) -> Vec<Instance> {
    let mut rng = config.rng();
    (0..count).map(|_| random_instance(config, &mut rng)).collect()
}

/// An instance on which a mechanism's ratio is known exactly.
#[derive(Debug, Clone)]
pub struct TightCase {
    pub instance: Instance,
    pub mechanism: MechanismId,
    pub objective: Objective,
    pub expected: RatioValue,
    /// Short description of the construction.
    pub anchor: &'static str,
}

impl TightCase {
    pub fn measured(&self) -> RatioValue {
        ratio(self.mechanism, &self.instance, self.objective)
    }

    /// On-label for both instance shape and objective.
    pub fn is_on_label(&self) -> bool {
        let d = self.mechanism.descriptor();
        d.is_on_label(&self.instance) && d.objective == self.objective
    }
}

pub fn tight_registry() -> Vec<TightCase> {
    use MechanismId::*;
    use Setting::*;
    use Variant::*;
    let q = Rational::new;
    let two = RatioValue::Finite(q(2, 1));
    let four_thirds = RatioValue::Finite(q(4, 3));
    let halves_pair: &[&[(i64, i64)]] = &[&[(0, 1), (1, 2)], &[(1, 2), (1, 1)]];
    let spread_and_left: &[&[(i64, i64)]] = &[&[(0, 1), (1, 1)], &[(0, 1), (1, 2)]];
    let case = |mechanism, objective, instance, expected, anchor| TightCase { instance, mechanism, objective, expected, anchor };
    vec![
        case(M1, Objective::Ss, Instance::from_fractions(Desirable, Sum, halves_pair), two.clone(),
            "median of medians picks 0 for agents (0,1/2) and (1/2,1)"),
        case(M1, Objective::Ms, Instance::from_fractions(Desirable, Sum, &[&[(0, 1), (1, 2)], &[(0, 1), (1, 1)], &[(1, 2), (1, 1)]]),
            RatioValue::Unbounded, "median of medians leaves agent (1/2,1) at satisfaction 0"),
        case(M2, Objective::Ms, Instance::from_fractions(Desirable, Sum, &[&[(0, 1), (1, 2)], &[(0, 1), (0, 1)]]), two.clone(),
            "facility at 1/2 halves agent (0,0)"),
        case(M2, Objective::Ms, Instance::from_fractions(Desirable, Max, &[&[(0, 1)], &[(0, 1)], &[(0, 1)]]), two.clone(),
            "facility at 1/2 with every agent at 0"),
        case(M3, Objective::Ss, Instance::from_fractions(Desirable, Max, &[&[(0, 1)], &[(0, 1)], &[(0, 1)]]),
            RatioValue::Finite(q(5, 4)), "clamp to 1/5 with every agent at 0"),
        case(M4, Objective::Ss, Instance::from_fractions(Obnoxious, Sum, spread_and_left), two.clone(),
            "tie goes to 0 while the left-leaning agent wants 1"),
        case(M5, Objective::Ss, Instance::from_fractions(Obnoxious, Sum, spread_and_left), four_thirds.clone(),
            "even lottery while the optimum is 1"),
        case(M4, Objective::Ms, Instance::from_fractions(Obnoxious, Sum, &[&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]]),
            RatioValue::Unbounded, "endpoint choice leaves one of two opposite agents at 0"),
        case(M6, Objective::Ss, Instance::from_fractions(Obnoxious, Max, &[&[(1, 2)], &[(1, 1)]]), two,
            "tie goes to 1 while the agent at 1 wants 0"),
        case(M7, Objective::Ss, Instance::from_fractions(Obnoxious, Max, &[&[(1, 2)], &[(1, 1)]]), four_thirds,
            "even lottery while the optimum is 0"),
    ]
}

/// A ratio above the proven bound on an on-label instance.
#[derive(Debug, Clone, Error)]
#[error("{mechanism} exceeds its proven ratio {bound} on {objective}: ratio {ratio} at {instance}")]
pub struct BoundExceeded {
    pub mechanism: MechanismId,
    pub objective: Objective,
    pub bound: Rational,
    pub ratio: RatioValue,
    pub instance: Instance,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub mechanism: MechanismId,
    pub objective: Objective,
    pub samples: usize,
    pub worst: RatioValue,
    pub worst_instance: Instance,
    pub seed: u64,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "mechanism,objective,samples,worst_ratio_num,worst_ratio_den,instance,seed";

    /// `unbounded` ratios are written as numerator `unbounded` and an empty
    /// denominator.
    pub fn to_csv_row(&self) -> String {
        let (num, den) = match &self.worst {
            RatioValue::Finite(r) => (r.numer().to_string(), r.denom().to_string()),
            RatioValue::Unbounded => ("unbounded".to_string(), String::new()),
        };
        format!("{},{},{},{},{},{},{}", self.mechanism, self.objective, self.samples, num, den, self.worst_instance, self.seed)
    }

    /// Re-measures the reported worst instance.
    pub fn reproduces(&self) -> bool {
        ratio(self.mechanism, &self.worst_instance, self.objective) == self.worst
    }
}

/// Largest ratio, keeping the earliest instance among equals.
fn worst_of(id: MechanismId, objective: Objective, instances: &[Instance]) -> (RatioValue, usize) {
    instances
        .par_iter()
        .map(|inst| ratio(id, inst, objective))
        .enumerate()
        .reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .map(|(k, r)| (r, k))
        .expect("at least one instance")
}

/// Measures `samples` random instances plus every registry case with the
/// same mechanism, objective, setting and variant. Fails on the first
/// on-label instance whose ratio exceeds the mechanism's proven bound.
pub fn ratio_sweep(
    id: MechanismId,
    objective: Objective,
    config: &GeneratorConfig,
    samples: usize,
) -> Result<SweepReport, Box<BoundExceeded>> {
    let descriptor = id.descriptor();
    let mut instances = random_instances(config, samples);
    instances.extend(
        tight_registry()
            .into_iter()
            .filter(|c| {
                c.mechanism == id
                    && c.objective == objective
                    && c.instance.setting() == config.setting
                    && c.instance.variant() == config.variant
            })
            .map(|c| c.instance),
    );
    let ratios: Vec<RatioValue> = instances.par_iter().map(|inst| ratio(id, inst, objective)).collect();
    let bound = RatioValue::Finite(descriptor.proven_ratio());
    let on_label_objective = descriptor.objective == objective;
    for (inst, r) in instances.iter().zip(&ratios) {
        if on_label_objective && descriptor.is_on_label(inst) && *r > bound {
            return Err(Box::new(BoundExceeded {
                mechanism: id,
                objective,
                bound: descriptor.proven_ratio(),
                ratio: r.clone(),
                instance: inst.clone(),
            }));
        }
    }
    let (worst, k) = worst_of(id, objective, &instances);
    Ok(SweepReport { mechanism: id, objective, samples: instances.len(), worst, worst_instance: instances[k].clone(), seed: config.seed })
}

/// Hill climbing from `restarts` random instances: repeatedly move one
/// coordinate to a random grid value and keep the move if the ratio grows
/// strictly. Deterministic for a fixed seed. Never fails; only reports.
pub fn adversarial_search(
    id: MechanismId,
    objective: Objective,
    config: &GeneratorConfig,
    restarts: usize,
    iterations: usize,
) -> SweepReport {
    let restarts = restarts.max(1);
    let den = i64::from(config.coordinate_grid);
    let mut seeder = config.rng();
    let seeds: Vec<u64> = (0..restarts).map(|_| seeder.gen()).collect();
    let climbs: Vec<(RatioValue, Instance)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut current = random_instance(config, &mut rng);
            let mut current_ratio = ratio(id, &current, objective);
            for _ in 0..iterations {
                if current_ratio.is_unbounded() {
                    break;
                }
                let i = rng.gen_range(0..current.n());
                let agent = current.agent(i);
                let j = rng.gen_range(0..agent.len());
                let mut locations = agent.locations().to_vec();
                locations[j] = Rational::new(rng.gen_range(0..=den), den);
                let profile = AgentProfile::new(locations).expect("grid value in [0,1]");
                let candidate = current.with_agent(i, profile).expect("agent index valid");
                let r = ratio(id, &candidate, objective);
                if r > current_ratio {
                    current = candidate;
                    current_ratio = r;
                }
            }
            (current_ratio, current)
        })
        .collect();
    let (k, _) = climbs
        .iter()
        .enumerate()
        .fold((0, &climbs[0].0), |(bk, br), (k, (r, _))| if r > br { (k, r) } else { (bk, br) });
    let (worst, worst_instance) = climbs[k].clone();
    SweepReport { mechanism: id, objective, samples: restarts, worst, worst_instance, seed: config.seed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    #[test]
    fn ratio_examples() {
        let tight = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(0, 1), (1, 1)], &[(0, 1), (1, 2)]]);
        assert_eq!(ratio(MechanismId::M5, &tight, Objective::Ss), RatioValue::Finite(q(4, 3)));
        let triple = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(0, 1), (1, 2)], &[(0, 1), (1, 1)], &[(1, 2), (1, 1)]]);
        assert_eq!(ratio(MechanismId::M1, &triple, Objective::Ms), RatioValue::Unbounded);
        let symmetric = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(1, 5), (1, 2), (4, 5)]]);
        assert_eq!(ratio(MechanismId::M2, &symmetric, Objective::Ms), RatioValue::Finite(q(1, 1)));
    }

    #[test]
    fn zero_over_zero_is_one() {
        assert_eq!(ratio_of_values(&q(0, 1), &q(0, 1)), RatioValue::Finite(q(1, 1)));
        assert_eq!(ratio_of_values(&q(1, 3), &q(0, 1)), RatioValue::Unbounded);
        assert!(RatioValue::Unbounded > RatioValue::Finite(q(1000, 1)));
    }

    #[test]
    fn generator_contract() {
        let tiny = GeneratorConfig { n_max: 1, omega_max: 1, ..GeneratorConfig::new(Setting::Desirable, Variant::Sum, 3) };
        let inst = random_instance(&tiny, &mut tiny.rng());
        assert_eq!((inst.n(), inst.agent(0).len()), (1, 1));

        let cfg = GeneratorConfig::new(Setting::Obnoxious, Variant::Max, 42);
        assert_eq!(random_instances(&cfg, 5), random_instances(&cfg, 5));
        assert_ne!(random_instances(&cfg, 5), random_instances(&GeneratorConfig { seed: 43, ..cfg }, 5));

        let twelfths = GeneratorConfig { coordinate_grid: 12, ..cfg };
        for inst in random_instances(&twelfths, 1000) {
            assert!(inst.n() <= 5);
            for agent in inst.agents() {
                assert!(agent.len() <= 4);
                for x in agent.locations() {
                    assert_eq!((x * Rational::from_integer(12)).denom(), &num_bigint::BigInt::from(1));
                }
            }
        }
    }

    #[test]
    fn registry_reproduces() {
        let registry = tight_registry();
        assert!(registry.len() >= 7);
        for case in &registry {
            assert_eq!(case.measured(), case.expected, "{}", case.anchor);
        }
    }

    #[test]
    fn csv_row_shape() {
        let report = SweepReport {
            mechanism: MechanismId::M4,
            objective: Objective::Ss,
            samples: 3,
            worst: RatioValue::Finite(q(2, 1)),
            worst_instance: "obnoxious/sum:[0 1|0 1/2]".parse().unwrap(),
            seed: 42,
        };
        assert_eq!(report.to_csv_row(), "M4,ss,3,2,1,obnoxious/sum:[0 1|0 1/2],42");
        assert_eq!(SweepReport::CSV_HEADER.split(',').count(), report.to_csv_row().split(',').count());
        assert!(report.reproduces());
    }

    #[test]
    fn sweep_finds_registry_worst() {
        let cfg = GeneratorConfig::on_label(MechanismId::M4, 42);
        let report = ratio_sweep(MechanismId::M4, Objective::Ss, &cfg, 100).unwrap();
        assert_eq!(report.worst, RatioValue::Finite(q(2, 1)));
        assert!(report.reproduces());
    }

    #[test]
    fn zero_iteration_search_returns_best_start() {
        let cfg = GeneratorConfig { n_max: 3, omega_max: 2, ..GeneratorConfig::on_label(MechanismId::M5, 7) };
        let report = adversarial_search(MechanismId::M5, Objective::Ss, &cfg, 4, 0);
        let mut seeder = cfg.rng();
        let best = (0..4)
            .map(|_| {
                let seed: u64 = seeder.gen();
                let inst = random_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
                ratio(MechanismId::M5, &inst, Objective::Ss)
            })
            .max()
            .unwrap();
        assert_eq!(report.worst, best);
        assert!(report.reproduces());
    }
}
