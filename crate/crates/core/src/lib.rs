//! Facility location on `[0, 1]` for agents that each control several
//! locations.
//!
//! Agents score a facility position by a normalized satisfaction in
//! `[0, 1]`, computed from either the total distance to their locations
//! or the distance to the farthest one, and want the facility either near
//! (desirable) or far (obnoxious). The crate provides exact optimal
//! solvers, seven strategy-proof mechanisms, strategy-proofness checkers,
//! approximation-ratio sweeps and LP certificates for the randomized lower
//! bounds. All arithmetic is exact over [`Rational`].

pub mod bounds;
pub mod harness;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod opt;
pub mod rational;
pub mod tables;
pub mod truthfulness;

pub use harness::{ratio, tight_registry, GeneratorConfig, RatioValue, SweepReport, TightCase};
pub use io::{parse_instance, serialize_instance, InstanceDocument, ParseError};
pub use mechanisms::{Mechanism, MechanismId, MeanStrawman};
pub use model::{evaluate, AgentProfile, Extremes, Instance, ModelError, Objective, Outcome, SatisfactionProfile, Setting, Variant};
pub use opt::{grid_oracle, solve, solve_ms, solve_ss, OptResult};
pub use rational::Rational;
pub use truthfulness::{check_gsp, check_sp, Misreport, SpReport, Verdict};
