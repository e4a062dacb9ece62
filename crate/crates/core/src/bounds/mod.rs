//! Lower bounds for randomized strategy-proof mechanisms: the analytic
//! curve for the max variant, the gadget constructions, and LP
//! certificates over grid-supported lotteries.

pub mod alpha;
pub mod gadget;
pub mod lp;
pub mod simplex;

pub use alpha::{alpha_curve, alpha_curve_rational, max_variant_constant, maximize_alpha, optimal_epsilon, EpsilonOutOfRange};
pub use gadget::{default_max_epsilon, max_variant_gadget, sum_variant_gadget, DeviationEdge, Gadget, GadgetError};
pub use lp::{gadget_lp, lp_lower_bound, max_variant_tail_check, BoundCertificate, BoundError, SolveMode, TailCheck};
pub use simplex::{LinearProgram, LpError, LpScalar, LpSolution, Relation};

/// Analytic lower bound of the sum-variant gadget.
pub const SUM_VARIANT_CONSTANT: (i64, i64) = (17, 16);
