//! Random-order greedy maximization of monotone submodular functions over
//! partition matroids.
//!
//! The parts of a partition matroid arrive in uniformly random order; on each
//! arrival the algorithm keeps the member with the largest marginal gain with
//! respect to everything kept so far. This crate provides:
//!
//! - exact value oracles (weighted coverage, modular, composed welfare) and a
//!   property checker for the monotone-submodular axioms ([`oracle`]);
//! - the greedy itself with reproducible arrival orders, pluggable tie
//!   breaking and full per-step traces ([`greedy`]), including submodular
//!   welfare maximization via the assignment-matroid reduction
//!   ([`instances::reduce_swm`]);
//! - brute-force optima, exact and Monte Carlo expectations of the greedy
//!   value, the per-step lower-bound curve g(x) = x - x²/2 and the
//!   fixed-point ratio bound ([`exact`]);
//! - the two standard hard instances with expected ratios 7/12 and 19/33,
//!   instance transforms and a JSON file format ([`instances`]);
//! - a byte-deterministic command-line harness ([`cli`]).
//!
//! Determinism is a design rule throughout: every randomized entry point
//! takes an explicit seed, and results never depend on thread count.

pub mod cli;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod ground;
pub mod instances;
pub mod oracle;
pub mod rng;

pub use error::{Result, SglError};
pub use exact::{
    bound_fixed_point, bound_grid_search, brute_force_opt, exact_expected_values, g, g_curve,
    monte_carlo_expected_values, BoundSolution, EnumCaps, ExpectationReport, Mode,
};
pub use greedy::{
    check_potential_monotone, random_order_greedy, swm_greedy, GreedyStep, GreedyTrace,
    PermutationSource, PotentialCheck, SwmTrace, TieBreakPolicy,
};
pub use ground::{make_partition, ElementSet, Ground, Part, PartitionMatroid};
pub use instances::{
    build_instance_19_33, build_instance_7_12, builtin_instance, compose_copies,
    extend_with_dummies, instance_from_json, random_coverage_instance, random_swm_instance,
    read_instance, read_swm_instance, reduce_swm, swm_matching_tie_policy, write_instance,
    Instance, SwmInstance,
};
pub use oracle::{
    verify_properties, PropertyReport, PropertyViolation, SetFunction, TableOracle, ValueOracle,
    VerifyMode,
};

/// Absolute tolerance for value comparisons: two marginal gains within EPS
/// are tied, and checked inequalities get EPS of slack.
pub const EPS: f64 = 1e-9;
