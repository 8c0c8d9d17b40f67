//! Fair allocation of indivisible chores among weighted agents whose cost
//! functions are binary supermodular: every extra chore costs 0 or 1, and
//! marginal costs never decrease as a bundle grows.
//!
//! The solver first computes a maximum-size partial allocation with zero
//! total cost (zero-cost bundles form matroids, so exchange-graph
//! augmentation finds the exact optimum), then hands out the remaining
//! chores greedily under a pluggable gain function. With the built-in gain
//! functions the result is exactly optimal for weighted leximin or for
//! minimum weighted p-th-power cost, and for any gain function the total
//! cost is minimal.
//!
//! [`verify`] contains budget-guarded brute-force oracles used to check the
//! solver and to vet user-supplied gain functions; [`io`] defines the JSON
//! instance/result documents and a seeded instance generator. With the
//! default `parallel` feature the brute-force scans fan out with rayon;
//! sequential reference paths are always available.

pub mod clean;
pub mod io;
pub mod model;
pub mod oracles;
pub mod solver;
pub mod verify;

pub use clean::{augment, compute_min_cost_allocation, decompose, ExchangeGraph, SolverError};
pub use model::{
    lex_compare, sorted_weighted_vector, utility_vector, weighted_utility_vector, Allocation,
    ChoreSet, Decomposition, Instance, ModelError,
};
pub use oracles::{
    is_zero_cost_addable, validate_binary_supermodular, ApprovalCapCost, AxiomViolation,
    CostOracle, ExplicitCost, PartitionCapCost,
};
pub use solver::{
    solve, Criterion, CriterionValue, GainFunction, GainValue, GainVector, PExponent, Solution,
};
pub use verify::{
    brute_force_max_clean_size, brute_force_optimal, check_c1, check_g1, check_g2,
    EnumerationBudget, VerifyError,
};
