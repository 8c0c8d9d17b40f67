//! Binary supermodular cost oracles.
//!
//! A cost function here satisfies three axioms: (a) the empty bundle is
//! free, (b) every marginal cost is 0 or 1, (c) marginals never decrease as
//! the bundle grows. The dual view `rank(S) = |S| - cost(S)` is then a
//! matroid rank function whose independent sets are the zero-cost bundles;
//! the augmentation engine relies on exactly that structure.

use std::fmt;
use thiserror::Error;

use crate::model::ChoreSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("categories {first} and {second} overlap")]
    OverlappingCategories { first: usize, second: usize },
    #[error("category {category} universe {got} does not match ground set {expected}")]
    CategoryUniverse {
        category: usize,
        expected: usize,
        got: usize,
    },
    #[error("explicit tables support at most 20 chores, got {got}")]
    GroundTooLarge { got: usize },
    #[error("explicit table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
}

/// Cost-function contract. Implementations must be deterministic and are
/// queried concurrently; any internal caching has to be thread-safe.
pub trait CostOracle: Send + Sync {
    /// Number of chores the oracle is defined over.
    fn ground_size(&self) -> usize;

    /// Total cost of a bundle. Must be 0 on the empty set and have
    /// marginals in {0, 1} that never shrink as the bundle grows.
    fn cost(&self, bundle: &ChoreSet) -> u64;

    /// `cost(S + o) - cost(S)`. Requires `o ∉ S`. Returned as a signed
    /// value so that validators can observe out-of-range marginals.
    fn marginal(&self, bundle: &ChoreSet, chore: usize) -> i64 {
        assert!(
            !bundle.contains(chore),
            "marginal requires a chore outside the bundle"
        );
        self.cost(&bundle.with(chore)) as i64 - self.cost(bundle) as i64
    }

    /// Dual rank view `|S| - cost(S)`; for a well-formed oracle this is a
    /// matroid rank function (nonnegative, monotone, submodular).
    fn rank(&self, bundle: &ChoreSet) -> i64 {
        bundle.len() as i64 - self.cost(bundle) as i64
    }
}

/// Whether `bundle + chore` stays free. Requires `cost(bundle) = 0` and
/// `chore ∉ bundle`; this is the independence probe used when growing clean
/// allocations.
pub fn is_zero_cost_addable(oracle: &dyn CostOracle, bundle: &ChoreSet, chore: usize) -> bool {
    debug_assert_eq!(oracle.cost(bundle), 0, "bundle must be zero-cost");
    oracle.marginal(bundle, chore) == 0
}

/// Approved chores are free up to a cap; everything else costs 1 each:
/// `cost(S) = max(0, |S ∩ approved| - cap) + |S \ approved|`.
#[derive(Clone, Debug)]
pub struct ApprovalCapCost {
    approved: ChoreSet,
    cap: u64,
}

impl ApprovalCapCost {
    pub fn new(approved: ChoreSet, cap: u64) -> Self {
        ApprovalCapCost { approved, cap }
    }

    pub fn approved(&self) -> &ChoreSet {
        &self.approved
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

impl CostOracle for ApprovalCapCost {
    fn ground_size(&self) -> usize {
        self.approved.universe()
    }

    fn cost(&self, bundle: &ChoreSet) -> u64 {
        let inside = bundle.intersection_len(&self.approved) as u64;
        let outside = bundle.len() as u64 - inside;
        inside.saturating_sub(self.cap) + outside
    }
}

/// Disjoint categories with per-category caps; chores outside every
/// category always cost 1:
/// `cost(S) = Σ_j max(0, |S ∩ C_j| - k_j) + |S \ ∪C_j|`.
#[derive(Clone, Debug)]
pub struct PartitionCapCost {
    universe: usize,
    categories: Vec<(ChoreSet, u64)>,
}

impl PartitionCapCost {
    pub fn new(universe: usize, categories: Vec<(ChoreSet, u64)>) -> Result<Self, OracleError> {
        for (index, (category, _)) in categories.iter().enumerate() {
            if category.universe() != universe {
                return Err(OracleError::CategoryUniverse {
                    category: index,
                    expected: universe,
                    got: category.universe(),
                });
            }
            for (earlier, (other, _)) in categories.iter().enumerate().take(index) {
                if !category.is_disjoint(other) {
                    return Err(OracleError::OverlappingCategories {
                        first: earlier,
                        second: index,
                    });
                }
            }
        }
        Ok(PartitionCapCost {
            universe,
            categories,
        })
    }

    pub fn categories(&self) -> &[(ChoreSet, u64)] {
        &self.categories
    }
}

impl CostOracle for PartitionCapCost {
    fn ground_size(&self) -> usize {
        self.universe
    }

    fn cost(&self, bundle: &ChoreSet) -> u64 {
        let mut categorized = 0u64;
        let mut over_cap = 0u64;
        for (category, cap) in &self.categories {
            let inside = bundle.intersection_len(category) as u64;
            categorized += inside;
            over_cap += inside.saturating_sub(*cap);
        }
        over_cap + (bundle.len() as u64 - categorized)
    }
}

/// Table of every subset's cost over a small ground set (≤ 20 chores).
/// Entry `i` is the cost of the subset whose bit mask is `i`.
#[derive(Clone)]
pub struct ExplicitCost {
    universe: usize,
    table: Vec<u64>,
}

impl ExplicitCost {
    pub const MAX_GROUND: usize = 20;

    pub fn new(universe: usize, table: Vec<u64>) -> Result<Self, OracleError> {
        if universe > Self::MAX_GROUND {
            return Err(OracleError::GroundTooLarge { got: universe });
        }
        let expected = 1usize << universe;
        if table.len() != expected {
            return Err(OracleError::TableSize {
                expected,
                got: table.len(),
            });
        }
        Ok(ExplicitCost { universe, table })
    }

    /// Tabulates an arbitrary set function.
    pub fn from_fn(
        universe: usize,
        mut cost: impl FnMut(&ChoreSet) -> u64,
    ) -> Result<Self, OracleError> {
        if universe > Self::MAX_GROUND {
            return Err(OracleError::GroundTooLarge { got: universe });
        }
        let table = (0..1u32 << universe)
            .map(|mask| cost(&ChoreSet::from_bit_mask(universe, mask)))
            .collect();
        ExplicitCost::new(universe, table)
    }

    /// Tabulates another oracle over the same ground set.
    pub fn from_oracle(oracle: &dyn CostOracle) -> Result<Self, OracleError> {
        ExplicitCost::from_fn(oracle.ground_size(), |s| oracle.cost(s))
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }
}

impl fmt::Debug for ExplicitCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitCost")
            .field("universe", &self.universe)
            .field("entries", &self.table.len())
            .finish()
    }
}

impl CostOracle for ExplicitCost {
    fn ground_size(&self) -> usize {
        self.universe
    }

    fn cost(&self, bundle: &ChoreSet) -> u64 {
        self.table[bundle.to_bit_mask() as usize]
    }
}

/// First axiom violation found in an explicit table, in a fixed scan order:
/// axiom (a), then every binary-marginal check (b), then every one-step
/// monotonicity check (c). Subsets scan in ascending mask order, chores in
/// ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    /// (a): the empty bundle is not free.
    EmptyCost { cost: u64 },
    /// (b): Δ(set, chore) outside {0, 1}.
    MarginalRange {
        set: ChoreSet,
        chore: usize,
        marginal: i64,
    },
    /// (c): Δ(set, chore) > Δ(set + extra, chore).
    MarginalDecrease {
        set: ChoreSet,
        extra: usize,
        chore: usize,
        lower: i64,
        upper: i64,
    },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::EmptyCost { cost } => {
                write!(f, "axiom (a): cost of the empty bundle is {cost}, expected 0")
            }
            AxiomViolation::MarginalRange { set, chore, marginal } => write!(
                f,
                "axiom (b): marginal of chore {chore} on {set:?} is {marginal}, outside {{0, 1}}"
            ),
            AxiomViolation::MarginalDecrease {
                set,
                extra,
                chore,
                lower,
                upper,
            } => write!(
                f,
                "axiom (c): marginal of chore {chore} drops from {lower} on {set:?} to {upper} after adding {extra}"
            ),
        }
    }
}

/// Exhaustively checks the three axioms on an explicit table. Monotonicity
/// (c) is checked on single-element supersets only; the general case follows
/// by chaining one-step comparisons.
pub fn validate_binary_supermodular(table: &ExplicitCost) -> Result<(), AxiomViolation> {
    let m = table.universe;
    let costs = &table.table;
    if costs[0] != 0 {
        return Err(AxiomViolation::EmptyCost { cost: costs[0] });
    }
    let marginal = |mask: u32, chore: usize| -> i64 {
        costs[(mask | 1 << chore) as usize] as i64 - costs[mask as usize] as i64
    };
    for mask in 0..1u32 << m {
        for chore in 0..m {
            if mask & (1 << chore) != 0 {
                continue;
            }
            let delta = marginal(mask, chore);
            if delta != 0 && delta != 1 {
                return Err(AxiomViolation::MarginalRange {
                    set: ChoreSet::from_bit_mask(m, mask),
                    chore,
                    marginal: delta,
                });
            }
        }
    }
    for mask in 0..1u32 << m {
        for extra in 0..m {
            if mask & (1 << extra) != 0 {
                continue;
            }
            let bigger = mask | 1 << extra;
            for chore in 0..m {
                if bigger & (1 << chore) != 0 {
                    continue;
                }
                let lower = marginal(mask, chore);
                let upper = marginal(bigger, chore);
                if lower > upper {
                    return Err(AxiomViolation::MarginalDecrease {
                        set: ChoreSet::from_bit_mask(m, mask),
                        extra,
                        chore,
                        lower,
                        upper,
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn approval(universe: usize, approved: &[usize], cap: u64) -> ApprovalCapCost {
        ApprovalCapCost::new(ChoreSet::from_indices(universe, approved.iter().copied()), cap)
    }

    #[test]
    fn empty_bundle_is_free_for_all_families() {
        let empty = ChoreSet::empty(3);
        assert_eq!(approval(3, &[0, 1], 1).cost(&empty), 0);
        let partition = PartitionCapCost::new(
            3,
            vec![
                (ChoreSet::from_indices(3, [0, 1]), 1),
                (ChoreSet::from_indices(3, [2]), 0),
            ],
        )
        .unwrap();
        assert_eq!(partition.cost(&empty), 0);
        let table = ExplicitCost::from_oracle(&approval(3, &[0], 1)).unwrap();
        assert_eq!(table.cost(&empty), 0);
    }

    #[test]
    fn approval_cap_cost_counts_overflow_and_outside() {
        let oracle = approval(3, &[0, 1], 1);
        assert_eq!(oracle.cost(&ChoreSet::from_indices(3, [0, 1, 2])), 2);
    }

    #[test]
    fn partition_cap_cost_sums_per_category() {
        let oracle = PartitionCapCost::new(
            3,
            vec![
                (ChoreSet::from_indices(3, [0, 1]), 1),
                (ChoreSet::from_indices(3, [2]), 0),
            ],
        )
        .unwrap();
        assert_eq!(oracle.cost(&ChoreSet::from_indices(3, [1, 2])), 1);
    }

    #[test]
    fn partition_cap_rejects_overlap() {
        let err = PartitionCapCost::new(
            2,
            vec![
                (ChoreSet::from_indices(2, [0]), 0),
                (ChoreSet::from_indices(2, [0, 1]), 1),
            ],
        )
        .unwrap_err();
        assert_eq!(err, OracleError::OverlappingCategories { first: 0, second: 1 });
    }

    #[test]
    fn marginal_examples() {
        let oracle = approval(3, &[0, 1], 1);
        assert_eq!(oracle.marginal(&ChoreSet::empty(3), 0), 0);
        assert_eq!(oracle.marginal(&ChoreSet::from_indices(3, [0]), 1), 1);
        assert_eq!(oracle.marginal(&ChoreSet::from_indices(3, [2]), 0), 0);
    }

    #[test]
    #[should_panic(expected = "outside the bundle")]
    fn marginal_rejects_member_chore() {
        approval(2, &[0], 1).marginal(&ChoreSet::from_indices(2, [0]), 0);
    }

    #[test]
    fn rank_examples() {
        let oracle = approval(3, &[0, 1], 1);
        assert_eq!(oracle.rank(&ChoreSet::empty(3)), 0);
        assert_eq!(oracle.rank(&ChoreSet::from_indices(3, [0, 1])), 1);
        assert_eq!(oracle.rank(&ChoreSet::from_indices(3, [2])), 0);
    }

    #[test]
    fn zero_cost_addable_examples() {
        let oracle = approval(3, &[0, 1], 1);
        assert!(is_zero_cost_addable(&oracle, &ChoreSet::empty(3), 0));
        assert!(!is_zero_cost_addable(
            &oracle,
            &ChoreSet::from_indices(3, [0]),
            1
        ));
        assert!(!is_zero_cost_addable(&oracle, &ChoreSet::empty(3), 2));
    }

    #[test]
    fn validator_accepts_tabulated_approval_cap() {
        let table = ExplicitCost::from_oracle(&approval(2, &[0], 0)).unwrap();
        assert_eq!(validate_binary_supermodular(&table), Ok(()));
    }

    #[test]
    fn validator_rejects_costly_empty_set() {
        let table = ExplicitCost::new(1, vec![1, 1]).unwrap();
        assert_eq!(
            validate_binary_supermodular(&table),
            Err(AxiomViolation::EmptyCost { cost: 1 })
        );
    }

    #[test]
    fn validator_rejects_decreasing_cost_via_marginal_range() {
        // cost({o1}) = 1 but cost({o1,o2}) = 0: Δ({o1}, o2) = -1.
        let table = ExplicitCost::new(2, vec![0, 1, 0, 0]).unwrap();
        assert_eq!(
            validate_binary_supermodular(&table),
            Err(AxiomViolation::MarginalRange {
                set: ChoreSet::from_bit_mask(2, 0b01),
                chore: 1,
                marginal: -1,
            })
        );
    }

    #[test]
    fn validator_rejects_submodular_table() {
        // Strictly submodular: second copy of a chore is cheaper.
        // cost(∅)=0, cost({o1})=1, cost({o2})=1, cost({o1,o2})=1.
        let table = ExplicitCost::new(2, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(
            validate_binary_supermodular(&table),
            Err(AxiomViolation::MarginalDecrease {
                set: ChoreSet::empty(2),
                extra: 0,
                chore: 1,
                lower: 1,
                upper: 0,
            })
        );
    }

    #[test]
    fn explicit_table_size_checked() {
        assert_eq!(
            ExplicitCost::new(2, vec![0, 1]).unwrap_err(),
            OracleError::TableSize { expected: 4, got: 2 }
        );
        assert_eq!(
            ExplicitCost::new(21, vec![]).unwrap_err(),
            OracleError::GroundTooLarge { got: 21 }
        );
    }

    fn random_oracle(rng: &mut StdRng, m: usize) -> Box<dyn CostOracle> {
        if rng.random_bool(0.5) {
            let approved =
                ChoreSet::from_indices(m, (0..m).filter(|_| rng.random_bool(0.5)));
            let cap = rng.random_range(0..=m as u64);
            Box::new(ApprovalCapCost::new(approved, cap))
        } else {
            let mut remaining: Vec<usize> = (0..m).collect();
            let mut categories = Vec::new();
            while !remaining.is_empty() && rng.random_bool(0.8) {
                let take = rng.random_range(1..=remaining.len());
                let chosen: Vec<usize> = remaining.drain(..take).collect();
                let cap = rng.random_range(0..=take as u64);
                categories.push((ChoreSet::from_indices(m, chosen), cap));
            }
            Box::new(PartitionCapCost::new(m, categories).unwrap())
        }
    }

    fn random_subset(rng: &mut StdRng, m: usize, density: f64) -> ChoreSet {
        ChoreSet::from_indices(m, (0..m).filter(|_| rng.random_bool(density)))
    }

    #[test]
    fn families_satisfy_axioms_on_random_probes() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let m = rng.random_range(1..=10);
            let oracle = random_oracle(&mut rng, m);
            for _ in 0..40 {
                let small = random_subset(&mut rng, m, 0.4);
                let mut big = small.clone();
                for c in random_subset(&mut rng, m, 0.4).iter() {
                    big.insert(c);
                }
                let outside: Vec<usize> = (0..m).filter(|&c| !big.contains(c)).collect();
                let Some(&chore) = outside.first() else { continue };
                let lower = oracle.marginal(&small, chore);
                let upper = oracle.marginal(&big, chore);
                assert!(lower == 0 || lower == 1);
                assert!(upper == 0 || upper == 1);
                assert!(lower <= upper);
                assert_eq!(oracle.rank(&small) + oracle.cost(&small) as i64, small.len() as i64);
                assert!(oracle.rank(&small) >= 0);
                assert!(oracle.rank(&big) >= oracle.rank(&small));
            }
        }
    }

    #[test]
    fn zero_cost_family_is_downward_closed() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..200 {
            let m = rng.random_range(1..=10);
            let oracle = random_oracle(&mut rng, m);
            let big = random_subset(&mut rng, m, 0.5);
            if oracle.cost(&big) != 0 {
                continue;
            }
            let small = ChoreSet::from_indices(m, big.iter().filter(|_| rng.random_bool(0.5)));
            assert_eq!(oracle.cost(&small), 0);
        }
    }

    #[test]
    fn zero_cost_sets_satisfy_exchange_property() {
        // On explicit tables: for zero-cost B, B' with |B| < |B'| some chore
        // of B' \ B extends B for free. This is what augmentation relies on.
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..30 {
            let m = rng.random_range(1..=6);
            let oracle = random_oracle(&mut rng, m);
            let table = ExplicitCost::from_oracle(oracle.as_ref()).unwrap();
            validate_binary_supermodular(&table).unwrap();
            let zero_sets: Vec<ChoreSet> = (0..1u32 << m)
                .map(|mask| ChoreSet::from_bit_mask(m, mask))
                .filter(|s| table.cost(s) == 0)
                .collect();
            for small in &zero_sets {
                for big in &zero_sets {
                    if small.len() >= big.len() {
                        continue;
                    }
                    let extendable = big
                        .iter()
                        .filter(|&c| !small.contains(c))
                        .any(|c| table.marginal(small, c) == 0);
                    assert!(extendable, "no exchange chore from {big:?} into {small:?}");
                }
            }
        }
    }
}
