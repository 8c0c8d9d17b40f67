//! Problem instances, chore sets, allocations and the exact-arithmetic
//! utility-vector machinery shared by every engine.
//!
//! Chores and agents are dense indices (`0..m`, `0..n`); string labels exist
//! only at the I/O boundary. Weights and weighted utilities are exact
//! rationals so that lexicographic ties are decided exactly.

use num::{BigInt, BigRational, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

use crate::oracles::CostOracle;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance needs at least one agent")]
    NoAgents,
    #[error("agent {agent}: weight must be positive")]
    NonpositiveWeight { agent: usize },
    #[error("agent {agent}: oracle ground set has {got} chores, instance has {expected}")]
    GroundSetMismatch {
        agent: usize,
        expected: usize,
        got: usize,
    },
    #[error("malformed allocation: {0}")]
    MalformedAllocation(String),
}

/// Set of chore indices over a fixed universe of `m` chores, stored as a
/// bitmask. Equality requires equal universes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChoreSet {
    universe: usize,
    blocks: Vec<u64>,
}

impl ChoreSet {
    pub fn empty(universe: usize) -> Self {
        ChoreSet {
            universe,
            blocks: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = ChoreSet::empty(universe);
        for chore in 0..universe {
            set.insert(chore);
        }
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut set = ChoreSet::empty(universe);
        for chore in indices {
            set.insert(chore);
        }
        set
    }

    /// Build from the low `universe` bits of a mask. Universe must be ≤ 32.
    pub fn from_bit_mask(universe: usize, mask: u32) -> Self {
        assert!(universe <= 32, "bit-mask constructor limited to 32 chores");
        assert!(
            universe == 32 || mask < (1u32 << universe),
            "mask has bits outside the universe"
        );
        let mut set = ChoreSet::empty(universe);
        if !set.blocks.is_empty() {
            set.blocks[0] = u64::from(mask);
        }
        set
    }

    /// Inverse of [`from_bit_mask`](Self::from_bit_mask).
    pub fn to_bit_mask(&self) -> u32 {
        assert!(self.universe <= 32, "bit mask limited to 32 chores");
        self.blocks.first().map_or(0, |&b| b as u32)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn contains(&self, chore: usize) -> bool {
        chore < self.universe && self.blocks[chore / 64] & (1 << (chore % 64)) != 0
    }

    pub fn insert(&mut self, chore: usize) {
        assert!(chore < self.universe, "chore {chore} outside universe");
        self.blocks[chore / 64] |= 1 << (chore % 64);
    }

    pub fn remove(&mut self, chore: usize) {
        assert!(chore < self.universe, "chore {chore} outside universe");
        self.blocks[chore / 64] &= !(1 << (chore % 64));
    }

    pub fn with(&self, chore: usize) -> Self {
        let mut set = self.clone();
        set.insert(chore);
        set
    }

    pub fn without(&self, chore: usize) -> Self {
        let mut set = self.clone();
        set.remove(chore);
        set
    }

    /// Clone with `out` removed and `inn` inserted.
    pub fn with_swap(&self, out: usize, inn: usize) -> Self {
        let mut set = self.clone();
        set.remove(out);
        set.insert(inn);
        set
    }

    pub fn intersection_len(&self, other: &ChoreSet) -> usize {
        debug_assert_eq!(self.universe, other.universe);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &ChoreSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn is_subset(&self, other: &ChoreSet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &ChoreSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    /// Ascending chore indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(word, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let low = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(word * 64 + low)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ChoreSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A fair-division instance: `n` weighted agents, each with a cost oracle
/// over a shared set of `m` chores.
pub struct Instance {
    weights: Vec<BigRational>,
    oracles: Vec<Box<dyn CostOracle>>,
    chore_count: usize,
}

impl Instance {
    pub fn new(
        weights: Vec<BigRational>,
        oracles: Vec<Box<dyn CostOracle>>,
    ) -> Result<Self, ModelError> {
        if weights.is_empty() || weights.len() != oracles.len() {
            return Err(ModelError::NoAgents);
        }
        for (agent, weight) in weights.iter().enumerate() {
            if *weight <= BigRational::zero() {
                return Err(ModelError::NonpositiveWeight { agent });
            }
        }
        let chore_count = oracles[0].ground_size();
        for (agent, oracle) in oracles.iter().enumerate() {
            if oracle.ground_size() != chore_count {
                return Err(ModelError::GroundSetMismatch {
                    agent,
                    expected: chore_count,
                    got: oracle.ground_size(),
                });
            }
        }
        Ok(Instance {
            weights,
            oracles,
            chore_count,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.weights.len()
    }

    pub fn chore_count(&self) -> usize {
        self.chore_count
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, agent: usize) -> &BigRational {
        &self.weights[agent]
    }

    pub fn oracle(&self, agent: usize) -> &dyn CostOracle {
        self.oracles[agent].as_ref()
    }

    /// Cost of `bundle` for `agent`.
    pub fn cost(&self, agent: usize, bundle: &ChoreSet) -> u64 {
        self.oracles[agent].cost(bundle)
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("agents", &self.agent_count())
            .field("chores", &self.chore_count)
            .field("weights", &self.weights)
            .finish()
    }
}

/// An (n+1)-partition of the chore set: one bundle per agent plus the pool
/// of unallocated chores. Immutable to callers; engines build new values.
#[derive(Clone, PartialEq, Eq)]
pub struct Allocation {
    pool: ChoreSet,
    bundles: Vec<ChoreSet>,
}

impl Allocation {
    /// Everything unallocated.
    pub fn unassigned(agents: usize, chores: usize) -> Self {
        Allocation {
            pool: ChoreSet::full(chores),
            bundles: vec![ChoreSet::empty(chores); agents],
        }
    }

    /// Validates the exact-partition property.
    pub fn from_bundles(pool: ChoreSet, bundles: Vec<ChoreSet>) -> Result<Self, ModelError> {
        let universe = pool.universe();
        let mut union = pool.clone();
        let mut total = pool.len();
        for bundle in &bundles {
            if bundle.universe() != universe {
                return Err(ModelError::MalformedAllocation(format!(
                    "bundle universe {} does not match pool universe {}",
                    bundle.universe(),
                    universe
                )));
            }
            total += bundle.len();
            union.union_with(bundle);
        }
        if total != universe || union.len() != universe {
            return Err(ModelError::MalformedAllocation(
                "bundles and pool must partition the chore set exactly".into(),
            ));
        }
        Ok(Allocation { pool, bundles })
    }

    /// Builds from a per-chore assignment; `None` leaves the chore pooled.
    pub fn from_assignment(agents: usize, assignment: &[Option<usize>]) -> Result<Self, ModelError> {
        let chores = assignment.len();
        let mut alloc = Allocation::unassigned(agents, chores);
        for (chore, target) in assignment.iter().enumerate() {
            if let Some(agent) = *target {
                if agent >= agents {
                    return Err(ModelError::MalformedAllocation(format!(
                        "chore {chore} assigned to unknown agent {agent}"
                    )));
                }
                alloc.move_from_pool(chore, agent);
            }
        }
        Ok(alloc)
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn chore_count(&self) -> usize {
        self.pool.universe()
    }

    pub fn pool(&self) -> &ChoreSet {
        &self.pool
    }

    pub fn bundle(&self, agent: usize) -> &ChoreSet {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[ChoreSet] {
        &self.bundles
    }

    pub fn is_complete(&self) -> bool {
        self.pool.is_empty()
    }

    /// Number of chores held by agents.
    pub fn allocated_count(&self) -> usize {
        self.chore_count() - self.pool.len()
    }

    /// Agent holding `chore`, if any.
    pub fn holder(&self, chore: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(chore))
    }

    pub(crate) fn move_from_pool(&mut self, chore: usize, agent: usize) {
        assert!(self.pool.contains(chore), "chore {chore} is not pooled");
        self.pool.remove(chore);
        self.bundles[agent].insert(chore);
    }

    pub(crate) fn remove_from_pool(&mut self, chore: usize) {
        assert!(self.pool.contains(chore), "chore {chore} is not pooled");
        self.pool.remove(chore);
    }

    /// Replace `out` by `inn` in `agent`'s bundle; `out` becomes homeless
    /// (the caller is responsible for re-placing it).
    pub(crate) fn swap_in_bundle(&mut self, agent: usize, out: usize, inn: usize) {
        assert!(self.bundles[agent].contains(out));
        self.bundles[agent].remove(out);
        self.bundles[agent].insert(inn);
    }

    pub(crate) fn insert_into_bundle(&mut self, agent: usize, chore: usize) {
        self.bundles[agent].insert(chore);
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Allocation {{ pool: {:?}, bundles: {:?} }}", self.pool, self.bundles)
    }
}

/// Split of an allocation into a zero-cost part and a part whose size equals
/// each agent's total cost. Both halves are full allocations; their pools
/// are the respective complements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub clean: Allocation,
    pub supplementary: Allocation,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("agent {agent}: clean and supplementary bundles overlap")]
    Overlap { agent: usize },
    #[error("agent {agent}: clean and supplementary bundles do not cover the original bundle")]
    Cover { agent: usize },
    #[error("agent {agent}: clean bundle has cost {cost}, expected 0")]
    DirtyClean { agent: usize, cost: u64 },
    #[error("agent {agent}: bundle cost {cost} != supplementary size {supplementary}")]
    CostMismatch {
        agent: usize,
        cost: u64,
        supplementary: usize,
    },
}

impl Decomposition {
    /// Agent-wise union; the pool is whatever nobody holds.
    pub fn union(&self) -> Allocation {
        let chores = self.clean.chore_count();
        let mut pool = ChoreSet::full(chores);
        let mut bundles = Vec::with_capacity(self.clean.agent_count());
        for agent in 0..self.clean.agent_count() {
            let mut bundle = self.clean.bundle(agent).clone();
            bundle.union_with(self.supplementary.bundle(agent));
            for chore in bundle.iter() {
                pool.remove(chore);
            }
            bundles.push(bundle);
        }
        Allocation { pool, bundles }
    }

    /// Checks the decomposition conditions against `original`: per agent the
    /// two halves are disjoint, cover the original bundle, the clean half
    /// costs zero and the bundle cost equals the supplementary size.
    pub fn verify(&self, instance: &Instance, original: &Allocation) -> Result<(), DecompositionError> {
        for agent in 0..instance.agent_count() {
            let clean = self.clean.bundle(agent);
            let supp = self.supplementary.bundle(agent);
            if !clean.is_disjoint(supp) {
                return Err(DecompositionError::Overlap { agent });
            }
            let mut union = clean.clone();
            union.union_with(supp);
            if union != *original.bundle(agent) {
                return Err(DecompositionError::Cover { agent });
            }
            let clean_cost = instance.cost(agent, clean);
            if clean_cost != 0 {
                return Err(DecompositionError::DirtyClean {
                    agent,
                    cost: clean_cost,
                });
            }
            let cost = instance.cost(agent, original.bundle(agent));
            if cost != supp.len() as u64 {
                return Err(DecompositionError::CostMismatch {
                    agent,
                    cost,
                    supplementary: supp.len(),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_shape(instance: &Instance, allocation: &Allocation) -> Result<(), ModelError> {
    if allocation.agent_count() != instance.agent_count()
        || allocation.chore_count() != instance.chore_count()
    {
        return Err(ModelError::MalformedAllocation(format!(
            "allocation shape ({} agents, {} chores) does not match instance ({}, {})",
            allocation.agent_count(),
            allocation.chore_count(),
            instance.agent_count(),
            instance.chore_count()
        )));
    }
    Ok(())
}

/// Per-agent utilities `-c_i(X_i)`.
pub fn utility_vector(instance: &Instance, allocation: &Allocation) -> Result<Vec<i64>, ModelError> {
    check_shape(instance, allocation)?;
    Ok((0..instance.agent_count())
        .map(|agent| -(instance.cost(agent, allocation.bundle(agent)) as i64))
        .collect())
}

/// Per-agent weighted utilities `-c_i(X_i) / w_i` as exact rationals.
pub fn weighted_utility_vector(
    instance: &Instance,
    allocation: &Allocation,
) -> Result<Vec<BigRational>, ModelError> {
    let utilities = utility_vector(instance, allocation)?;
    Ok(weight_utilities(&utilities, instance.weights()))
}

/// Weighted utility vector sorted ascending: the profile compared by the
/// leximin criterion.
pub fn sorted_weighted_vector(
    instance: &Instance,
    allocation: &Allocation,
) -> Result<Vec<BigRational>, ModelError> {
    let mut weighted = weighted_utility_vector(instance, allocation)?;
    weighted.sort();
    Ok(weighted)
}

/// `utilities[i] / weights[i]` entry-wise.
pub fn weight_utilities(utilities: &[i64], weights: &[BigRational]) -> Vec<BigRational> {
    utilities
        .iter()
        .zip(weights)
        .map(|(&u, w)| BigRational::from_integer(BigInt::from(u)) / w)
        .collect()
}

/// Lexicographic comparison of equal-length vectors: the first differing
/// entry decides.
pub fn lex_compare<T: Ord>(x: &[T], y: &[T]) -> Ordering {
    assert_eq!(x.len(), y.len(), "lex_compare requires equal lengths");
    for (a, b) in x.iter().zip(y) {
        match a.cmp(b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
