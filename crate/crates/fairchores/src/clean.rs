//! Maximum-size zero-cost partial allocations via exchange-graph
//! augmentation, and the clean/supplementary decomposition of arbitrary
//! allocations.
//!
//! Zero-cost bundles are the independent sets of each agent's dual rank
//! matroid, so growing the largest zero-cost partial allocation is matroid
//! partitioning: repeatedly search a digraph over chores for a shortest
//! path from an unallocated chore to an agent that can absorb one more
//! chore for free, and apply the one-chore transfers along the path.
//!
//! Everything here is deterministic: unallocated chores are attempted in
//! ascending index order, the search is breadth-first with neighbours
//! scanned in ascending index order, and direct-add sinks are probed in
//! ascending agent order. A chore with no augmenting path stays in the pool
//! and is not retried; against a maximum structure it can never become
//! allocatable later.

use std::collections::VecDeque;
use thiserror::Error;

use crate::model::{
    Allocation, ChoreSet, Decomposition, DecompositionError, Instance, ModelError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("agent {agent}: oracle reported marginal {marginal} for chore {chore}, outside {{0, 1}}")]
    OracleContract {
        agent: usize,
        chore: usize,
        marginal: i64,
    },
    #[error("agent {agent}: bundle expected to be zero-cost, oracle reports cost {cost}")]
    DirtyBundle { agent: usize, cost: u64 },
    #[error("gain function returned a vector of dimension {got}, expected {expected}")]
    GainDimension { expected: usize, got: usize },
    #[error("post-run decomposition check failed: {0}")]
    Invariant(#[from] DecompositionError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lazy view of the exchange digraph induced by a clean allocation. Nodes
/// are chores plus one virtual sink per agent; arcs are recomputed from the
/// cost oracles on every probe, so each arc is its own witness.
pub struct ExchangeGraph<'a> {
    instance: &'a Instance,
    allocation: &'a Allocation,
    holder: Vec<Option<usize>>,
}

/// Shortest augmenting path: `chores[0]` is the unallocated source, each
/// later chore is displaced into the next bundle along the path, and the
/// final chore is added to `sink_agent` outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentingPath {
    pub chores: Vec<usize>,
    pub sink_agent: usize,
}

impl<'a> ExchangeGraph<'a> {
    pub fn new(instance: &'a Instance, allocation: &'a Allocation) -> Self {
        let mut holder = vec![None; instance.chore_count()];
        for agent in 0..allocation.agent_count() {
            for chore in allocation.bundle(agent).iter() {
                holder[chore] = Some(agent);
            }
        }
        ExchangeGraph {
            instance,
            allocation,
            holder,
        }
    }

    /// Arc `from -> to`: `to` is held by some agent whose bundle stays free
    /// after trading `to` for `from`. `from` must not already be in that
    /// bundle.
    pub fn swap_arc(&self, from: usize, to: usize) -> bool {
        let Some(agent) = self.holder[to] else {
            return false;
        };
        if from == to || self.holder[from] == Some(agent) {
            return false;
        }
        let traded = self.allocation.bundle(agent).with_swap(to, from);
        self.instance.cost(agent, &traded) == 0
    }

    /// Arc `from -> sink(agent)`: the agent's bundle absorbs `from` at zero
    /// marginal cost. Reports an oracle-contract violation when the
    /// marginal falls outside {0, 1}.
    pub fn sink_arc(&self, from: usize, agent: usize) -> Result<bool, SolverError> {
        if self.holder[from] == Some(agent) {
            return Ok(false);
        }
        let marginal = self
            .instance
            .oracle(agent)
            .marginal(self.allocation.bundle(agent), from);
        if marginal != 0 && marginal != 1 {
            return Err(SolverError::OracleContract {
                agent,
                chore: from,
                marginal,
            });
        }
        Ok(marginal == 0)
    }

    /// Breadth-first search for a shortest path from `source` to any sink.
    /// Within a dequeued node, sinks are probed in ascending agent order
    /// (the first hit terminates the search), then chore neighbours are
    /// discovered in ascending index order.
    pub fn shortest_path(&self, source: usize) -> Result<Option<AugmentingPath>, SolverError> {
        let chores = self.instance.chore_count();
        let agents = self.instance.agent_count();
        let mut parent: Vec<usize> = vec![usize::MAX; chores];
        let mut visited = vec![false; chores];
        visited[source] = true;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(node) = queue.pop_front() {
            for agent in 0..agents {
                if self.sink_arc(node, agent)? {
                    let mut path = vec![node];
                    let mut cursor = node;
                    while cursor != source {
                        cursor = parent[cursor];
                        path.push(cursor);
                    }
                    path.reverse();
                    return Ok(Some(AugmentingPath {
                        chores: path,
                        sink_agent: agent,
                    }));
                }
            }
            for next in 0..chores {
                if !visited[next] && self.swap_arc(node, next) {
                    visited[next] = true;
                    parent[next] = node;
                    queue.push_back(next);
                }
            }
        }
        Ok(None)
    }
}

/// Applies the transfers of `path` to `allocation` and re-checks that every
/// touched bundle is still free.
fn apply_path(
    instance: &Instance,
    allocation: &mut Allocation,
    path: &AugmentingPath,
) -> Result<(), SolverError> {
    let chores = &path.chores;
    let displaced_into: Vec<usize> = chores[1..]
        .iter()
        .map(|&c| {
            allocation
                .holder(c)
                .expect("interior path chores are always held")
        })
        .collect();
    allocation.remove_from_pool(chores[0]);
    for (step, &agent) in displaced_into.iter().enumerate() {
        allocation.swap_in_bundle(agent, chores[step + 1], chores[step]);
    }
    allocation.insert_into_bundle(path.sink_agent, *chores.last().expect("path is nonempty"));
    for agent in displaced_into
        .iter()
        .copied()
        .chain(std::iter::once(path.sink_agent))
    {
        let cost = instance.cost(agent, allocation.bundle(agent));
        if cost != 0 {
            return Err(SolverError::DirtyBundle { agent, cost });
        }
    }
    Ok(())
}

/// Largest zero-total-cost partial allocation, grown one chore at a time.
/// Deterministic for a fixed instance; the pool of the result holds exactly
/// the chores with no augmenting path.
pub fn compute_min_cost_allocation(instance: &Instance) -> Result<Allocation, SolverError> {
    let mut allocation =
        Allocation::unassigned(instance.agent_count(), instance.chore_count());
    for source in 0..instance.chore_count() {
        let path = ExchangeGraph::new(instance, &allocation).shortest_path(source)?;
        if let Some(path) = path {
            apply_path(instance, &mut allocation, &path)?;
        }
    }
    Ok(allocation)
}

/// One augmentation step: tries to allocate the pooled `chore`, preserving
/// cleanness. Returns the grown allocation, or `None` when no augmenting
/// path exists. Panics if `chore` is not pooled or the state is not clean.
pub fn augment(
    instance: &Instance,
    clean: &Allocation,
    chore: usize,
) -> Result<Option<Allocation>, SolverError> {
    assert!(clean.pool().contains(chore), "chore {chore} is not pooled");
    for agent in 0..instance.agent_count() {
        assert_eq!(
            instance.cost(agent, clean.bundle(agent)),
            0,
            "augment requires a clean allocation (agent {agent})"
        );
    }
    match ExchangeGraph::new(instance, clean).shortest_path(chore)? {
        Some(path) => {
            let mut next = clean.clone();
            apply_path(instance, &mut next, &path)?;
            Ok(Some(next))
        }
        None => Ok(None),
    }
}

/// Splits each bundle into a maximal zero-cost part (grown greedily in
/// ascending chore order) and the rest. Greedy maximal is maximum here
/// because zero-cost subsets form a matroid's independent sets.
pub fn decompose(instance: &Instance, allocation: &Allocation) -> Result<Decomposition, ModelError> {
    crate::model::check_shape(instance, allocation)?;
    let chores = instance.chore_count();
    let mut clean_bundles = Vec::with_capacity(instance.agent_count());
    let mut supp_bundles = Vec::with_capacity(instance.agent_count());
    for agent in 0..instance.agent_count() {
        let mut clean = ChoreSet::empty(chores);
        let mut supp = ChoreSet::empty(chores);
        for chore in allocation.bundle(agent).iter() {
            if instance.oracle(agent).marginal(&clean, chore) == 0 {
                clean.insert(chore);
            } else {
                supp.insert(chore);
            }
        }
        clean_bundles.push(clean);
        supp_bundles.push(supp);
    }
    let complement = |bundles: &[ChoreSet]| {
        let mut pool = ChoreSet::full(chores);
        for bundle in bundles {
            for chore in bundle.iter() {
                pool.remove(chore);
            }
        }
        pool
    };
    let clean = Allocation::from_bundles(complement(&clean_bundles), clean_bundles)
        .expect("clean bundles partition by construction");
    let supplementary = Allocation::from_bundles(complement(&supp_bundles), supp_bundles)
        .expect("supplementary bundles partition by construction");
    Ok(Decomposition {
        clean,
        supplementary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{ApprovalCapCost, CostOracle};
    use num::{BigRational, FromPrimitive};

    fn ones(n: usize) -> Vec<BigRational> {
        vec![BigRational::from_i64(1).unwrap(); n]
    }

    fn approval(universe: usize, approved: &[usize], cap: u64) -> Box<dyn CostOracle> {
        Box::new(ApprovalCapCost::new(
            ChoreSet::from_indices(universe, approved.iter().copied()),
            cap,
        ))
    }

    fn d1() -> Instance {
        Instance::new(
            ones(2),
            vec![approval(3, &[0, 1], 1), approval(3, &[1, 2], 1)],
        )
        .unwrap()
    }

    #[test]
    fn zero_caps_leave_everything_pooled() {
        let inst = Instance::new(ones(2), vec![approval(2, &[], 0), approval(2, &[], 0)]).unwrap();
        let clean = compute_min_cost_allocation(&inst).unwrap();
        assert_eq!(clean.allocated_count(), 0);
        assert_eq!(clean.pool().to_vec(), vec![0, 1]);
    }

    #[test]
    fn d1_clean_allocation_is_deterministic() {
        let clean = compute_min_cost_allocation(&d1()).unwrap();
        assert_eq!(clean.allocated_count(), 2);
        assert_eq!(clean.pool().to_vec(), vec![2]);
        assert_eq!(clean.bundle(0).to_vec(), vec![0]);
        assert_eq!(clean.bundle(1).to_vec(), vec![1]);
    }

    #[test]
    fn single_agent_with_generous_cap_takes_everything() {
        let inst = Instance::new(ones(1), vec![approval(2, &[0, 1], 2)]).unwrap();
        let clean = compute_min_cost_allocation(&inst).unwrap();
        assert!(clean.pool().is_empty());
        assert_eq!(clean.bundle(0).to_vec(), vec![0, 1]);
    }

    #[test]
    fn augment_uses_direct_add_when_available() {
        let inst = d1();
        let empty = Allocation::unassigned(2, 3);
        let grown = augment(&inst, &empty, 0).unwrap().unwrap();
        assert_eq!(grown.bundle(0).to_vec(), vec![0]);
        assert_eq!(grown.allocated_count(), 1);
    }

    #[test]
    fn augment_reports_no_path_when_caps_are_saturated() {
        let inst = d1();
        let mut state = Allocation::unassigned(2, 3);
        state = augment(&inst, &state, 0).unwrap().unwrap();
        state = augment(&inst, &state, 1).unwrap().unwrap();
        assert_eq!(augment(&inst, &state, 2).unwrap(), None);
    }

    #[test]
    fn augment_chains_through_a_swap() {
        // Agent 0 approves both chores (cap 1) and holds o2; agent 1
        // approves only o2 (cap 1). Allocating o1 forces the swap.
        let inst = Instance::new(
            ones(2),
            vec![approval(2, &[0, 1], 1), approval(2, &[1], 1)],
        )
        .unwrap();
        let state = Allocation::from_assignment(2, &[None, Some(0)]).unwrap();
        let grown = augment(&inst, &state, 0).unwrap().unwrap();
        assert_eq!(grown.bundle(0).to_vec(), vec![0]);
        assert_eq!(grown.bundle(1).to_vec(), vec![1]);
        assert!(grown.pool().is_empty());
    }

    #[test]
    #[should_panic(expected = "not pooled")]
    fn augment_rejects_allocated_chore() {
        let inst = d1();
        let state = Allocation::from_assignment(2, &[Some(0), None, None]).unwrap();
        let _ = augment(&inst, &state, 0);
    }

    #[test]
    fn augmentation_preserves_cleanness_and_grows_by_one() {
        let inst = d1();
        let mut state = Allocation::unassigned(2, 3);
        let mut size = 0;
        for chore in 0..3 {
            if let Some(next) = augment(&inst, &state, chore).unwrap() {
                size += 1;
                assert_eq!(next.allocated_count(), size);
                for agent in 0..2 {
                    assert_eq!(inst.cost(agent, next.bundle(agent)), 0);
                }
                state = next;
            }
        }
        assert_eq!(size, 2);
    }

    #[test]
    fn finished_state_admits_no_further_augmentation() {
        let inst = d1();
        let clean = compute_min_cost_allocation(&inst).unwrap();
        for chore in clean.pool().to_vec() {
            assert_eq!(augment(&inst, &clean, chore).unwrap(), None);
        }
    }

    #[test]
    fn decompose_keeps_clean_allocations_intact() {
        let inst = d1();
        let clean = compute_min_cost_allocation(&inst).unwrap();
        let decomposition = decompose(&inst, &clean).unwrap();
        assert_eq!(decomposition.clean, clean);
        assert!(decomposition.supplementary.allocated_count() == 0);
        decomposition.verify(&inst, &clean).unwrap();
    }

    #[test]
    fn decompose_splits_greedily_in_index_order() {
        let inst = d1();
        let all_to_first = Allocation::from_assignment(2, &[Some(0), Some(0), Some(0)]).unwrap();
        let decomposition = decompose(&inst, &all_to_first).unwrap();
        assert_eq!(decomposition.clean.bundle(0).to_vec(), vec![0]);
        assert_eq!(decomposition.supplementary.bundle(0).to_vec(), vec![1, 2]);
        assert_eq!(inst.cost(0, all_to_first.bundle(0)), 2);
        decomposition.verify(&inst, &all_to_first).unwrap();
    }

    #[test]
    fn decompose_with_zero_cap_puts_everything_in_supplementary() {
        let inst = Instance::new(ones(1), vec![approval(2, &[], 0)]).unwrap();
        let all = Allocation::from_assignment(1, &[Some(0), Some(0)]).unwrap();
        let decomposition = decompose(&inst, &all).unwrap();
        assert!(decomposition.clean.bundle(0).is_empty());
        assert_eq!(decomposition.supplementary.bundle(0).to_vec(), vec![0, 1]);
    }

    struct BrokenOracle {
        universe: usize,
    }

    impl CostOracle for BrokenOracle {
        fn ground_size(&self) -> usize {
            self.universe
        }

        fn cost(&self, bundle: &ChoreSet) -> u64 {
            // Jumps by 2 on the second chore: marginal outside {0, 1}.
            match bundle.len() {
                0 | 1 => 0,
                k => 2 * k as u64,
            }
        }
    }

    #[test]
    fn broken_oracle_is_reported_with_the_agent() {
        let inst = Instance::new(ones(1), vec![Box::new(BrokenOracle { universe: 2 })]).unwrap();
        let err = compute_min_cost_allocation(&inst).unwrap_err();
        assert_eq!(
            err,
            SolverError::OracleContract {
                agent: 0,
                chore: 1,
                marginal: 4,
            }
        );
    }
}
