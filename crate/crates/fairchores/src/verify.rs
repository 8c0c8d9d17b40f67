//! Brute-force ground truth for the solver and executable checks for the
//! sufficient conditions a criterion/gain pair must satisfy.
//!
//! Enumeration is exhaustive and budget-guarded. With the `parallel`
//! feature the allocation space is split by the first chore's assignment
//! and the blocks are scanned concurrently; block results merge in block
//! order, so the reported witness is identical to the sequential scan
//! (first optimum in enumeration order). The `_sequential` variants are
//! always available and are the reference path the benchmarks compare
//! against.

use num::{BigInt, BigRational};
use serde::Serialize;
use std::cmp::Ordering;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::model::{Allocation, ChoreSet, Instance};
use crate::solver::{
    compare_gain_vectors, Criterion, CriterionValue, GainFunction, GainValue, GainVector,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("enumeration would visit {required} allocations, budget allows {max}")]
    BudgetExceeded { required: u128, max: u64 },
}

/// Caps on exhaustive work; enumeration refuses to start beyond them.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    /// Bound on the number of enumerated allocations (`n^m` complete ones,
    /// `(n+1)^m` partial ones).
    pub max_allocations: u64,
    /// Bound on subset-table sizes for explicit-oracle checks.
    pub max_subsets: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_allocations: 2_000_000,
            max_subsets: 1 << 20,
        }
    }
}

impl EnumerationBudget {
    pub fn with_max_allocations(max_allocations: u64) -> Self {
        EnumerationBudget {
            max_allocations,
            ..EnumerationBudget::default()
        }
    }
}

fn saturating_pow(base: u128, exponent: usize) -> u128 {
    u32::try_from(exponent)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX)
}

fn check_budget(required: u128, budget: &EnumerationBudget) -> Result<(), VerifyError> {
    if required > u128::from(budget.max_allocations) {
        return Err(VerifyError::BudgetExceeded {
            required,
            max: budget.max_allocations,
        });
    }
    Ok(())
}

/// Outcome of a complete-allocation scan.
#[derive(Debug)]
pub struct BruteForceReport {
    pub value: CriterionValue,
    /// First criterion-maximal allocation in enumeration order.
    pub witness: Allocation,
    pub visited: u64,
}

/// Outcome of a partial-allocation scan for the largest all-free size.
#[derive(Debug, PartialEq, Eq)]
pub struct CleanSizeReport {
    pub size: usize,
    pub visited: u64,
}

struct Block {
    value: CriterionValue,
    digits: Vec<usize>,
    visited: u64,
}

/// Scans every assignment of chores to agents whose first digit is `first`
/// (all of them when `None`), in lexicographic order with chore 0 most
/// significant.
fn scan_complete_block(
    instance: &Instance,
    criterion: &Criterion,
    first: Option<usize>,
) -> Block {
    let agents = instance.agent_count();
    let chores = instance.chore_count();
    let mut digits = vec![0usize; chores];
    let fixed = match first {
        Some(agent) => {
            digits[0] = agent;
            1
        }
        None => 0,
    };
    let mut bundles = vec![ChoreSet::empty(chores); agents];
    for (chore, &agent) in digits.iter().enumerate() {
        bundles[agent].insert(chore);
    }
    let mut best: Option<(CriterionValue, Vec<usize>)> = None;
    let mut visited = 0u64;
    loop {
        visited += 1;
        let utilities: Vec<i64> = (0..agents)
            .map(|agent| -(instance.cost(agent, &bundles[agent]) as i64))
            .collect();
        let value = criterion.evaluate_vector(&utilities, instance.weights());
        let improves = match &best {
            None => true,
            Some((incumbent, _)) => value.compare(incumbent) == Ordering::Greater,
        };
        if improves {
            best = Some((value, digits.clone()));
        }

        let mut position = chores;
        let mut advanced = false;
        while position > fixed {
            position -= 1;
            let old = digits[position];
            bundles[old].remove(position);
            if old + 1 < agents {
                digits[position] = old + 1;
                bundles[old + 1].insert(position);
                advanced = true;
                break;
            }
            digits[position] = 0;
            bundles[0].insert(position);
        }
        if !advanced {
            break;
        }
    }
    let (value, digits) = best.expect("every block visits at least one allocation");
    Block {
        value,
        digits,
        visited,
    }
}

fn report_from_blocks(instance: &Instance, blocks: Vec<Block>) -> BruteForceReport {
    let mut blocks = blocks.into_iter();
    let first = blocks.next().expect("at least one block");
    let mut value = first.value;
    let mut digits = first.digits;
    let mut visited = first.visited;
    for block in blocks {
        visited += block.visited;
        if block.value.compare(&value) == Ordering::Greater {
            value = block.value;
            digits = block.digits;
        }
    }
    let assignment: Vec<Option<usize>> = digits.into_iter().map(Some).collect();
    let witness = Allocation::from_assignment(instance.agent_count(), &assignment)
        .expect("enumerated digits form a complete allocation");
    BruteForceReport {
        value,
        witness,
        visited,
    }
}

/// Exhaustively ranks all `n^m` complete allocations and returns the best
/// value with its first witness. Uses the parallel scan when available.
pub fn brute_force_optimal(
    instance: &Instance,
    criterion: &Criterion,
    budget: &EnumerationBudget,
) -> Result<BruteForceReport, VerifyError> {
    let agents = instance.agent_count();
    let chores = instance.chore_count();
    check_budget(saturating_pow(agents as u128, chores), budget)?;
    #[cfg(feature = "parallel")]
    {
        if chores >= 1 && agents >= 2 {
            let blocks: Vec<Block> = (0..agents)
                .into_par_iter()
                .map(|first| scan_complete_block(instance, criterion, Some(first)))
                .collect();
            return Ok(report_from_blocks(instance, blocks));
        }
    }
    Ok(brute_force_optimal_sequential_unchecked(instance, criterion))
}

/// Single-threaded reference scan, identical output to
/// [`brute_force_optimal`].
pub fn brute_force_optimal_sequential(
    instance: &Instance,
    criterion: &Criterion,
    budget: &EnumerationBudget,
) -> Result<BruteForceReport, VerifyError> {
    check_budget(
        saturating_pow(instance.agent_count() as u128, instance.chore_count()),
        budget,
    )?;
    Ok(brute_force_optimal_sequential_unchecked(instance, criterion))
}

fn brute_force_optimal_sequential_unchecked(
    instance: &Instance,
    criterion: &Criterion,
) -> BruteForceReport {
    let block = scan_complete_block(instance, criterion, None);
    report_from_blocks(instance, vec![block])
}

/// Scans partial allocations (digit 0 pools the chore, digit `a + 1`
/// assigns it to agent `a`) and tracks the largest all-bundles-free size.
fn scan_clean_block(instance: &Instance, first: Option<usize>) -> CleanSizeReport {
    let agents = instance.agent_count();
    let chores = instance.chore_count();
    let options = agents + 1;
    let mut digits = vec![0usize; chores];
    let fixed = match first {
        Some(digit) => {
            digits[0] = digit;
            1
        }
        None => 0,
    };
    let mut bundles = vec![ChoreSet::empty(chores); agents];
    for (chore, &digit) in digits.iter().enumerate() {
        if digit > 0 {
            bundles[digit - 1].insert(chore);
        }
    }
    let mut best = 0usize;
    let mut visited = 0u64;
    loop {
        visited += 1;
        let clean = (0..agents).all(|agent| instance.cost(agent, &bundles[agent]) == 0);
        if clean {
            let size: usize = bundles.iter().map(ChoreSet::len).sum();
            best = best.max(size);
        }

        let mut position = chores;
        let mut advanced = false;
        while position > fixed {
            position -= 1;
            let old = digits[position];
            if old > 0 {
                bundles[old - 1].remove(position);
            }
            if old + 1 < options {
                digits[position] = old + 1;
                bundles[old].insert(position);
                advanced = true;
                break;
            }
            digits[position] = 0;
        }
        if !advanced {
            break;
        }
    }
    CleanSizeReport {
        size: best,
        visited,
    }
}

/// Largest number of chores any all-free partial allocation can place,
/// found by scanning all `(n+1)^m` partial allocations.
pub fn brute_force_max_clean_size(
    instance: &Instance,
    budget: &EnumerationBudget,
) -> Result<CleanSizeReport, VerifyError> {
    let agents = instance.agent_count();
    let chores = instance.chore_count();
    check_budget(saturating_pow(agents as u128 + 1, chores), budget)?;
    #[cfg(feature = "parallel")]
    {
        if chores >= 1 {
            let reports: Vec<CleanSizeReport> = (0..=agents)
                .into_par_iter()
                .map(|first| scan_clean_block(instance, Some(first)))
                .collect();
            return Ok(reports.into_iter().fold(
                CleanSizeReport { size: 0, visited: 0 },
                |acc, report| CleanSizeReport {
                    size: acc.size.max(report.size),
                    visited: acc.visited + report.visited,
                },
            ));
        }
    }
    Ok(scan_clean_block(instance, None))
}

/// Single-threaded reference scan, identical output to
/// [`brute_force_max_clean_size`].
pub fn brute_force_max_clean_size_sequential(
    instance: &Instance,
    budget: &EnumerationBudget,
) -> Result<CleanSizeReport, VerifyError> {
    check_budget(
        saturating_pow(instance.agent_count() as u128 + 1, instance.chore_count()),
        budget,
    )?;
    Ok(scan_clean_block(instance, None))
}

/// Replayable record of a failed condition check.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub condition: &'static str,
    pub weights: Vec<String>,
    pub x: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_i: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_j: Option<Vec<String>>,
    pub detail: String,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violated: {} (x = {:?})", self.condition, self.detail, self.x)
    }
}

fn render_weights(weights: &[BigRational]) -> Vec<String> {
    weights.iter().map(|w| w.to_string()).collect()
}

fn render_gain(gain: &GainVector) -> Vec<String> {
    gain.iter().map(GainValue::to_string).collect()
}

/// Pareto-dominance check: whenever `x` weakly dominates `y` entry-wise the
/// criterion must weakly prefer `x`, strictly unless `x = y`. Pairs without
/// dominance are skipped; returns the number of pairs actually checked.
pub fn check_c1(
    criterion: &Criterion,
    weights: &[BigRational],
    pairs: impl IntoIterator<Item = (Vec<i64>, Vec<i64>)>,
) -> Result<usize, Counterexample> {
    let mut checked = 0;
    for (x, y) in pairs {
        if !x.iter().zip(&y).all(|(a, b)| a >= b) {
            continue;
        }
        checked += 1;
        let comparison = criterion.compare_vectors(&x, &y, weights);
        let expected = if x == y {
            Ordering::Equal
        } else {
            Ordering::Greater
        };
        if comparison != expected {
            return Err(Counterexample {
                condition: "C1",
                weights: render_weights(weights),
                detail: format!(
                    "dominating vector compared {comparison:?}, expected {expected:?} against {y:?}"
                ),
                x,
                y: Some(y),
                agent_i: None,
                agent_j: None,
                gain_i: None,
                gain_j: None,
            });
        }
    }
    Ok(checked)
}

/// Gain-consistency check: ranking agents by gain must rank the vectors
/// obtained by charging one more unit to either agent, with ties exactly
/// when the gains tie.
pub fn check_g1(
    gain: &dyn GainFunction,
    criterion: &Criterion,
    weights: &[BigRational],
    triples: impl IntoIterator<Item = (Vec<i64>, usize, usize)>,
) -> Result<usize, Counterexample> {
    let mut checked = 0;
    for (x, i, j) in triples {
        checked += 1;
        let gain_i = gain.evaluate(&x, weights, i);
        let gain_j = gain.evaluate(&x, weights, j);
        let gain_cmp = compare_gain_vectors(&gain_i, &gain_j);
        let mut y = x.clone();
        y[i] -= 1;
        let mut z = x.clone();
        z[j] -= 1;
        let criterion_cmp = criterion.compare_vectors(&y, &z, weights);
        if gain_cmp != criterion_cmp {
            return Err(Counterexample {
                condition: "G1",
                weights: render_weights(weights),
                detail: format!(
                    "gains compared {gain_cmp:?} but criterion compared {criterion_cmp:?} after charging agents {i} / {j}"
                ),
                x,
                y: None,
                agent_i: Some(i),
                agent_j: Some(j),
                gain_i: Some(render_gain(&gain_i)),
                gain_j: Some(render_gain(&gain_j)),
            });
        }
    }
    Ok(checked)
}

/// Gain-monotonicity check: an agent's gain must not increase as its own
/// utility drops, and must be identical whenever its own utility matches.
/// Triples with `x_i < y_i` are skipped.
pub fn check_g2(
    gain: &dyn GainFunction,
    weights: &[BigRational],
    triples: impl IntoIterator<Item = (Vec<i64>, Vec<i64>, usize)>,
) -> Result<usize, Counterexample> {
    let mut checked = 0;
    for (x, y, i) in triples {
        if x[i] < y[i] {
            continue;
        }
        checked += 1;
        let gain_x = gain.evaluate(&x, weights, i);
        let gain_y = gain.evaluate(&y, weights, i);
        let comparison = compare_gain_vectors(&gain_x, &gain_y);
        let ok = if x[i] == y[i] {
            comparison == Ordering::Equal
        } else {
            comparison != Ordering::Less
        };
        if !ok {
            return Err(Counterexample {
                condition: "G2",
                weights: render_weights(weights),
                detail: format!(
                    "agent {i} gain compared {comparison:?} though its utility moved {} -> {}",
                    y[i], x[i]
                ),
                x,
                y: Some(y),
                agent_i: Some(i),
                agent_j: None,
                gain_i: Some(render_gain(&gain_x)),
                gain_j: Some(render_gain(&gain_y)),
            });
        }
    }
    Ok(checked)
}

/// All vectors in `{lowest..=0}^agents`, in odometer order.
pub fn utility_grid(agents: usize, lowest: i64) -> Vec<Vec<i64>> {
    assert!(lowest <= 0);
    let span = (1 - lowest) as usize;
    let mut grid = Vec::with_capacity(span.pow(agents as u32));
    let mut current = vec![0i64; agents];
    loop {
        grid.push(current.clone());
        let mut position = agents;
        let mut advanced = false;
        while position > 0 {
            position -= 1;
            if current[position] > lowest {
                current[position] -= 1;
                advanced = true;
                break;
            }
            current[position] = 0;
        }
        if !advanced {
            break;
        }
    }
    grid
}

/// All weight vectors over the given candidate values.
pub fn weight_grid(agents: usize, values: &[BigRational]) -> Vec<Vec<BigRational>> {
    let mut grid: Vec<Vec<BigRational>> = vec![Vec::new()];
    for _ in 0..agents {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |value| {
                    let mut next = prefix.clone();
                    next.push(value.clone());
                    next
                })
            })
            .collect();
    }
    grid
}

fn split_mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Arbitrary but deterministic gain function: the score is a hash of the
/// seed, the agent index and the agent's own utility. Exercises the
/// guarantee that the greedy phase minimizes total cost no matter how
/// recipients are chosen.
pub struct RandomGain {
    pub seed: u64,
}

impl GainFunction for RandomGain {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, utilities: &[i64], _: &[BigRational], agent: usize) -> GainVector {
        let mixed = split_mix(
            self.seed ^ split_mix(agent as u64) ^ split_mix(utilities[agent] as u64),
        );
        vec![GainValue::Rational(BigRational::from_integer(BigInt::from(
            mixed % 17,
        )))]
    }
}
