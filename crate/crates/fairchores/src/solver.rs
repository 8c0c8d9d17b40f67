//! Greedy completion of a maximum zero-cost allocation, driven by gain
//! functions, plus the justice criteria the outputs are optimal for.
//!
//! The solver first grows the largest free partial allocation, then hands
//! out the remaining chores one at a time: every leftover chore costs its
//! recipient exactly one unit, so the only question is who absorbs it. A
//! gain function scores each agent from the current utility vector; the
//! lexicographically largest score wins, ties broken towards the larger
//! agent index. With the right gain function the result is optimal for the
//! matching criterion; with any gain function at all it minimizes total
//! cost.

use num::traits::Pow;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

use crate::clean::{compute_min_cost_allocation, SolverError};
use crate::model::{
    lex_compare, utility_vector, weight_utilities, Allocation, ChoreSet, Decomposition, Instance,
    ModelError,
};

/// Absolute tolerance for comparing floating-point gain values (only
/// non-integer malfare exponents produce them; exact values compare
/// exactly).
pub const GAIN_FLOAT_TOLERANCE: f64 = 1e-12;

/// One entry of a gain vector: exact for rational-valued gain functions,
/// floating only for non-integer malfare exponents.
#[derive(Clone, Debug, PartialEq)]
pub enum GainValue {
    Rational(BigRational),
    Float(f64),
}

impl fmt::Display for GainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainValue::Rational(r) => write!(f, "{r}"),
            GainValue::Float(x) => write!(f, "{x}"),
        }
    }
}

pub type GainVector = Vec<GainValue>;

/// Compares two gain entries. Mixing exact and floating entries is a
/// contract violation.
pub fn compare_gain_values(a: &GainValue, b: &GainValue) -> Ordering {
    match (a, b) {
        (GainValue::Rational(x), GainValue::Rational(y)) => x.cmp(y),
        (GainValue::Float(x), GainValue::Float(y)) => {
            if (x - y).abs() <= GAIN_FLOAT_TOLERANCE {
                Ordering::Equal
            } else {
                x.partial_cmp(y).expect("gain values must not be NaN")
            }
        }
        _ => panic!("gain vectors mix exact and floating entries"),
    }
}

/// Lexicographic comparison of equal-dimension gain vectors.
pub fn compare_gain_vectors(a: &GainVector, b: &GainVector) -> Ordering {
    assert_eq!(a.len(), b.len(), "gain vectors must have equal dimension");
    for (x, y) in a.iter().zip(b) {
        match compare_gain_values(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("malfare exponent must be a finite real >= 1, got {got}")]
pub struct InvalidExponent {
    pub got: f64,
}

/// Malfare exponent. Integer exponents keep all arithmetic exact; anything
/// else falls back to floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Int(u32),
    Real(f64),
}

impl PExponent {
    /// Classifies a real exponent, preferring the exact integer form.
    pub fn new(p: f64) -> Result<Self, InvalidExponent> {
        if !p.is_finite() || p < 1.0 {
            return Err(InvalidExponent { got: p });
        }
        if p.fract() == 0.0 && p <= u32::MAX as f64 {
            Ok(PExponent::Int(p as u32))
        } else {
            Ok(PExponent::Real(p))
        }
    }

    pub fn from_int(p: u32) -> Result<Self, InvalidExponent> {
        if p < 1 {
            return Err(InvalidExponent { got: f64::from(p) });
        }
        Ok(PExponent::Int(p))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PExponent::Int(_))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            PExponent::Int(k) => f64::from(k),
            PExponent::Real(p) => p,
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PExponent::Int(k) => write!(f, "{k}"),
            PExponent::Real(p) => write!(f, "{p}"),
        }
    }
}

/// Per-agent score used to pick who receives the next unit-cost chore.
///
/// Implementations must depend on `utilities` only through
/// `utilities[agent]` and the weights: the solver caches scores and
/// refreshes only the recipient's entry after each hand-out. All vectors
/// returned during one run must share the dimension reported by
/// [`dimension`](Self::dimension).
pub trait GainFunction: Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, utilities: &[i64], weights: &[BigRational], agent: usize) -> GainVector;
}

/// Gain `((u_i - 1) / w_i, w_i)`: prefer the agent whose weighted utility
/// would stay highest after absorbing the chore, then the heavier agent.
/// Pairs with the weighted-leximin criterion.
///
/// Ranking by the post-charge value rather than the current weighted
/// utility matters as soon as weights differ: charging an agent drops its
/// weighted utility by `1 / w_i`, so a light agent sitting at the top can
/// still be the wrong recipient. Both rankings coincide when all weights
/// are equal.
pub struct WeightedLeximinGain;

impl GainFunction for WeightedLeximinGain {
    fn dimension(&self) -> usize {
        2
    }

    fn evaluate(&self, utilities: &[i64], weights: &[BigRational], agent: usize) -> GainVector {
        let landing = BigRational::from_integer(BigInt::from(utilities[agent] - 1));
        vec![
            GainValue::Rational(landing / &weights[agent]),
            GainValue::Rational(weights[agent].clone()),
        ]
    }
}

/// Gain `w_i (c_i^p - (c_i + 1)^p)`: the (negated) increase in weighted
/// p-th-power cost if the agent takes one more chore. Pairs with the
/// min-weighted-malfare criterion.
pub struct MalfareGain {
    exponent: PExponent,
}

impl MalfareGain {
    pub fn new(exponent: PExponent) -> Self {
        MalfareGain { exponent }
    }
}

impl GainFunction for MalfareGain {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, utilities: &[i64], weights: &[BigRational], agent: usize) -> GainVector {
        let cost = u64::try_from(-utilities[agent]).expect("utilities are nonpositive");
        match self.exponent {
            PExponent::Int(p) => {
                let current = BigInt::from(cost).pow(p);
                let next = BigInt::from(cost + 1).pow(p);
                let value = BigRational::from_integer(current - next) * &weights[agent];
                vec![GainValue::Rational(value)]
            }
            PExponent::Real(p) => {
                let weight = weights[agent].to_f64().expect("weight fits in f64");
                let value = weight * ((cost as f64).powf(p) - ((cost + 1) as f64).powf(p));
                vec![GainValue::Float(value)]
            }
        }
    }
}

/// Indifferent gain: every agent scores zero, so chores are handed to the
/// largest index. Total cost is minimized no matter what the gain function
/// says, which makes this the simplest witness for the total-utility
/// criterion.
pub struct ConstantGain;

impl GainFunction for ConstantGain {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, _: &[i64], _: &[BigRational], _: usize) -> GainVector {
        vec![GainValue::Rational(BigRational::zero())]
    }
}

/// Maximum-index argmax under lexicographic gain order.
pub fn select_agent(gains: &[GainVector]) -> usize {
    assert!(!gains.is_empty(), "need at least one agent");
    let mut best = 0;
    for agent in 1..gains.len() {
        if compare_gain_vectors(&gains[agent], &gains[best]) != Ordering::Less {
            best = agent;
        }
    }
    best
}

/// One hand-out of the greedy phase, for replayable result traces.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    /// 1-based greedy iteration.
    pub iteration: usize,
    pub agent: usize,
    pub chore: usize,
    /// The selected agent's gain vector at selection time.
    pub gain: GainVector,
}

/// Complete allocation with its clean/supplementary decomposition and the
/// greedy hand-out trace.
#[derive(Debug)]
pub struct Solution {
    pub allocation: Allocation,
    pub decomposition: Decomposition,
    pub trace: Vec<TraceStep>,
}

/// Runs the full solver: maximum free allocation first, then greedy
/// hand-outs of the pooled chores in ascending index order. Deterministic;
/// the returned decomposition is re-verified against the oracles before
/// returning.
pub fn solve(instance: &Instance, gain: &dyn GainFunction) -> Result<Solution, SolverError> {
    let agents = instance.agent_count();
    let chores = instance.chore_count();
    let clean = compute_min_cost_allocation(instance)?;
    let dimension = gain.dimension();
    let evaluate = |utilities: &[i64], agent: usize| -> Result<GainVector, SolverError> {
        let vector = gain.evaluate(utilities, instance.weights(), agent);
        if vector.len() != dimension {
            return Err(SolverError::GainDimension {
                expected: dimension,
                got: vector.len(),
            });
        }
        Ok(vector)
    };

    let mut utilities = vec![0i64; agents];
    let mut gains = Vec::with_capacity(agents);
    for agent in 0..agents {
        gains.push(evaluate(&utilities, agent)?);
    }

    let mut supplementary_bundles = vec![ChoreSet::empty(chores); agents];
    let mut trace = Vec::new();
    for (index, chore) in clean.pool().iter().enumerate() {
        let agent = select_agent(&gains);
        supplementary_bundles[agent].insert(chore);
        utilities[agent] -= 1;
        trace.push(TraceStep {
            iteration: index + 1,
            agent,
            chore,
            gain: gains[agent].clone(),
        });
        gains[agent] = evaluate(&utilities, agent)?;
    }

    let mut supplementary_pool = ChoreSet::full(chores);
    for bundle in &supplementary_bundles {
        for chore in bundle.iter() {
            supplementary_pool.remove(chore);
        }
    }
    let supplementary = Allocation::from_bundles(supplementary_pool, supplementary_bundles)
        .expect("supplementary bundles partition by construction");
    let decomposition = Decomposition {
        clean,
        supplementary,
    };
    let allocation = decomposition.union();
    debug_assert!(allocation.is_complete());
    decomposition.verify(instance, &allocation)?;
    Ok(Solution {
        allocation,
        decomposition,
        trace,
    })
}

/// Value of an allocation under a justice criterion. `compare` treats
/// `Greater` as better, so malfare values order reversed.
#[derive(Clone, Debug, PartialEq)]
pub enum CriterionValue {
    TotalUtility(i64),
    SortedWeighted(Vec<BigRational>),
    MalfareExact(BigRational),
    MalfareApprox(f64),
}

impl CriterionValue {
    pub fn compare(&self, other: &CriterionValue) -> Ordering {
        match (self, other) {
            (CriterionValue::TotalUtility(a), CriterionValue::TotalUtility(b)) => a.cmp(b),
            (CriterionValue::SortedWeighted(a), CriterionValue::SortedWeighted(b)) => {
                lex_compare(a, b)
            }
            (CriterionValue::MalfareExact(a), CriterionValue::MalfareExact(b)) => {
                a.cmp(b).reverse()
            }
            (CriterionValue::MalfareApprox(a), CriterionValue::MalfareApprox(b)) => a
                .partial_cmp(b)
                .expect("malfare values must not be NaN")
                .reverse(),
            _ => panic!("cannot compare values of different criteria"),
        }
    }

    /// Equality with an absolute tolerance on floating malfare values;
    /// everything else is exact.
    pub fn approx_eq(&self, other: &CriterionValue, tolerance: f64) -> bool {
        match (self, other) {
            (CriterionValue::MalfareApprox(a), CriterionValue::MalfareApprox(b)) => {
                (a - b).abs() <= tolerance
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for CriterionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionValue::TotalUtility(v) => write!(f, "{v}"),
            CriterionValue::SortedWeighted(v) => {
                write!(f, "[")?;
                for (index, entry) in v.iter().enumerate() {
                    if index > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{entry}")?;
                }
                write!(f, "]")
            }
            CriterionValue::MalfareExact(v) => write!(f, "{v}"),
            CriterionValue::MalfareApprox(v) => write!(f, "{v}"),
        }
    }
}

/// Total order over utility vectors used to rank allocations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criterion {
    /// Highest total utility, i.e. lowest total cost.
    Usw,
    /// Lexicographically largest ascending weighted-utility profile.
    WeightedLeximin,
    /// Lowest `Σ w_i c_i^p`.
    Malfare(PExponent),
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Usw => "usw",
            Criterion::WeightedLeximin => "leximin",
            Criterion::Malfare(_) => "malfare",
        }
    }

    /// The gain function whose greedy run optimizes this criterion.
    pub fn gain_function(&self) -> Box<dyn GainFunction> {
        match *self {
            Criterion::Usw => Box::new(ConstantGain),
            Criterion::WeightedLeximin => Box::new(WeightedLeximinGain),
            Criterion::Malfare(p) => Box::new(MalfareGain::new(p)),
        }
    }

    /// Criterion value of a bare utility vector.
    pub fn evaluate_vector(&self, utilities: &[i64], weights: &[BigRational]) -> CriterionValue {
        match *self {
            Criterion::Usw => CriterionValue::TotalUtility(utilities.iter().sum()),
            Criterion::WeightedLeximin => {
                let mut weighted = weight_utilities(utilities, weights);
                weighted.sort();
                CriterionValue::SortedWeighted(weighted)
            }
            Criterion::Malfare(PExponent::Int(p)) => {
                let total = utilities
                    .iter()
                    .zip(weights)
                    .map(|(&u, w)| BigRational::from_integer(BigInt::from(-u).pow(p)) * w)
                    .sum();
                CriterionValue::MalfareExact(total)
            }
            Criterion::Malfare(PExponent::Real(p)) => {
                let total = utilities
                    .iter()
                    .zip(weights)
                    .map(|(&u, w)| {
                        w.to_f64().expect("weight fits in f64") * ((-u) as f64).powf(p)
                    })
                    .sum();
                CriterionValue::MalfareApprox(total)
            }
        }
    }

    pub fn evaluate(
        &self,
        instance: &Instance,
        allocation: &Allocation,
    ) -> Result<CriterionValue, ModelError> {
        let utilities = utility_vector(instance, allocation)?;
        Ok(self.evaluate_vector(&utilities, instance.weights()))
    }

    /// Ranks two utility vectors; `Greater` means the first is better.
    pub fn compare_vectors(
        &self,
        x: &[i64],
        y: &[i64],
        weights: &[BigRational],
    ) -> Ordering {
        self.evaluate_vector(x, weights)
            .compare(&self.evaluate_vector(y, weights))
    }

    /// Ranks two allocations of the same instance.
    pub fn compare_allocations(
        &self,
        instance: &Instance,
        x: &Allocation,
        y: &Allocation,
    ) -> Result<Ordering, ModelError> {
        Ok(self
            .evaluate(instance, x)?
            .compare(&self.evaluate(instance, y)?))
    }

    /// Solves with this criterion's gain function.
    pub fn solve(&self, instance: &Instance) -> Result<Solution, SolverError> {
        solve(instance, self.gain_function().as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{ApprovalCapCost, CostOracle};
    use num::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ones(n: usize) -> Vec<BigRational> {
        vec![BigRational::from_i64(1).unwrap(); n]
    }

    fn approval(universe: usize, approved: &[usize], cap: u64) -> Box<dyn CostOracle> {
        Box::new(ApprovalCapCost::new(
            ChoreSet::from_indices(universe, approved.iter().copied()),
            cap,
        ))
    }

    fn d1(weights: Vec<BigRational>) -> Instance {
        Instance::new(
            weights,
            vec![approval(3, &[0, 1], 1), approval(3, &[1, 2], 1)],
        )
        .unwrap()
    }

    fn gains(values: &[&[i64]]) -> Vec<GainVector> {
        values
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|&v| GainValue::Rational(rat(v, 1)))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn select_agent_breaks_ties_towards_larger_index() {
        assert_eq!(select_agent(&gains(&[&[0, 1], &[0, 1]])), 1);
        assert_eq!(select_agent(&gains(&[&[0, 1], &[0, 2]])), 1);
        assert_eq!(select_agent(&gains(&[&[-1, 1], &[0, 1], &[0, 1]])), 2);
    }

    #[test]
    fn leximin_gain_scores_the_landing_spot() {
        let gain = WeightedLeximinGain;
        assert_eq!(
            gain.evaluate(&[0], &[rat(1, 1)], 0),
            vec![
                GainValue::Rational(rat(-1, 1)),
                GainValue::Rational(rat(1, 1))
            ]
        );
        assert_eq!(
            gain.evaluate(&[0, -1], &[rat(1, 1), rat(2, 1)], 1),
            vec![
                GainValue::Rational(rat(-1, 1)),
                GainValue::Rational(rat(2, 1))
            ]
        );
    }

    #[test]
    fn leximin_gain_accounts_for_the_depth_of_the_drop() {
        // Weights (1/2, 3), utilities (0, -1): the light agent holds the
        // highest weighted utility but would crash to -2; the heavy agent
        // only drops to -2/3 and must win.
        let gain = WeightedLeximinGain;
        let weights = vec![rat(1, 2), rat(3, 1)];
        let scores = vec![
            gain.evaluate(&[0, -1], &weights, 0),
            gain.evaluate(&[0, -1], &weights, 1),
        ];
        assert_eq!(scores[0][0], GainValue::Rational(rat(-2, 1)));
        assert_eq!(scores[1][0], GainValue::Rational(rat(-2, 3)));
        assert_eq!(select_agent(&scores), 1);
    }

    #[test]
    fn leximin_gain_prefers_heavier_agent_on_equal_landing_spots() {
        // (-2 - 1)/3 and (0 - 1)/1 both land at -1; the weight decides.
        let gain = WeightedLeximinGain;
        let weights = vec![rat(3, 1), rat(1, 1)];
        let scores = vec![
            gain.evaluate(&[-2, 0], &weights, 0),
            gain.evaluate(&[-2, 0], &weights, 1),
        ];
        assert_eq!(scores[0][0], scores[1][0]);
        assert_eq!(select_agent(&scores), 0);
    }

    #[test]
    fn malfare_gain_examples() {
        let p1 = MalfareGain::new(PExponent::from_int(1).unwrap());
        assert_eq!(
            p1.evaluate(&[0], &[rat(1, 1)], 0),
            vec![GainValue::Rational(rat(-1, 1))]
        );
        let p2 = MalfareGain::new(PExponent::from_int(2).unwrap());
        assert_eq!(
            p2.evaluate(&[-2], &[rat(1, 1)], 0),
            vec![GainValue::Rational(rat(-5, 1))]
        );
    }

    #[test]
    fn malfare_gains_can_tie_across_distinct_states() {
        let p2 = MalfareGain::new(PExponent::from_int(2).unwrap());
        let weights = vec![rat(3, 1), rat(1, 1)];
        let scores = vec![
            p2.evaluate(&[0, -1], &weights, 0),
            p2.evaluate(&[0, -1], &weights, 1),
        ];
        assert_eq!(scores[0], vec![GainValue::Rational(rat(-3, 1))]);
        assert_eq!(scores[1], vec![GainValue::Rational(rat(-3, 1))]);
        assert_eq!(select_agent(&scores), 1);
    }

    #[test]
    fn exponent_validation() {
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        assert!(PExponent::from_int(0).is_err());
        assert_eq!(PExponent::new(2.0), Ok(PExponent::Int(2)));
        assert_eq!(PExponent::new(1.5), Ok(PExponent::Real(1.5)));
    }

    #[test]
    fn solve_empty_instance_returns_empty_allocation() {
        let inst = Instance::new(ones(2), vec![approval(0, &[], 0), approval(0, &[], 0)]).unwrap();
        let solution = solve(&inst, &WeightedLeximinGain).unwrap();
        assert!(solution.allocation.is_complete());
        assert!(solution.trace.is_empty());
        assert_eq!(utility_vector(&inst, &solution.allocation).unwrap(), vec![0, 0]);
    }

    #[test]
    fn solve_d1_unit_weights_hands_pool_chore_to_second_agent() {
        let inst = d1(ones(2));
        let solution = solve(&inst, &WeightedLeximinGain).unwrap();
        assert_eq!(solution.allocation.bundle(0).to_vec(), vec![0]);
        assert_eq!(solution.allocation.bundle(1).to_vec(), vec![1, 2]);
        assert_eq!(solution.trace.len(), 1);
        assert_eq!(solution.trace[0].agent, 1);
        assert_eq!(solution.trace[0].chore, 2);
        assert_eq!(
            utility_vector(&inst, &solution.allocation).unwrap(),
            vec![0, -1]
        );
    }

    #[test]
    fn solve_d1_weighted_prefers_heavier_agent() {
        let inst = d1(vec![rat(1, 1), rat(2, 1)]);
        let solution = solve(&inst, &WeightedLeximinGain).unwrap();
        assert_eq!(solution.allocation.bundle(1).to_vec(), vec![1, 2]);
        let sorted = crate::model::sorted_weighted_vector(&inst, &solution.allocation).unwrap();
        assert_eq!(sorted, vec![rat(-1, 2), rat(0, 1)]);
    }

    #[test]
    fn solve_is_deterministic() {
        let inst = d1(vec![rat(1, 2), rat(3, 1)]);
        let a = solve(&inst, &WeightedLeximinGain).unwrap();
        let b = solve(&inst, &WeightedLeximinGain).unwrap();
        assert_eq!(a.allocation, b.allocation);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn solve_trace_length_matches_pool_size() {
        let inst = d1(ones(2));
        let solution = solve(&inst, &ConstantGain).unwrap();
        assert_eq!(
            solution.trace.len(),
            3 - solution.decomposition.clean.allocated_count()
        );
        assert!(solution.allocation.is_complete());
    }

    struct WobblyGain;

    impl GainFunction for WobblyGain {
        fn dimension(&self) -> usize {
            2
        }

        fn evaluate(&self, _: &[i64], _: &[BigRational], agent: usize) -> GainVector {
            vec![GainValue::Rational(BigRational::zero()); 1 + agent % 2]
        }
    }

    #[test]
    fn solve_rejects_inconsistent_gain_dimension() {
        let inst = d1(ones(2));
        assert_eq!(
            solve(&inst, &WobblyGain).unwrap_err(),
            SolverError::GainDimension { expected: 2, got: 1 }
        );
    }

    #[test]
    fn gain_functions_are_local() {
        let weights = vec![rat(1, 1), rat(2, 1)];
        for gain in [
            &WeightedLeximinGain as &dyn GainFunction,
            &MalfareGain::new(PExponent::Int(2)),
            &ConstantGain,
        ] {
            let a = gain.evaluate(&[-1, -2], &weights, 1);
            let b = gain.evaluate(&[-4, -2], &weights, 1);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn criterion_compare_examples() {
        let inst = d1(ones(2));
        let x = Allocation::from_assignment(2, &[Some(0), Some(1), Some(1)]).unwrap();
        let y = Allocation::from_assignment(2, &[Some(0), Some(0), Some(0)]).unwrap();
        assert_eq!(
            Criterion::Usw.compare_allocations(&inst, &x, &y).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            Criterion::Usw.compare_allocations(&inst, &x, &x).unwrap(),
            Ordering::Equal
        );

        let weighted = d1(vec![rat(1, 1), rat(2, 1)]);
        let a = Criterion::WeightedLeximin
            .evaluate_vector(&[0, -1], weighted.weights());
        let b = Criterion::WeightedLeximin
            .evaluate_vector(&[-1, 0], weighted.weights());
        assert_eq!(a.compare(&b), Ordering::Greater);
    }

    #[test]
    fn malfare_value_is_exact_for_integer_p() {
        let weights = vec![rat(1, 2), rat(3, 1)];
        let value = Criterion::Malfare(PExponent::Int(2)).evaluate_vector(&[-2, -1], &weights);
        assert_eq!(value, CriterionValue::MalfareExact(rat(5, 1)));
    }

    #[test]
    fn malfare_comparison_prefers_smaller_totals() {
        let a = CriterionValue::MalfareExact(rat(1, 1));
        let b = CriterionValue::MalfareExact(rat(2, 1));
        assert_eq!(a.compare(&b), Ordering::Greater);
    }

    #[test]
    fn non_integer_p_solves_and_uses_float_gains() {
        let inst = d1(ones(2));
        let solution = Criterion::Malfare(PExponent::new(1.5).unwrap())
            .solve(&inst)
            .unwrap();
        assert!(solution.allocation.is_complete());
        assert!(matches!(
            solution.trace[0].gain[0],
            GainValue::Float(_)
        ));
    }
}
