//! JSON documents for instances and results, plus a seeded random instance
//! generator.
//!
//! Weights and weighted utilities serialize as exact rational strings
//! (`"num/den"`, or a bare integer where the denominator is 1) so documents
//! never pick up floating-point drift. Explicit cost tables key subsets by
//! the sorted comma-joined chore labels, with `""` for the empty set.

use num::{BigInt, BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::model::{Allocation, ChoreSet, Decomposition, Instance, ModelError};
use crate::oracles::{
    validate_binary_supermodular, ApprovalCapCost, AxiomViolation, CostOracle, ExplicitCost,
    OracleError, PartitionCapCost,
};
use crate::solver::{Criterion, CriterionValue, GainValue, Solution};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported document version {got}, expected {DOCUMENT_VERSION}")]
    Version { got: u32 },
    #[error("chore label {label:?} is invalid: {reason}")]
    BadLabel { label: String, reason: &'static str },
    #[error("duplicate chore label {label:?}")]
    DuplicateLabel { label: String },
    #[error("agent {agent}: weight must be positive, got {weight}")]
    NonpositiveWeight { agent: usize, weight: String },
    #[error("agent {agent}: unknown chore label {label:?} in {field}")]
    UnknownLabel {
        agent: usize,
        field: &'static str,
        label: String,
    },
    #[error("agent {agent}: explicit cost key {key:?} is not a sorted comma-joined label list")]
    NonCanonicalKey { agent: usize, key: String },
    #[error("agent {agent}: explicit table has {got} subsets, expected {expected}")]
    TableIncomplete {
        agent: usize,
        expected: usize,
        got: usize,
    },
    #[error("agent {agent}: explicit tables support at most 20 chores, instance has {chores}")]
    TableTooLarge { agent: usize, chores: usize },
    #[error("agent {agent}: cost table is not binary supermodular: {violation}")]
    NotSupermodular {
        agent: usize,
        violation: AxiomViolation,
    },
    #[error("agent {agent}: {source}")]
    Oracle {
        agent: usize,
        source: OracleError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("generator: {0}")]
    Gen(String),
    #[error("result document invalid: {0}")]
    BadResult(String),
}

/// Exact positive rational carried through documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weight(pub BigRational);

/// Parses `"num"` or `"num/den"` with a nonzero denominator.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let mut parts = text.splitn(2, '/');
    let numer = BigInt::from_str(parts.next()?.trim()).ok()?;
    let denom = match parts.next() {
        Some(d) => BigInt::from_str(d.trim()).ok()?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return None;
    }
    Some(BigRational::new(numer, denom))
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.denom().is_one() {
            if let Ok(int) = i64::try_from(self.0.numer().clone()) {
                return serializer.serialize_i64(int);
            }
        }
        serializer.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct WeightVisitor;

        impl Visitor<'_> for WeightVisitor {
            type Value = Weight;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an integer or a rational string like \"1/2\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Weight, E> {
                Ok(Weight(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Weight, E> {
                Ok(Weight(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Weight, E> {
                parse_rational(v)
                    .map(Weight)
                    .ok_or_else(|| E::custom(format!("invalid rational {v:?}")))
            }
        }

        deserializer.deserialize_any(WeightVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub chores: Vec<String>,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostSpec {
    ApprovalCap { approved: Vec<String>, cap: u64 },
    PartitionCap { categories: Vec<CategorySpec> },
    Explicit { costs: BTreeMap<String, u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub weight: Weight,
    pub cost: CostSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub version: u32,
    pub chores: Vec<String>,
    pub agents: Vec<AgentSpec>,
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let document: InstanceDocument = serde_json::from_str(text)?;
        if document.version != DOCUMENT_VERSION {
            return Err(IoError::Version {
                got: document.version,
            });
        }
        Ok(document)
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents serialize");
        text.push('\n');
        text
    }

    /// Validates the document and builds the solver-facing instance.
    /// Explicit tables are axiom-checked on load.
    pub fn build_instance(&self) -> Result<Instance, IoError> {
        let labels = LabelTable::new(&self.chores)?;
        let chores = self.chores.len();
        let mut weights = Vec::with_capacity(self.agents.len());
        let mut oracles: Vec<Box<dyn CostOracle>> = Vec::with_capacity(self.agents.len());
        for (agent, spec) in self.agents.iter().enumerate() {
            if spec.weight.0 <= BigRational::zero() {
                return Err(IoError::NonpositiveWeight {
                    agent,
                    weight: spec.weight.0.to_string(),
                });
            }
            weights.push(spec.weight.0.clone());
            oracles.push(build_oracle(agent, chores, &labels, &spec.cost)?);
        }
        Ok(Instance::new(weights, oracles)?)
    }
}

struct LabelTable<'a> {
    labels: &'a [String],
    index: BTreeMap<&'a str, usize>,
}

impl<'a> LabelTable<'a> {
    fn new(labels: &'a [String]) -> Result<Self, IoError> {
        let mut index = BTreeMap::new();
        for (position, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(IoError::BadLabel {
                    label: label.clone(),
                    reason: "labels must be nonempty",
                });
            }
            if label.contains(',') {
                return Err(IoError::BadLabel {
                    label: label.clone(),
                    reason: "labels must not contain commas",
                });
            }
            if index.insert(label.as_str(), position).is_some() {
                return Err(IoError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(LabelTable { labels, index })
    }

    fn resolve(
        &self,
        agent: usize,
        field: &'static str,
        label: &str,
    ) -> Result<usize, IoError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| IoError::UnknownLabel {
                agent,
                field,
                label: label.to_owned(),
            })
    }

    fn set(
        &self,
        agent: usize,
        field: &'static str,
        labels: &[String],
    ) -> Result<ChoreSet, IoError> {
        let mut set = ChoreSet::empty(self.labels.len());
        for label in labels {
            set.insert(self.resolve(agent, field, label)?);
        }
        Ok(set)
    }
}

/// Canonical explicit-table key for a subset: member labels sorted
/// lexicographically and joined by commas; the empty set keys as `""`.
pub fn subset_key(labels: &[String], subset: &ChoreSet) -> String {
    let mut members: Vec<&str> = subset.iter().map(|chore| labels[chore].as_str()).collect();
    members.sort_unstable();
    members.join(",")
}

fn build_oracle(
    agent: usize,
    chores: usize,
    labels: &LabelTable<'_>,
    spec: &CostSpec,
) -> Result<Box<dyn CostOracle>, IoError> {
    match spec {
        CostSpec::ApprovalCap { approved, cap } => {
            let approved = labels.set(agent, "approved", approved)?;
            Ok(Box::new(ApprovalCapCost::new(approved, *cap)))
        }
        CostSpec::PartitionCap { categories } => {
            let mut sets = Vec::with_capacity(categories.len());
            for category in categories {
                sets.push((labels.set(agent, "categories", &category.chores)?, category.cap));
            }
            let oracle = PartitionCapCost::new(chores, sets)
                .map_err(|source| IoError::Oracle { agent, source })?;
            Ok(Box::new(oracle))
        }
        CostSpec::Explicit { costs } => {
            if chores > ExplicitCost::MAX_GROUND {
                return Err(IoError::TableTooLarge { agent, chores });
            }
            let expected = 1usize << chores;
            let mut table = vec![None; expected];
            for (key, &cost) in costs {
                let members: Vec<String> = if key.is_empty() {
                    Vec::new()
                } else {
                    key.split(',').map(str::to_owned).collect()
                };
                let subset = labels.set(agent, "costs", &members)?;
                if subset_key(labels.labels, &subset) != *key || subset.len() != members.len() {
                    return Err(IoError::NonCanonicalKey {
                        agent,
                        key: key.clone(),
                    });
                }
                table[subset.to_bit_mask() as usize] = Some(cost);
            }
            let got = table.iter().flatten().count();
            if got != expected {
                return Err(IoError::TableIncomplete {
                    agent,
                    expected,
                    got,
                });
            }
            let table: Vec<u64> = table.into_iter().map(Option::unwrap).collect();
            let oracle = ExplicitCost::new(chores, table)
                .map_err(|source| IoError::Oracle { agent, source })?;
            validate_binary_supermodular(&oracle)
                .map_err(|violation| IoError::NotSupermodular { agent, violation })?;
            Ok(Box::new(oracle))
        }
    }
}

/// Parses and fully validates an instance document.
pub fn parse_instance(text: &str) -> Result<(InstanceDocument, Instance), IoError> {
    let document = InstanceDocument::from_json(text)?;
    let instance = document.build_instance()?;
    Ok((document, instance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAllocation {
    /// 1-based agent number, matching the order of the instance document.
    pub agent: usize,
    pub chores: Vec<String>,
    pub clean: Vec<String>,
    pub supplementary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub agent: usize,
    pub chore: String,
    pub gain: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: u32,
    pub criterion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    pub allocation: Vec<AgentAllocation>,
    pub utilities: Vec<i64>,
    pub weighted_utilities: Vec<String>,
    pub criterion_value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl ResultDocument {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let document: ResultDocument = serde_json::from_str(text)?;
        if document.version != DOCUMENT_VERSION {
            return Err(IoError::Version {
                got: document.version,
            });
        }
        Ok(document)
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents serialize");
        text.push('\n');
        text
    }
}

fn gain_value_to_json(value: &GainValue) -> Value {
    match value {
        GainValue::Rational(r) => Value::String(r.to_string()),
        GainValue::Float(x) => serde_json::json!(x),
    }
}

/// JSON form of a criterion value: exact values render as rational strings,
/// profiles as arrays, floating malfare as a number.
pub fn criterion_value_to_json(value: &CriterionValue) -> Value {
    match value {
        CriterionValue::TotalUtility(v) => serde_json::json!(v),
        CriterionValue::SortedWeighted(profile) => Value::Array(
            profile
                .iter()
                .map(|entry| Value::String(entry.to_string()))
                .collect(),
        ),
        CriterionValue::MalfareExact(v) => Value::String(v.to_string()),
        CriterionValue::MalfareApprox(v) => serde_json::json!(v),
    }
}

fn labels_of(labels: &[String], set: &ChoreSet) -> Vec<String> {
    set.iter().map(|chore| labels[chore].clone()).collect()
}

/// Renders a solved instance as a result document.
pub fn result_document(
    instance: &Instance,
    document: &InstanceDocument,
    solution: &Solution,
    criterion: &Criterion,
    include_trace: bool,
) -> Result<ResultDocument, IoError> {
    let utilities = crate::model::utility_vector(instance, &solution.allocation)?;
    let weighted = crate::model::weighted_utility_vector(instance, &solution.allocation)?;
    let value = criterion.evaluate(instance, &solution.allocation)?;
    let labels = &document.chores;
    let allocation = (0..instance.agent_count())
        .map(|agent| AgentAllocation {
            agent: agent + 1,
            chores: labels_of(labels, solution.allocation.bundle(agent)),
            clean: labels_of(labels, solution.decomposition.clean.bundle(agent)),
            supplementary: labels_of(labels, solution.decomposition.supplementary.bundle(agent)),
        })
        .collect();
    let trace = include_trace.then(|| {
        solution
            .trace
            .iter()
            .map(|step| TraceRecord {
                iteration: step.iteration,
                agent: step.agent + 1,
                chore: labels[step.chore].clone(),
                gain: step.gain.iter().map(gain_value_to_json).collect(),
            })
            .collect()
    });
    let p = match criterion {
        Criterion::Malfare(p) => Some(p.to_string()),
        _ => None,
    };
    Ok(ResultDocument {
        version: DOCUMENT_VERSION,
        criterion: criterion.name().to_owned(),
        p,
        allocation,
        utilities,
        weighted_utilities: weighted.iter().map(|w| w.to_string()).collect(),
        criterion_value: criterion_value_to_json(&value),
        trace,
    })
}

/// Re-validates a reloaded result document against its instance document:
/// the reported split must be a genuine decomposition of the reported
/// allocation, utilities must match the oracles, and the trace (when
/// present) must cover exactly the greedily assigned chores.
pub fn check_result_document(
    instance_document: &InstanceDocument,
    result: &ResultDocument,
) -> Result<(), IoError> {
    let instance = instance_document.build_instance()?;
    let labels = LabelTable::new(&instance_document.chores)?;
    let agents = instance.agent_count();
    if result.allocation.len() != agents {
        return Err(IoError::BadResult(format!(
            "{} agent entries for {agents} agents",
            result.allocation.len()
        )));
    }
    let mut clean_bundles = Vec::with_capacity(agents);
    let mut supp_bundles = Vec::with_capacity(agents);
    let mut bundles = Vec::with_capacity(agents);
    for (agent, entry) in result.allocation.iter().enumerate() {
        if entry.agent != agent + 1 {
            return Err(IoError::BadResult(format!(
                "agent entries out of order at position {agent}"
            )));
        }
        let chores = labels.set(agent, "chores", &entry.chores)?;
        let clean = labels.set(agent, "clean", &entry.clean)?;
        let supp = labels.set(agent, "supplementary", &entry.supplementary)?;
        let mut union = clean.clone();
        union.union_with(&supp);
        if union != chores {
            return Err(IoError::BadResult(format!(
                "agent {}: clean and supplementary do not partition the bundle",
                agent + 1
            )));
        }
        bundles.push(chores);
        clean_bundles.push(clean);
        supp_bundles.push(supp);
    }
    let chores = instance.chore_count();
    let complement = |sets: &[ChoreSet]| {
        let mut pool = ChoreSet::full(chores);
        for set in sets {
            for chore in set.iter() {
                pool.remove(chore);
            }
        }
        pool
    };
    let allocation = Allocation::from_bundles(complement(&bundles), bundles.clone())
        .map_err(|e| IoError::BadResult(e.to_string()))?;
    let decomposition = Decomposition {
        clean: Allocation::from_bundles(complement(&clean_bundles), clean_bundles)
            .map_err(|e| IoError::BadResult(e.to_string()))?,
        supplementary: Allocation::from_bundles(complement(&supp_bundles), supp_bundles)
            .map_err(|e| IoError::BadResult(e.to_string()))?,
    };
    decomposition
        .verify(&instance, &allocation)
        .map_err(|e| IoError::BadResult(e.to_string()))?;
    let utilities = crate::model::utility_vector(&instance, &allocation)?;
    if utilities != result.utilities {
        return Err(IoError::BadResult("utilities do not match the oracles".into()));
    }
    if let Some(trace) = &result.trace {
        let clean_size = decomposition.clean.allocated_count();
        let expected = instance.chore_count() - clean_size;
        if trace.len() != expected {
            return Err(IoError::BadResult(format!(
                "trace has {} steps, expected {expected}",
                trace.len()
            )));
        }
    }
    Ok(())
}

/// Cost families the generator can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    ApprovalCap,
    PartitionCap,
    Explicit,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [
        FamilyKind::ApprovalCap,
        FamilyKind::PartitionCap,
        FamilyKind::Explicit,
    ];
}

impl FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approval_cap" => Ok(FamilyKind::ApprovalCap),
            "partition_cap" => Ok(FamilyKind::PartitionCap),
            "explicit" => Ok(FamilyKind::Explicit),
            other => Err(format!(
                "unknown family {other:?}, expected approval_cap | partition_cap | explicit"
            )),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::ApprovalCap => "approval_cap",
            FamilyKind::PartitionCap => "partition_cap",
            FamilyKind::Explicit => "explicit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub agents: usize,
    pub chores: usize,
    pub families: Vec<FamilyKind>,
    /// Probability that an agent's weight is drawn from {1/2, 2, 3} instead
    /// of 1.
    pub weight_skew: f64,
    pub seed: u64,
}

/// Deterministic pseudo-random instance: the same configuration and seed
/// always produce a byte-identical document.
pub fn generate_instance(config: &GenConfig) -> Result<InstanceDocument, IoError> {
    if config.agents == 0 {
        return Err(IoError::Gen("need at least one agent".into()));
    }
    if !(0.0..=1.0).contains(&config.weight_skew) {
        return Err(IoError::Gen(format!(
            "weight skew must be in [0, 1], got {}",
            config.weight_skew
        )));
    }
    let mut families = config.families.clone();
    if families.is_empty() {
        return Err(IoError::Gen("need at least one cost family".into()));
    }
    if config.chores > ExplicitCost::MAX_GROUND {
        families.retain(|f| *f != FamilyKind::Explicit);
        if families.is_empty() {
            return Err(IoError::Gen(format!(
                "explicit tables support at most {} chores, got {}",
                ExplicitCost::MAX_GROUND,
                config.chores
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let chores: Vec<String> = (1..=config.chores).map(|i| format!("o{i}")).collect();
    let skewed = [
        BigRational::new(BigInt::from(1), BigInt::from(2)),
        BigRational::from_integer(BigInt::from(2)),
        BigRational::from_integer(BigInt::from(3)),
    ];
    let mut agents = Vec::with_capacity(config.agents);
    for _ in 0..config.agents {
        let weight = if config.weight_skew > 0.0 && rng.random_bool(config.weight_skew) {
            skewed[rng.random_range(0..skewed.len())].clone()
        } else {
            BigRational::one()
        };
        let family = families[rng.random_range(0..families.len())];
        let cost = random_cost_spec(&mut rng, &chores, family);
        agents.push(AgentSpec {
            weight: Weight(weight),
            cost,
        });
    }
    Ok(InstanceDocument {
        version: DOCUMENT_VERSION,
        chores,
        agents,
    })
}

fn random_partition_categories(rng: &mut ChaCha8Rng, labels: &[String]) -> Vec<CategorySpec> {
    let chores = labels.len();
    if chores == 0 {
        return Vec::new();
    }
    let buckets = rng.random_range(1..=chores.min(4));
    let mut shuffled: Vec<usize> = (0..chores).collect();
    shuffled.shuffle(rng);
    let mut members = vec![Vec::new(); buckets];
    for chore in shuffled {
        // A sixth of the chores stay uncategorized and always cost 1.
        if rng.random_range(0..6) == 0 {
            continue;
        }
        members[rng.random_range(0..buckets)].push(chore);
    }
    members
        .into_iter()
        .filter(|bucket| !bucket.is_empty())
        .map(|mut bucket| {
            bucket.sort_unstable();
            let cap = rng.random_range(0..=bucket.len() as u64);
            CategorySpec {
                chores: bucket.iter().map(|&c| labels[c].clone()).collect(),
                cap,
            }
        })
        .collect()
}

fn random_cost_spec(rng: &mut ChaCha8Rng, labels: &[String], family: FamilyKind) -> CostSpec {
    let chores = labels.len();
    match family {
        FamilyKind::ApprovalCap => {
            let approved: Vec<usize> = (0..chores).filter(|_| rng.random_bool(0.6)).collect();
            let cap = rng.random_range(0..=approved.len() as u64);
            CostSpec::ApprovalCap {
                approved: approved.iter().map(|&c| labels[c].clone()).collect(),
                cap,
            }
        }
        FamilyKind::PartitionCap => CostSpec::PartitionCap {
            categories: random_partition_categories(rng, labels),
        },
        FamilyKind::Explicit => {
            // Tabulate a random partition-cap oracle; the table inherits its
            // axioms and is re-validated on load anyway.
            let categories = random_partition_categories(rng, labels);
            let sets = categories
                .iter()
                .map(|category| {
                    let indices = category.chores.iter().map(|label| {
                        labels.iter().position(|l| l == label).expect("own label")
                    });
                    (ChoreSet::from_indices(chores, indices), category.cap)
                })
                .collect();
            let oracle =
                PartitionCapCost::new(chores, sets).expect("generated categories are disjoint");
            let table =
                ExplicitCost::from_oracle(&oracle).expect("generator keeps tables small");
            debug_assert_eq!(validate_binary_supermodular(&table), Ok(()));
            let costs = (0..1u32 << chores)
                .map(|mask| {
                    let subset = ChoreSet::from_bit_mask(chores, mask);
                    (subset_key(labels, &subset), table.cost(&subset))
                })
                .collect();
            CostSpec::Explicit { costs }
        }
    }
}
