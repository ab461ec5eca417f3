//! Core domain types: models, descriptors, contexts, index sets, range
//! estimates, results and concept vocabularies.
//!
//! All types are immutable after construction and safe to share across
//! threads.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};

/// A deterministic mapping from an input vector to an output vector whose
/// internals are not inspected.
///
/// Implementations must be deterministic (identical inputs yield identical
/// outputs) and free of side effects observable by the engine.
pub trait BlackBoxModel: Send + Sync {
    /// Number of inputs the model accepts.
    fn arity_in(&self) -> usize;

    /// Number of outputs the model produces.
    fn arity_out(&self) -> usize;

    /// Evaluate a single input vector.
    fn eval(&self, input: &[f64]) -> Result<Vec<f64>>;

    /// Evaluate a batch of rows. The engine always hands the whole sample
    /// matrix to this method so vectorized implementations can shine; the
    /// default falls back to row-wise evaluation and attributes failures
    /// to the offending row.
    fn eval_batch(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        inputs
            .iter()
            .enumerate()
            .map(|(row, x)| self.eval(x).map_err(|e| e.at_row(row)))
            .collect()
    }

    /// Declares whether `eval` may be invoked from several threads at once.
    /// The engine falls back to sequential evaluation when this is false.
    fn parallel_eval_safe(&self) -> bool {
        false
    }
}

/// How an input behaves under perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Real-valued; sampled uniformly from `[min_value, max_value]`.
    Continuous,
    /// Discrete; sampled uniformly from the listed category values only.
    Categorical,
    /// Member of a one-hot group: exactly one member of the group is 1 in
    /// any coherent input vector.
    OneHotMember { group: String },
}

/// Per-feature metadata: display name, position, kind and perturbation range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub name: String,
    pub index: usize,
    pub kind: InputKind,
    pub min_value: f64,
    pub max_value: f64,
    /// Permitted discrete values; required when `kind` is categorical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<f64>>,
}

impl InputDescriptor {
    /// A continuous feature sampled from `[min_value, max_value]`.
    pub fn continuous(name: impl Into<String>, index: usize, min_value: f64, max_value: f64) -> Result<Self> {
        let d = Self {
            name: name.into(),
            index,
            kind: InputKind::Continuous,
            min_value,
            max_value,
            categories: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// A categorical feature restricted to `categories`; the perturbation
    /// range is the min/max of the listed values.
    pub fn categorical(name: impl Into<String>, index: usize, categories: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if categories.is_empty() {
            return Err(CiuError::InvalidInputDescriptor {
                name,
                reason: "categorical feature needs at least one category".into(),
            });
        }
        let min_value = categories.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_value = categories.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let d = Self {
            name,
            index,
            kind: InputKind::Categorical,
            min_value,
            max_value,
            categories: Some(categories),
        };
        d.validate()?;
        Ok(d)
    }

    /// A member of the named one-hot group; range is fixed to `[0, 1]`.
    pub fn one_hot_member(name: impl Into<String>, index: usize, group: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            index,
            kind: InputKind::OneHotMember { group: group.into() },
            min_value: 0.0,
            max_value: 1.0,
            categories: None,
        }
    }

    /// Width of the perturbation range.
    pub fn range_width(&self) -> f64 {
        self.max_value - self.min_value
    }

    /// Check the descriptor's own invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(CiuError::InvalidInputDescriptor {
                name: self.name.clone(),
                reason,
            })
        };
        if !(self.min_value <= self.max_value) {
            return fail(format!(
                "min_value {} exceeds max_value {}",
                self.min_value, self.max_value
            ));
        }
        match &self.kind {
            InputKind::Continuous => {
                if self.categories.is_some() {
                    return fail("continuous feature must not list categories".into());
                }
            }
            InputKind::Categorical => match &self.categories {
                None => return fail("categorical feature must list categories".into()),
                Some(cats) if cats.is_empty() => {
                    return fail("categorical feature needs at least one category".into())
                }
                Some(cats) => {
                    for &c in cats {
                        if c < self.min_value || c > self.max_value {
                            return fail(format!(
                                "category {} outside range [{}, {}]",
                                c, self.min_value, self.max_value
                            ));
                        }
                    }
                }
            },
            InputKind::OneHotMember { group } => {
                if self.min_value != 0.0 || self.max_value != 1.0 {
                    return Err(CiuError::MalformedOneHotGroup {
                        group: group.clone(),
                        reason: format!(
                            "member `{}` has range [{}, {}], expected [0, 1]",
                            self.name, self.min_value, self.max_value
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The value range an output can take by definition, e.g. `[0, 1]` for a
/// class probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDescriptor {
    pub name: String,
    pub index: usize,
    pub absmin: f64,
    pub absmax: f64,
}

impl OutputDescriptor {
    pub fn new(name: impl Into<String>, index: usize, absmin: f64, absmax: f64) -> Result<Self> {
        let name = name.into();
        // Strict: equal bounds would put a zero in the importance denominator.
        if !(absmin < absmax) {
            return Err(CiuError::DegenerateOutputRange { name, absmin, absmax });
        }
        Ok(Self {
            name,
            index,
            absmin,
            absmax,
        })
    }

    /// Width of the pre-defined range.
    pub fn abs_width(&self) -> f64 {
        self.absmax - self.absmin
    }
}

/// The input vector describing the situation or instance being explained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Context {
    values: Vec<f64>,
}

impl Context {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Out-of-range values are deliberately allowed (they can serve as
    /// probes of the model); this reports them as warnings instead.
    pub fn range_warnings(&self, inputs: &[InputDescriptor]) -> Vec<String> {
        self.values
            .iter()
            .zip(inputs)
            .filter(|(v, d)| **v < d.min_value || **v > d.max_value)
            .map(|(v, d)| {
                format!(
                    "context value {} for `{}` outside [{}, {}]",
                    v, d.name, d.min_value, d.max_value
                )
            })
            .collect()
    }
}

impl From<Vec<f64>> for Context {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// An ordered set of distinct input indices: the inputs studied together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Build from any iterator of indices. Rejects empty input and
    /// duplicates; the stored order is ascending.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(CiuError::EmptyIndexSet);
        }
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(CiuError::DuplicateIndex { index: pair[0] });
            }
        }
        Ok(Self { indices })
    }

    /// The singleton set `{index}`.
    pub fn single(index: usize) -> Self {
        Self { indices: vec![index] }
    }

    /// The full set `{0, .., arity_in - 1}`.
    pub fn all(arity_in: usize) -> Result<Self> {
        Self::new(0..arity_in)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|i| other.contains(*i))
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("index set is never empty")
    }

    /// Error unless every index is addressable in a vector of `arity` slots.
    pub fn check_arity(&self, arity: usize, what: &'static str) -> Result<()> {
        if self.max_index() >= arity {
            return Err(CiuError::IndexOutOfRange {
                what,
                index: self.max_index(),
                limit: arity,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = CiuError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Vec<usize> {
        s.indices
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// The `[cmin, cmax]` range an output spans while the studied inputs vary
/// over their allowed values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRangeEstimate {
    pub cmin: f64,
    pub cmax: f64,
    /// Total rows evaluated, including the context and extreme rows.
    pub n_samples: usize,
    /// Whether the context's own output was part of the estimate. Required
    /// for contextual utility to stay within `[0, 1]`.
    pub contains_context: bool,
}

impl OutputRangeEstimate {
    pub fn width(&self) -> f64 {
        self.cmax - self.cmin
    }

    pub fn is_degenerate(&self) -> bool {
        self.cmax == self.cmin
    }
}

/// What a single result explains: a raw feature set or a named concept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Features(IndexSet),
    Concept(String),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Features(set) => write!(f, "{set}"),
            Target::Concept(name) => write!(f, "{name}"),
        }
    }
}

/// Contextual importance and utility of one target for one output, together
/// with the evidence it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiuResult {
    pub target: Target,
    pub output_index: usize,
    pub ci: f64,
    pub cu: f64,
    pub cmin: f64,
    pub cmax: f64,
    #[serde(rename = "y")]
    pub y_context: f64,
    /// Number of evaluated sample rows behind the estimate.
    pub n: usize,
    /// Seed the sample set was generated from.
    pub seed: u64,
    /// True when the estimated range collapsed to a point; `cu` is then the
    /// neutral 0.5 by convention.
    #[serde(default)]
    pub degenerate_range: bool,
    /// True when the model left the pre-defined output range during
    /// sampling; `ci` is reported unclamped so the pathology stays visible.
    #[serde(default)]
    pub overshoot: bool,
}

/// Named sets of inputs enabling explanations at higher abstraction levels,
/// plus alternative display names per concept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptVocabulary {
    concepts: BTreeMap<String, IndexSet>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    synonyms: BTreeMap<String, Vec<String>>,
}

impl ConceptVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a concept. Names must be unique.
    pub fn add_concept(&mut self, name: impl Into<String>, members: IndexSet) -> Result<()> {
        let name = name.into();
        if self.concepts.contains_key(&name) {
            return Err(CiuError::DuplicateConcept { name });
        }
        self.concepts.insert(name, members);
        Ok(())
    }

    /// Register an alternative display name for an existing concept.
    pub fn add_synonym(&mut self, concept: &str, synonym: impl Into<String>) -> Result<()> {
        if !self.concepts.contains_key(concept) {
            return Err(CiuError::UnknownConcept {
                name: concept.to_string(),
            });
        }
        self.synonyms
            .entry(concept.to_string())
            .or_default()
            .push(synonym.into());
        Ok(())
    }

    /// Look a concept up by canonical name or by synonym.
    pub fn resolve(&self, name: &str) -> Option<&IndexSet> {
        if let Some(set) = self.concepts.get(name) {
            return Some(set);
        }
        self.synonyms
            .iter()
            .find(|(_, syns)| syns.iter().any(|s| s == name))
            .and_then(|(canonical, _)| self.concepts.get(canonical))
    }

    /// Preferred display name: the first registered synonym, else the
    /// canonical name itself.
    pub fn display_name<'a>(&'a self, name: &'a str) -> &'a str {
        self.synonyms
            .get(name)
            .and_then(|s| s.first())
            .map(String::as_str)
            .unwrap_or(name)
    }

    /// Reverse lookup: the canonical name of a concept with exactly this
    /// member set, if one is registered.
    pub fn concept_for(&self, members: &IndexSet) -> Option<&str> {
        self.concepts
            .iter()
            .find(|(_, set)| *set == members)
            .map(|(name, _)| name.as_str())
    }

    /// Iterate concepts in name order.
    pub fn concepts(&self) -> impl Iterator<Item = (&str, &IndexSet)> {
        self.concepts.iter().map(|(n, s)| (n.as_str(), s))
    }

    /// Synonyms registered for a concept, if any.
    pub fn synonyms_of(&self, concept: &str) -> &[String] {
        self.synonyms.get(concept).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Check every concept against the problem's input arity and every
    /// synonym against the concept table. Needed for vocabularies built by
    /// deserialization rather than through the checked constructors.
    pub fn validate(&self, arity_in: usize) -> Result<()> {
        for set in self.concepts.values() {
            set.check_arity(arity_in, "concept member")?;
        }
        for concept in self.synonyms.keys() {
            if !self.concepts.contains_key(concept) {
                return Err(CiuError::UnknownConcept {
                    name: concept.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A validated bundle of model plus input/output descriptors: the handle
/// every engine operation works against.
#[derive(Clone)]
pub struct Problem {
    model: Arc<dyn BlackBoxModel>,
    inputs: Vec<InputDescriptor>,
    outputs: Vec<OutputDescriptor>,
    training_data: Option<Arc<Vec<Vec<f64>>>>,
}

impl Problem {
    /// Validate descriptor counts against the model arities, check every
    /// descriptor invariant and the coherence of one-hot groups.
    pub fn new(
        model: Arc<dyn BlackBoxModel>,
        inputs: Vec<InputDescriptor>,
        outputs: Vec<OutputDescriptor>,
    ) -> Result<Self> {
        if inputs.len() != model.arity_in() {
            return Err(CiuError::ArityMismatch {
                what: "input descriptors",
                expected: model.arity_in(),
                actual: inputs.len(),
            });
        }
        if outputs.len() != model.arity_out() {
            return Err(CiuError::ArityMismatch {
                what: "output descriptors",
                expected: model.arity_out(),
                actual: outputs.len(),
            });
        }
        for (pos, d) in inputs.iter().enumerate() {
            d.validate()?;
            if d.index != pos {
                return Err(CiuError::InvalidInputDescriptor {
                    name: d.name.clone(),
                    reason: format!("descriptor at position {pos} declares index {}", d.index),
                });
            }
        }
        for (pos, d) in outputs.iter().enumerate() {
            if !(d.absmin < d.absmax) {
                return Err(CiuError::DegenerateOutputRange {
                    name: d.name.clone(),
                    absmin: d.absmin,
                    absmax: d.absmax,
                });
            }
            if d.index != pos {
                return Err(CiuError::InvalidInputDescriptor {
                    name: d.name.clone(),
                    reason: format!("descriptor at position {pos} declares index {}", d.index),
                });
            }
        }
        // One-hot groups need at least two members to be meaningful.
        let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
        for d in &inputs {
            if let InputKind::OneHotMember { group } = &d.kind {
                *groups.entry(group.as_str()).or_insert(0) += 1;
            }
        }
        for (group, count) in groups {
            if count < 2 {
                return Err(CiuError::MalformedOneHotGroup {
                    group: group.to_string(),
                    reason: format!("group has {count} member(s), need at least 2"),
                });
            }
        }
        Ok(Self {
            model,
            inputs,
            outputs,
            training_data: None,
        })
    }

    /// Attach a reference data set enabling realism filtering and giving
    /// regression outputs a training-derived pre-defined range.
    pub fn with_training_data(mut self, rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &rows {
            if row.len() != self.arity_in() {
                return Err(CiuError::ArityMismatch {
                    what: "training row",
                    expected: self.arity_in(),
                    actual: row.len(),
                });
            }
        }
        self.training_data = Some(Arc::new(rows));
        Ok(self)
    }

    pub fn model(&self) -> &dyn BlackBoxModel {
        self.model.as_ref()
    }

    pub fn inputs(&self) -> &[InputDescriptor] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[OutputDescriptor] {
        &self.outputs
    }

    pub fn arity_in(&self) -> usize {
        self.inputs.len()
    }

    pub fn arity_out(&self) -> usize {
        self.outputs.len()
    }

    pub fn training_data(&self) -> Option<&[Vec<f64>]> {
        self.training_data.as_deref().map(Vec::as_slice)
    }

    /// Warnings for context values lying outside their descriptor ranges.
    /// Deliberately not an error: out-of-range contexts probe the model.
    pub fn context_warnings(&self, context: &Context) -> Vec<String> {
        context.range_warnings(&self.inputs)
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("arity_in", &self.arity_in())
            .field("arity_out", &self.arity_out())
            .field("has_training_data", &self.training_data.is_some())
            .finish()
    }
}
