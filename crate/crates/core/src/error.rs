//! Error type shared by all engine operations.

use thiserror::Error;

/// Errors produced by problem validation, sampling, evaluation and rendering.
#[derive(Debug, Error)]
pub enum CiuError {
    /// Descriptor count or vector length does not match the model.
    #[error("arity mismatch for {what}: expected {expected}, got {actual}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An input descriptor violates its own invariants.
    #[error("invalid input descriptor `{name}`: {reason}")]
    InvalidInputDescriptor { name: String, reason: String },

    /// An output descriptor has absmin >= absmax, which leaves the
    /// importance ratio undefined.
    #[error("invalid output descriptor `{name}`: pre-defined range [{absmin}, {absmax}] is empty")]
    DegenerateOutputRange {
        name: String,
        absmin: f64,
        absmax: f64,
    },

    /// A one-hot group is inconsistent across its member descriptors.
    #[error("malformed one-hot group `{group}`: {reason}")]
    MalformedOneHotGroup { group: String, reason: String },

    /// Index sets must name at least one input.
    #[error("index set is empty")]
    EmptyIndexSet,

    /// Index sets may not repeat an input.
    #[error("duplicate index {index} in index set")]
    DuplicateIndex { index: usize },

    /// An index referred to a position that does not exist.
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    /// Sampling configuration violates its invariants.
    #[error("invalid sampling config: {reason}")]
    InvalidSamplingConfig { reason: String },

    /// Perturbing only part of a one-hot group is incoherent.
    #[error("one-hot group `{group}` is only partially contained in the studied set")]
    PartialOneHotGroup { group: String },

    /// Realism filtering needs a reference data set.
    #[error("filter_distance is set but the problem has no training data")]
    MissingTrainingData,

    /// The training data used for filtering may not be empty.
    #[error("training data is empty")]
    EmptyTrainingData,

    /// Every sample row was rejected by the realism filter.
    #[error("all sample rows filtered out at threshold {threshold}; relax or disable filtering")]
    AllRowsFiltered { threshold: f64 },

    /// The model failed to evaluate a sample row.
    #[error("model evaluation failed on row {row}: {message}")]
    EvalFailed { row: usize, message: String },

    /// The model failed to evaluate a batch (no row attribution available).
    #[error("model evaluation failed: {0}")]
    ModelError(String),

    /// Contextual utility is only defined when the context row was part of
    /// the range estimate.
    #[error("output range was estimated without the context row; contextual utility is undefined")]
    ContextNotInRange,

    /// Eq-style importance relative to an inert parent concept is undefined.
    #[error("parent range is degenerate (cmin == cmax); generalized importance is undefined")]
    DegenerateParentRange,

    /// A concept name was not found in the vocabulary.
    #[error("unknown concept `{name}`")]
    UnknownConcept { name: String },

    /// A concept name is already registered.
    #[error("concept `{name}` is already defined")]
    DuplicateConcept { name: String },

    /// Decomposing a single-feature concept is vacuous.
    #[error("concept `{name}` has a single member; decomposition is vacuous")]
    SingletonConcept { name: String },

    /// Eq. for concept-relative importance requires the target set to be
    /// contained in the parent set.
    #[error("target {target} is not a subset of parent concept {parent}")]
    TargetNotInParent { target: String, parent: String },

    /// Input/output curve needs at least two sweep points.
    #[error("curve resolution must be >= 2, got {resolution}")]
    InvalidResolution { resolution: usize },

    /// Color mapping is only defined on the utility range [0, 1].
    #[error("cu value {cu} outside [0, 1]")]
    CuOutOfRange { cu: f64 },

    /// Color spec invariant violated.
    #[error("invalid color spec: {reason}")]
    InvalidColorSpec { reason: String },

    /// Word table invariant violated.
    #[error("invalid word table: {reason}")]
    InvalidWordTable { reason: String },

    /// Rendering needs at least one result.
    #[error("no results to render")]
    EmptyResults,

    /// Bar plot rendering needs one label per result.
    #[error("label count mismatch: {expected} results but {actual} labels")]
    LabelMismatch { expected: usize, actual: usize },

    /// Textual explanation needs a positive number of entries.
    #[error("top_k must be >= 1")]
    InvalidTopK,

    /// A curve series must hold at least two points.
    #[error("curve series too short: {len} points")]
    CurveTooShort { len: usize },

    /// Training set is empty or inconsistent.
    #[error("training data invalid: {reason}")]
    InvalidTrainingData { reason: String },

    /// Training loss left the finite range.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    /// Model file could not be interpreted.
    #[error("model file error: {0}")]
    ModelFile(String),

    /// Underlying serialization error.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    /// Underlying I/O error.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CiuError {
    /// Attach a row index to an evaluation failure, unless one is already
    /// present.
    pub fn at_row(self, row: usize) -> Self {
        match self {
            CiuError::EvalFailed { .. } => self,
            other => CiuError::EvalFailed {
                row,
                message: other.to_string(),
            },
        }
    }
}

/// Convenient result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CiuError>;
