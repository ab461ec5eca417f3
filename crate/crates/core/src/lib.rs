//! Contextual importance and utility for black-box models.
//!
//! Given any deterministic input-to-output mapping, this crate explains an
//! individual outcome by perturbing selected inputs over their allowed
//! ranges and watching how far the output moves:
//!
//! - **Contextual importance (CI)** is the fraction of a reference output
//!   range the output spans while the studied inputs vary, everything else
//!   held at the instance being explained.
//! - **Contextual utility (CU)** is where the instance's own output sits
//!   inside that estimated range, i.e. how favorable the current values are.
//!
//! No surrogate or intermediate model is involved: the numbers come
//! straight from evaluating the model itself on a seeded sample set.
//! Named concepts (sets of inputs) let explanations move between
//! abstraction levels, with importance measured relative to a parent
//! concept's own range.
//!
//! The crate ships the engine ([`engine`]), sample-set construction
//! ([`sampling`]), built-in testbed models ([`models`]) and text/SVG/JSON
//! rendering ([`render`]).

pub mod engine;
pub mod error;
pub mod models;
pub mod render;
pub mod sampling;
pub mod types;

pub use engine::{
    contextual_importance, contextual_utility, estimate_output_range, explain,
    explain_concept_decomposition, generalized_contextual_importance, input_output_curve,
    Curve, CuValue, ExplanationRequest, ParentScope,
};
pub use error::{CiuError, Result};
pub use sampling::{
    correct_one_hot, filter_unrealistic, generate_samples, SampleMatrix, SamplingConfig,
};
pub use types::{
    BlackBoxModel, CiuResult, ConceptVocabulary, Context, IndexSet, InputDescriptor, InputKind,
    OutputDescriptor, OutputRangeEstimate, Problem, Target,
};
