//! The explanation engine: evaluates the model over sample matrices and
//! computes contextual importance, contextual utility and concept-relative
//! importance.
//!
//! Importance is the fraction of a reference output range spanned when the
//! studied inputs vary; utility is the position of the context's own output
//! inside the estimated range. The reference range is either the output's
//! pre-defined `[absmin, absmax]` or the estimated range of a parent
//! concept.

use rayon::prelude::*;

use crate::error::{CiuError, Result};
use crate::sampling::{correct_one_hot, filter_unrealistic, generate_samples, SampleMatrix, SamplingConfig};
use crate::types::{
    BlackBoxModel, CiuResult, ConceptVocabulary, Context, IndexSet, OutputRangeEstimate,
    Problem, Target,
};

/// Reference scope for the importance denominator.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ParentScope {
    /// Divide by the output's pre-defined `[absmin, absmax]`.
    #[default]
    Absolute,
    /// Divide by the estimated range when all inputs vary together. This
    /// generally differs from the pre-defined range: a model rarely spans
    /// its full declared output range under perturbation.
    All,
    /// Divide by the estimated range of a named concept; every target must
    /// be a subset of the concept's members.
    Concept(String),
}

impl std::str::FromStr for ParentScope {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            _ if s.eq_ignore_ascii_case("absolute") => ParentScope::Absolute,
            _ if s.eq_ignore_ascii_case("all") => ParentScope::All,
            _ => ParentScope::Concept(s.to_string()),
        })
    }
}

/// One explanation job: which instance, which targets, which output, and
/// how to sample.
#[derive(Clone, Debug)]
pub struct ExplanationRequest {
    pub context: Context,
    pub targets: Vec<Target>,
    pub output_index: usize,
    pub parent: ParentScope,
    pub sampling: SamplingConfig,
}

impl ExplanationRequest {
    pub fn new(context: Context, targets: Vec<Target>, output_index: usize) -> Self {
        Self {
            context,
            targets,
            output_index,
            parent: ParentScope::Absolute,
            sampling: SamplingConfig::default(),
        }
    }

    pub fn with_parent(mut self, parent: ParentScope) -> Self {
        self.parent = parent;
        self
    }

    pub fn with_sampling(mut self, sampling: SamplingConfig) -> Self {
        self.sampling = sampling;
        self
    }
}

/// Contextual utility value plus the flag marking a collapsed range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuValue {
    pub value: f64,
    /// Set when `cmax == cmin`; the value is then the neutral 0.5, since an
    /// inert feature is neither favorable nor unfavorable.
    pub degenerate: bool,
}

/// A sweep of one input across its range with everything else held at the
/// context, plus the context's own point.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub context_point: (f64, f64),
}

/// Distinct stream for the one-hot correction so it does not consume from
/// the sample stream.
fn correction_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Generate, correct and filter the sample matrix for one studied set.
fn build_samples(
    problem: &Problem,
    context: &Context,
    studied: &IndexSet,
    config: &SamplingConfig,
) -> Result<SampleMatrix> {
    let samples = generate_samples(context, studied, problem.inputs(), config)?;
    let samples = correct_one_hot(samples, problem.inputs(), correction_seed(config.seed))?;
    match config.filter_distance {
        Some(threshold) => {
            let training = problem
                .training_data()
                .ok_or(CiuError::MissingTrainingData)?;
            filter_unrealistic(samples, training, threshold, problem.inputs())
        }
        None => Ok(samples),
    }
}

/// Evaluate the whole matrix in one batch call and sanity-check the shape
/// and finiteness of what the model returned.
fn eval_matrix(model: &dyn BlackBoxModel, samples: &SampleMatrix) -> Result<Vec<Vec<f64>>> {
    let outputs = model.eval_batch(samples.rows())?;
    if outputs.len() != samples.n_rows() {
        return Err(CiuError::ArityMismatch {
            what: "model output rows",
            expected: samples.n_rows(),
            actual: outputs.len(),
        });
    }
    for (row, out) in outputs.iter().enumerate() {
        if out.len() != model.arity_out() {
            return Err(CiuError::ArityMismatch {
                what: "model output columns",
                expected: model.arity_out(),
                actual: out.len(),
            }
            .at_row(row));
        }
        if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
            return Err(CiuError::EvalFailed {
                row,
                message: format!("non-finite output {bad}"),
            });
        }
    }
    Ok(outputs)
}

/// Fold evaluated outputs into the `[cmin, cmax]` estimate for one output.
fn range_from_outputs(
    outputs: &[Vec<f64>],
    samples: &SampleMatrix,
    output_index: usize,
) -> OutputRangeEstimate {
    let mut cmin = f64::INFINITY;
    let mut cmax = f64::NEG_INFINITY;
    for out in outputs {
        let y = out[output_index];
        cmin = cmin.min(y);
        cmax = cmax.max(y);
    }
    OutputRangeEstimate {
        cmin,
        cmax,
        n_samples: outputs.len(),
        contains_context: samples.anchor_row().is_some(),
    }
}

/// Estimate the range of values output `output_index` takes over the sample
/// matrix (anchor and extreme rows included).
pub fn estimate_output_range(
    model: &dyn BlackBoxModel,
    samples: &SampleMatrix,
    output_index: usize,
) -> Result<OutputRangeEstimate> {
    if output_index >= model.arity_out() {
        return Err(CiuError::IndexOutOfRange {
            what: "output",
            index: output_index,
            limit: model.arity_out(),
        });
    }
    let outputs = eval_matrix(model, samples)?;
    Ok(range_from_outputs(&outputs, samples, output_index))
}

/// Contextual importance against the pre-defined output range:
/// `(cmax - cmin) / (absmax - absmin)`. Never negative; may exceed 1 when
/// the model overshoots its declared range.
pub fn contextual_importance(
    range: &OutputRangeEstimate,
    output: &crate::types::OutputDescriptor,
) -> f64 {
    range.width() / output.abs_width()
}

/// Contextual utility: `(y(C) - cmin) / (cmax - cmin)`, guaranteed in
/// `[0, 1]` because the context row is part of the estimate. A collapsed
/// range yields the neutral 0.5 with the degenerate flag set.
pub fn contextual_utility(y_context: f64, range: &OutputRangeEstimate) -> Result<CuValue> {
    if !range.contains_context {
        return Err(CiuError::ContextNotInRange);
    }
    if range.is_degenerate() {
        return Ok(CuValue {
            value: 0.5,
            degenerate: true,
        });
    }
    Ok(CuValue {
        value: (y_context - range.cmin) / range.width(),
        degenerate: false,
    })
}

/// Importance of a child set relative to a parent concept's estimated
/// range: `child width / parent width`.
pub fn generalized_contextual_importance(
    child_range: &OutputRangeEstimate,
    parent_range: &OutputRangeEstimate,
) -> Result<f64> {
    if parent_range.is_degenerate() {
        return Err(CiuError::DegenerateParentRange);
    }
    Ok(child_range.width() / parent_range.width())
}

fn resolve_target(
    target: &Target,
    vocabulary: &ConceptVocabulary,
    arity_in: usize,
) -> Result<IndexSet> {
    match target {
        Target::Features(set) => {
            set.check_arity(arity_in, "target input")?;
            Ok(set.clone())
        }
        Target::Concept(name) => {
            let set = vocabulary
                .resolve(name)
                .ok_or_else(|| CiuError::UnknownConcept { name: name.clone() })?;
            set.check_arity(arity_in, "concept member")?;
            Ok(set.clone())
        }
    }
}

fn resolve_parent_set(
    parent: &ParentScope,
    vocabulary: &ConceptVocabulary,
    arity_in: usize,
) -> Result<Option<IndexSet>> {
    match parent {
        ParentScope::Absolute => Ok(None),
        ParentScope::All => Ok(Some(IndexSet::all(arity_in)?)),
        ParentScope::Concept(name) => {
            let set = vocabulary
                .resolve(name)
                .ok_or_else(|| CiuError::UnknownConcept { name: name.clone() })?;
            set.check_arity(arity_in, "concept member")?;
            Ok(Some(set.clone()))
        }
    }
}

/// Compute one result for an already-resolved target.
fn explain_one(
    problem: &Problem,
    request: &ExplanationRequest,
    target: &Target,
    studied: &IndexSet,
    parent_range: Option<&OutputRangeEstimate>,
) -> Result<CiuResult> {
    let j = request.output_index;
    let output = &problem.outputs()[j];

    let samples = build_samples(problem, &request.context, studied, &request.sampling)?;
    let outputs = eval_matrix(problem.model(), &samples)?;
    let range = range_from_outputs(&outputs, &samples, j);

    // The anchor row's evaluation doubles as y(C); no extra model call.
    let y_context = match samples.anchor_row() {
        Some(row) => outputs[row][j],
        None => return Err(CiuError::ContextNotInRange),
    };
    let cu = contextual_utility(y_context, &range)?;
    let ci = match parent_range {
        None => contextual_importance(&range, output),
        Some(parent) => generalized_contextual_importance(&range, parent)?,
    };
    let overshoot = range.cmin < output.absmin || range.cmax > output.absmax;

    Ok(CiuResult {
        target: target.clone(),
        output_index: j,
        ci,
        cu: cu.value,
        cmin: range.cmin,
        cmax: range.cmax,
        y_context,
        n: samples.n_rows(),
        seed: request.sampling.seed,
        degenerate_range: cu.degenerate,
        overshoot,
    })
}

/// Explain every target in the request: per target, build the sample set,
/// estimate the output range and derive importance and utility. Targets are
/// evaluated in parallel when the model declares concurrent evaluation safe.
pub fn explain(
    problem: &Problem,
    request: &ExplanationRequest,
    vocabulary: &ConceptVocabulary,
) -> Result<Vec<CiuResult>> {
    request.sampling.validate()?;
    if request.output_index >= problem.arity_out() {
        return Err(CiuError::IndexOutOfRange {
            what: "output",
            index: request.output_index,
            limit: problem.arity_out(),
        });
    }
    if request.context.len() != problem.arity_in() {
        return Err(CiuError::ArityMismatch {
            what: "context",
            expected: problem.arity_in(),
            actual: request.context.len(),
        });
    }

    let parent_set = resolve_parent_set(&request.parent, vocabulary, problem.arity_in())?;
    let resolved: Vec<(Target, IndexSet)> = request
        .targets
        .iter()
        .map(|t| resolve_target(t, vocabulary, problem.arity_in()).map(|s| (t.clone(), s)))
        .collect::<Result<_>>()?;

    if let Some(parent) = &parent_set {
        let parent_name = match &request.parent {
            ParentScope::Concept(name) => name.as_str(),
            _ => "ALL",
        };
        for (target, set) in &resolved {
            if !set.is_subset_of(parent) {
                return Err(CiuError::TargetNotInParent {
                    target: target.to_string(),
                    parent: parent_name.to_string(),
                });
            }
        }
    }

    let parent_range = match &parent_set {
        Some(set) => {
            let samples = build_samples(problem, &request.context, set, &request.sampling)?;
            let outputs = eval_matrix(problem.model(), &samples)?;
            Some(range_from_outputs(&outputs, &samples, request.output_index))
        }
        None => None,
    };

    let compute = |(target, studied): &(Target, IndexSet)| {
        explain_one(problem, request, target, studied, parent_range.as_ref())
    };
    if problem.model().parallel_eval_safe() && resolved.len() > 1 {
        resolved.par_iter().map(compute).collect()
    } else {
        resolved.iter().map(compute).collect()
    }
}

/// Explain a concept's value through its parts: one result per registered
/// sub-concept (proper subsets of the concept) plus one per member feature
/// not covered by any sub-concept, each with importance relative to the
/// concept's own range.
pub fn explain_concept_decomposition(
    problem: &Problem,
    concept: &str,
    context: &Context,
    output_index: usize,
    sampling: &SamplingConfig,
    vocabulary: &ConceptVocabulary,
) -> Result<Vec<CiuResult>> {
    let (parent, parent_set) = if concept.eq_ignore_ascii_case("all") {
        (ParentScope::All, IndexSet::all(problem.arity_in())?)
    } else {
        let set = vocabulary
            .resolve(concept)
            .ok_or_else(|| CiuError::UnknownConcept {
                name: concept.to_string(),
            })?
            .clone();
        (ParentScope::Concept(concept.to_string()), set)
    };
    if parent_set.len() < 2 {
        return Err(CiuError::SingletonConcept {
            name: concept.to_string(),
        });
    }

    let mut targets: Vec<(usize, Target)> = Vec::new();
    let mut covered: Vec<usize> = Vec::new();
    for (name, set) in vocabulary.concepts() {
        if set.is_subset_of(&parent_set) && set.len() < parent_set.len() {
            targets.push((set.indices()[0], Target::Concept(name.to_string())));
            covered.extend_from_slice(set.indices());
        }
    }
    for &i in parent_set.indices() {
        if !covered.contains(&i) {
            targets.push((i, Target::Features(IndexSet::single(i))));
        }
    }
    // Present parts in input order.
    targets.sort_by_key(|(first_index, _)| *first_index);

    let request = ExplanationRequest {
        context: context.clone(),
        targets: targets.into_iter().map(|(_, t)| t).collect(),
        output_index,
        parent,
        sampling: sampling.clone(),
    };
    explain(problem, &request, vocabulary)
}

/// Sweep one input across its descriptor range at `resolution` evenly
/// spaced points, everything else held at the context. Returns the sweep
/// plus the context's own point.
pub fn input_output_curve(
    problem: &Problem,
    context: &Context,
    input_index: usize,
    output_index: usize,
    resolution: usize,
) -> Result<Curve> {
    if resolution < 2 {
        return Err(CiuError::InvalidResolution { resolution });
    }
    if input_index >= problem.arity_in() {
        return Err(CiuError::IndexOutOfRange {
            what: "input",
            index: input_index,
            limit: problem.arity_in(),
        });
    }
    if output_index >= problem.arity_out() {
        return Err(CiuError::IndexOutOfRange {
            what: "output",
            index: output_index,
            limit: problem.arity_out(),
        });
    }
    if context.len() != problem.arity_in() {
        return Err(CiuError::ArityMismatch {
            what: "context",
            expected: problem.arity_in(),
            actual: context.len(),
        });
    }

    let d = &problem.inputs()[input_index];
    let step = d.range_width() / (resolution - 1) as f64;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(resolution + 1);
    let mut xs: Vec<f64> = Vec::with_capacity(resolution);
    for k in 0..resolution {
        let x = d.min_value + step * k as f64;
        let mut row = context.values().to_vec();
        row[input_index] = x;
        rows.push(row);
        xs.push(x);
    }
    rows.push(context.values().to_vec());

    let outputs = problem.model().eval_batch(&rows)?;
    if outputs.len() != rows.len() {
        return Err(CiuError::ArityMismatch {
            what: "model output rows",
            expected: rows.len(),
            actual: outputs.len(),
        });
    }
    let points = xs
        .into_iter()
        .zip(&outputs[..resolution])
        .map(|(x, out)| (x, out[output_index]))
        .collect();
    let context_point = (
        context.values()[input_index],
        outputs[resolution][output_index],
    );
    Ok(Curve {
        points,
        context_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LinearModel, NonlinearDemoModel};
    use crate::types::OutputDescriptor;
    use std::sync::Arc;

    fn nonlinear_problem() -> Problem {
        let (inputs, outputs) = NonlinearDemoModel::demo_descriptors();
        Problem::new(Arc::new(NonlinearDemoModel::new()), inputs, outputs).unwrap()
    }

    fn linear_problem() -> Problem {
        let (inputs, outputs) = LinearModel::demo_descriptors();
        Problem::new(Arc::new(LinearModel::demo()), inputs, outputs).unwrap()
    }

    fn estimate(cmin: f64, cmax: f64) -> OutputRangeEstimate {
        OutputRangeEstimate {
            cmin,
            cmax,
            n_samples: 100,
            contains_context: true,
        }
    }

    const Y_AT_DEMO_CONTEXT: f64 = 0.17811388300841897; // (sqrt(0.1) + 0.04) / 2

    #[test]
    fn range_for_first_input_hits_closed_form_endpoints() {
        let problem = nonlinear_problem();
        let context = Context::new(vec![0.1, 0.2]);
        let samples = generate_samples(
            &context,
            &IndexSet::single(0),
            problem.inputs(),
            &SamplingConfig::default(),
        )
        .unwrap();
        let range = estimate_output_range(problem.model(), &samples, 0).unwrap();
        // y is monotone in x1: endpoints x1=0 -> 0.02, x1=1 -> 0.52; the
        // extreme rows make the estimate exact.
        assert!((range.cmin - 0.02).abs() < 1e-12, "cmin {}", range.cmin);
        assert!((range.cmax - 0.52).abs() < 1e-12, "cmax {}", range.cmax);
        assert!(range.contains_context);
    }

    #[test]
    fn range_for_second_input_hits_closed_form_endpoints() {
        let problem = nonlinear_problem();
        let context = Context::new(vec![0.1, 0.2]);
        let samples = generate_samples(
            &context,
            &IndexSet::single(1),
            problem.inputs(),
            &SamplingConfig::default(),
        )
        .unwrap();
        let range = estimate_output_range(problem.model(), &samples, 0).unwrap();
        assert!((range.cmin - 0.1581).abs() < 1e-4, "cmin {}", range.cmin);
        assert!((range.cmax - 0.6581).abs() < 1e-4, "cmax {}", range.cmax);
    }

    #[test]
    fn constant_model_yields_point_range() {
        struct Constant;
        impl BlackBoxModel for Constant {
            fn arity_in(&self) -> usize {
                2
            }
            fn arity_out(&self) -> usize {
                1
            }
            fn eval(&self, _input: &[f64]) -> crate::error::Result<Vec<f64>> {
                Ok(vec![0.7])
            }
        }
        let inputs = vec![
            crate::types::InputDescriptor::continuous("a", 0, 0.0, 1.0).unwrap(),
            crate::types::InputDescriptor::continuous("b", 1, 0.0, 1.0).unwrap(),
        ];
        let outputs = vec![OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap()];
        let problem = Problem::new(Arc::new(Constant), inputs, outputs).unwrap();
        let samples = generate_samples(
            &Context::new(vec![0.5, 0.5]),
            &IndexSet::single(0),
            problem.inputs(),
            &SamplingConfig::default(),
        )
        .unwrap();
        let range = estimate_output_range(problem.model(), &samples, 0).unwrap();
        assert_eq!((range.cmin, range.cmax), (0.7, 0.7));
        assert!(range.is_degenerate());
    }

    #[test]
    fn importance_is_the_width_ratio() {
        let output = OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap();
        assert!((contextual_importance(&estimate(0.02, 0.52), &output) - 0.5).abs() < 1e-12);
        assert_eq!(contextual_importance(&estimate(0.3, 0.3), &output), 0.0);
        let wide = OutputDescriptor::new("y", 0, 0.0, 100.0).unwrap();
        assert!((contextual_importance(&estimate(10.0, 60.0), &wide) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn utility_reproduces_the_worked_example_values() {
        let cu = contextual_utility(Y_AT_DEMO_CONTEXT, &estimate(0.02, 0.52)).unwrap();
        assert!((cu.value - 0.316).abs() < 5e-4, "cu {}", cu.value);
        let cu = contextual_utility(
            Y_AT_DEMO_CONTEXT,
            &estimate(0.15811388300841897, 0.6581138830084190),
        )
        .unwrap();
        assert!((cu.value - 0.04).abs() < 1e-12, "cu {}", cu.value);
    }

    #[test]
    fn utility_boundary_cases() {
        let range = estimate(0.2, 0.8);
        assert_eq!(contextual_utility(0.2, &range).unwrap().value, 0.0);
        assert_eq!(contextual_utility(0.8, &range).unwrap().value, 1.0);
    }

    #[test]
    fn utility_without_context_row_is_rejected() {
        let range = OutputRangeEstimate {
            cmin: 0.0,
            cmax: 1.0,
            n_samples: 10,
            contains_context: false,
        };
        assert!(matches!(
            contextual_utility(0.5, &range),
            Err(CiuError::ContextNotInRange)
        ));
    }

    #[test]
    fn utility_of_degenerate_range_is_neutral_and_flagged() {
        let cu = contextual_utility(0.7, &estimate(0.7, 0.7)).unwrap();
        assert_eq!(cu.value, 0.5);
        assert!(cu.degenerate);
    }

    #[test]
    fn generalized_importance_ratios() {
        let parent = estimate(0.0, 1.0);
        let child = estimate(0.02, 0.52);
        assert!(
            (generalized_contextual_importance(&child, &parent).unwrap() - 0.5).abs() < 1e-12
        );
        assert_eq!(
            generalized_contextual_importance(&parent, &parent).unwrap(),
            1.0
        );
        // Virginica petal-length vs all-inputs importance: the shared
        // absolute denominator cancels, leaving 0.638 / 0.920.
        let petal = estimate(0.0, 0.638);
        let all = estimate(0.0, 0.920);
        let ratio = generalized_contextual_importance(&petal, &all).unwrap();
        assert!((ratio - 0.693).abs() < 1e-3, "ratio {ratio}");
        assert!(matches!(
            generalized_contextual_importance(&child, &estimate(0.5, 0.5)),
            Err(CiuError::DegenerateParentRange)
        ));
    }

    #[test]
    fn explain_reproduces_the_worked_example() {
        let problem = nonlinear_problem();
        let request = ExplanationRequest::new(
            Context::new(vec![0.1, 0.2]),
            vec![
                Target::Features(IndexSet::single(0)),
                Target::Features(IndexSet::single(1)),
            ],
            0,
        );
        let results = explain(&problem, &request, &ConceptVocabulary::new()).unwrap();
        assert_eq!(results.len(), 2);
        assert!((results[0].ci - 0.5).abs() < 0.01, "ci1 {}", results[0].ci);
        assert!((results[1].ci - 0.5).abs() < 0.01, "ci2 {}", results[1].ci);
        assert!((results[0].cu - 0.316).abs() < 0.01, "cu1 {}", results[0].cu);
        assert!((results[1].cu - 0.04).abs() < 0.01, "cu2 {}", results[1].cu);
        assert!((results[0].y_context - Y_AT_DEMO_CONTEXT).abs() < 1e-12);
    }

    #[test]
    fn weighted_sum_importance_is_the_weight_and_utility_is_the_value() {
        let problem = linear_problem();
        for context in [[0.25, 0.9], [0.0, 0.0], [1.0, 1.0], [0.61, 0.13]] {
            let request = ExplanationRequest::new(
                Context::new(context.to_vec()),
                vec![
                    Target::Features(IndexSet::single(0)),
                    Target::Features(IndexSet::single(1)),
                ],
                0,
            );
            let results = explain(&problem, &request, &ConceptVocabulary::new()).unwrap();
            assert!((results[0].ci - 0.3).abs() < 1e-9);
            assert!((results[1].ci - 0.7).abs() < 1e-9);
            assert!((results[0].cu - context[0]).abs() < 1e-9);
            assert!((results[1].cu - context[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn explain_is_deterministic_for_a_fixed_seed() {
        let problem = nonlinear_problem();
        let request = ExplanationRequest::new(
            Context::new(vec![0.3, 0.7]),
            vec![
                Target::Features(IndexSet::single(0)),
                Target::Features(IndexSet::new([0, 1]).unwrap()),
            ],
            0,
        )
        .with_sampling(SamplingConfig::new(500, 1234).unwrap());
        let a = explain(&problem, &request, &ConceptVocabulary::new()).unwrap();
        let b = explain(&problem, &request, &ConceptVocabulary::new()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chain_identity_links_absolute_and_generalized_importance() {
        // With shared range estimates, CI_abs(child) must equal
        // CI_gen(child rel parent) * CI_abs(parent) exactly.
        let problem = nonlinear_problem();
        let context = Context::new(vec![0.4, 0.6]);
        let config = SamplingConfig::new(300, 77).unwrap();
        let child_set = IndexSet::single(0);
        let parent_set = IndexSet::all(2).unwrap();
        let child_samples =
            generate_samples(&context, &child_set, problem.inputs(), &config).unwrap();
        let parent_samples =
            generate_samples(&context, &parent_set, problem.inputs(), &config).unwrap();
        let child = estimate_output_range(problem.model(), &child_samples, 0).unwrap();
        let parent = estimate_output_range(problem.model(), &parent_samples, 0).unwrap();
        let output = &problem.outputs()[0];

        let ci_abs_child = contextual_importance(&child, output);
        let ci_abs_parent = contextual_importance(&parent, output);
        let ci_gen = generalized_contextual_importance(&child, &parent).unwrap();
        assert!((ci_abs_child - ci_gen * ci_abs_parent).abs() < 1e-12);
    }

    #[test]
    fn unknown_concept_and_subset_violations_error() {
        let problem = nonlinear_problem();
        let request = ExplanationRequest::new(
            Context::new(vec![0.1, 0.2]),
            vec![Target::Concept("nope".into())],
            0,
        );
        assert!(matches!(
            explain(&problem, &request, &ConceptVocabulary::new()),
            Err(CiuError::UnknownConcept { .. })
        ));

        let mut vocab = ConceptVocabulary::new();
        vocab.add_concept("only x1", IndexSet::single(0)).unwrap();
        let request = ExplanationRequest::new(
            Context::new(vec![0.1, 0.2]),
            vec![Target::Features(IndexSet::single(1))],
            0,
        )
        .with_parent(ParentScope::Concept("only x1".into()));
        assert!(matches!(
            explain(&problem, &request, &vocab),
            Err(CiuError::TargetNotInParent { .. })
        ));
    }

    #[test]
    fn decomposition_splits_a_concept_into_members() {
        // Three-input weighted sum: the part widths are the weights, so the
        // importance of each member relative to the pair is exact.
        let model = LinearModel::new(vec![0.2, 0.3, 0.5], 0.0);
        let inputs = vec![
            crate::types::InputDescriptor::continuous("a", 0, 0.0, 1.0).unwrap(),
            crate::types::InputDescriptor::continuous("b", 1, 0.0, 1.0).unwrap(),
            crate::types::InputDescriptor::continuous("c", 2, 0.0, 1.0).unwrap(),
        ];
        let outputs = vec![OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap()];
        let problem = Problem::new(Arc::new(model), inputs, outputs).unwrap();
        let mut vocab = ConceptVocabulary::new();
        vocab
            .add_concept("ab", IndexSet::new([0, 1]).unwrap())
            .unwrap();

        let results = explain_concept_decomposition(
            &problem,
            "ab",
            &Context::new(vec![0.5, 0.5, 0.5]),
            0,
            &SamplingConfig::default(),
            &vocab,
        )
        .unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].target, Target::Features(IndexSet::single(0)));
        // The extreme rows make the single-feature widths exactly 0.2 and
        // 0.3; both divide by the same sampled parent width, so the ratio
        // is exact even though the parent range itself is Monte Carlo.
        assert!((results[0].ci / results[1].ci - 2.0 / 3.0).abs() < 1e-12);
        for r in &results {
            assert!(r.ci > 0.0 && r.ci <= 1.0, "ci {} outside (0,1]", r.ci);
        }

        // Registered sub-concepts take the place of their member features.
        vocab
            .add_concept("whole", IndexSet::all(3).unwrap())
            .unwrap();
        let results = explain_concept_decomposition(
            &problem,
            "whole",
            &Context::new(vec![0.5, 0.5, 0.5]),
            0,
            &SamplingConfig::default(),
            &vocab,
        )
        .unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].target, Target::Concept("ab".into()));
        assert_eq!(results[1].target, Target::Features(IndexSet::single(2)));

        assert!(matches!(
            explain_concept_decomposition(
                &problem,
                "missing",
                &Context::new(vec![0.5, 0.5, 0.5]),
                0,
                &SamplingConfig::default(),
                &vocab,
            ),
            Err(CiuError::UnknownConcept { .. })
        ));

        vocab.add_concept("solo", IndexSet::single(2)).unwrap();
        assert!(matches!(
            explain_concept_decomposition(
                &problem,
                "solo",
                &Context::new(vec![0.5, 0.5, 0.5]),
                0,
                &SamplingConfig::default(),
                &vocab,
            ),
            Err(CiuError::SingletonConcept { .. })
        ));
    }

    #[test]
    fn curve_sweeps_are_monotone_for_the_demo_model() {
        let problem = nonlinear_problem();
        let context = Context::new(vec![0.1, 0.2]);
        let curve = input_output_curve(&problem, &context, 0, 0, 11).unwrap();
        assert_eq!(curve.points.len(), 11);
        assert!((curve.points[0].1 - 0.02).abs() < 1e-12);
        assert!((curve.points[10].1 - 0.52).abs() < 1e-12);
        for pair in curve.points.windows(2) {
            assert!(pair[0].1 < pair[1].1, "sweep not increasing: {pair:?}");
        }
        assert!((curve.context_point.0 - 0.1).abs() < 1e-15);
        assert!((curve.context_point.1 - Y_AT_DEMO_CONTEXT).abs() < 1e-12);
    }

    #[test]
    fn curve_resolution_two_is_exactly_the_endpoints() {
        let problem = linear_problem();
        let curve =
            input_output_curve(&problem, &Context::new(vec![0.5, 0.5]), 1, 0, 2).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!(curve.points[0].0, 0.0);
        assert_eq!(curve.points[1].0, 1.0);
        assert!(matches!(
            input_output_curve(&problem, &Context::new(vec![0.5, 0.5]), 1, 0, 1),
            Err(CiuError::InvalidResolution { .. })
        ));
        assert!(matches!(
            input_output_curve(&problem, &Context::new(vec![0.5, 0.5]), 9, 0, 5),
            Err(CiuError::IndexOutOfRange { .. })
        ));
    }
}

