//! Analytic demo models with closed forms, usable as oracles in tests.

use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};
use crate::types::{BlackBoxModel, InputDescriptor, OutputDescriptor};

fn check_arity(input: &[f64], expected: usize) -> Result<()> {
    if input.len() != expected {
        return Err(CiuError::ArityMismatch {
            what: "model input",
            expected,
            actual: input.len(),
        });
    }
    Ok(())
}

/// Weighted sum `y = w . x + b`, the textbook linear decision model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }

    /// The two-input demo `y = 0.3 x1 + 0.7 x2` on the unit box.
    pub fn demo() -> Self {
        Self::new(vec![0.3, 0.7], 0.0)
    }

    /// Unit-box descriptors matching the demo instance.
    pub fn demo_descriptors() -> (Vec<InputDescriptor>, Vec<OutputDescriptor>) {
        (
            vec![
                InputDescriptor::continuous("x1", 0, 0.0, 1.0).unwrap(),
                InputDescriptor::continuous("x2", 1, 0.0, 1.0).unwrap(),
            ],
            vec![OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap()],
        )
    }
}

impl BlackBoxModel for LinearModel {
    fn arity_in(&self) -> usize {
        self.weights.len()
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_arity(input, self.weights.len())?;
        let y = self
            .weights
            .iter()
            .zip(input)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        Ok(vec![y])
    }

    fn parallel_eval_safe(&self) -> bool {
        true
    }
}

/// Axis-aligned piecewise-constant surface: per input a sorted list of cut
/// points splits the axis into bins, and every grid cell carries one output
/// level. This is the shape rule sets and shallow decision trees produce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleStepModel {
    /// Interior cut points per input, strictly increasing.
    axis_cuts: Vec<Vec<f64>>,
    /// One level per cell, row-major with the last axis fastest.
    levels: Vec<f64>,
}

impl RuleStepModel {
    pub fn new(axis_cuts: Vec<Vec<f64>>, levels: Vec<f64>) -> Result<Self> {
        if axis_cuts.is_empty() {
            return Err(CiuError::InvalidTrainingData {
                reason: "rule model needs at least one input axis".into(),
            });
        }
        for cuts in &axis_cuts {
            for pair in cuts.windows(2) {
                if !(pair[0] < pair[1]) {
                    return Err(CiuError::InvalidTrainingData {
                        reason: format!("axis cuts not strictly increasing: {} then {}", pair[0], pair[1]),
                    });
                }
            }
        }
        let expected: usize = axis_cuts.iter().map(|c| c.len() + 1).product();
        if levels.len() != expected {
            return Err(CiuError::ArityMismatch {
                what: "rule levels",
                expected,
                actual: levels.len(),
            });
        }
        Ok(Self { axis_cuts, levels })
    }

    /// Two-input demo staircase on the unit box with output in `[0, 1]`.
    pub fn demo() -> Self {
        Self::new(
            vec![vec![0.5], vec![1.0 / 3.0, 2.0 / 3.0]],
            vec![0.1, 0.3, 0.5, 0.4, 0.7, 1.0],
        )
        .expect("demo rule model is well formed")
    }

    /// Unit-box descriptors matching the demo instance.
    pub fn demo_descriptors() -> (Vec<InputDescriptor>, Vec<OutputDescriptor>) {
        (
            vec![
                InputDescriptor::continuous("x1", 0, 0.0, 1.0).unwrap(),
                InputDescriptor::continuous("x2", 1, 0.0, 1.0).unwrap(),
            ],
            vec![OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap()],
        )
    }

    fn cell_index(&self, input: &[f64]) -> usize {
        let mut idx = 0usize;
        for (cuts, &x) in self.axis_cuts.iter().zip(input) {
            // Bin k holds values in [cut[k-1], cut[k]); values at a cut fall right.
            let bin = cuts.partition_point(|c| *c <= x);
            idx = idx * (cuts.len() + 1) + bin;
        }
        idx
    }
}

impl BlackBoxModel for RuleStepModel {
    fn arity_in(&self) -> usize {
        self.axis_cuts.len()
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_arity(input, self.axis_cuts.len())?;
        Ok(vec![self.levels[self.cell_index(input)]])
    }

    fn parallel_eval_safe(&self) -> bool {
        true
    }
}

/// The smooth non-linear demo surface `y = (sqrt(x1) + x2^2) / 2` on the
/// unit box; its output also lies in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NonlinearDemoModel;

impl NonlinearDemoModel {
    pub fn new() -> Self {
        Self
    }

    /// Unit-box descriptors matching the demo instance.
    pub fn demo_descriptors() -> (Vec<InputDescriptor>, Vec<OutputDescriptor>) {
        (
            vec![
                InputDescriptor::continuous("x1", 0, 0.0, 1.0).unwrap(),
                InputDescriptor::continuous("x2", 1, 0.0, 1.0).unwrap(),
            ],
            vec![OutputDescriptor::new("y", 0, 0.0, 1.0).unwrap()],
        )
    }
}

impl BlackBoxModel for NonlinearDemoModel {
    fn arity_in(&self) -> usize {
        2
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_arity(input, 2)?;
        Ok(vec![(input[0].sqrt() + input[1] * input[1]) / 2.0])
    }

    fn parallel_eval_safe(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinear_demo_matches_hand_computed_value() {
        let model = NonlinearDemoModel::new();
        let y = model.eval(&[0.1, 0.2]).unwrap()[0];
        let expected = (0.1f64.sqrt() + 0.04) / 2.0;
        assert!((y - expected).abs() < 1e-15);
        assert!((y - 0.1781).abs() < 1e-4);
    }

    #[test]
    fn nonlinear_demo_at_origin_is_zero() {
        let model = NonlinearDemoModel::new();
        assert_eq!(model.eval(&[0.0, 0.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn linear_demo_at_ones_is_one() {
        let model = LinearModel::demo();
        assert!((model.eval(&[1.0, 1.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_demo_matches_formula_on_grid() {
        let model = NonlinearDemoModel::new();
        for i in 0..100 {
            for j in 0..100 {
                let x1 = i as f64 / 99.0;
                let x2 = j as f64 / 99.0;
                let y = model.eval(&[x1, x2]).unwrap()[0];
                assert!((y - (x1.sqrt() + x2 * x2) / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rule_model_partitions_the_box() {
        let model = RuleStepModel::demo();
        // Sample a dense grid: output must always be one of the levels.
        for i in 0..50 {
            for j in 0..50 {
                let x = [i as f64 / 49.0, j as f64 / 49.0];
                let y = model.eval(&x).unwrap()[0];
                assert!(model.levels.contains(&y));
                assert!((0.0..=1.0).contains(&y));
            }
        }
        // Boundary convention: a value at a cut falls into the right bin.
        assert_eq!(model.eval(&[0.5, 0.0]).unwrap()[0], 0.4);
        assert_eq!(model.eval(&[0.49, 0.0]).unwrap()[0], 0.1);
    }

    #[test]
    fn rule_model_rejects_wrong_level_count() {
        let err = RuleStepModel::new(vec![vec![0.5]], vec![0.1]).unwrap_err();
        assert!(matches!(err, CiuError::ArityMismatch { .. }), "{err}");
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let model = LinearModel::demo();
        assert!(model.eval(&[1.0]).is_err());
        let model = NonlinearDemoModel::new();
        assert!(model.eval(&[1.0, 2.0, 3.0]).is_err());
    }
}
