//! k-nearest-neighbors over a stored training matrix, with range-normalized
//! Euclidean distance. Predictions are means of the k nearest target rows,
//! so they can never leave the training-target range. Classification is the
//! same mean over one-hot target rows, which yields class frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};
use crate::types::BlackBoxModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnTask {
    Regression,
    Classification,
}

/// Lazy learner: keeps the training matrix and averages the targets of the
/// k nearest rows at prediction time. Ties on distance break toward the
/// lower row index, keeping predictions deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<Vec<f64>>,
    k: usize,
    task: KnnTask,
    /// Reciprocal feature ranges from the training data; zero-width
    /// features contribute nothing to distances.
    scale: Vec<f64>,
}

impl KnnModel {
    pub fn fit(
        train_x: Vec<Vec<f64>>,
        train_y: Vec<Vec<f64>>,
        k: usize,
        task: KnnTask,
    ) -> Result<Self> {
        if train_x.is_empty() {
            return Err(CiuError::InvalidTrainingData {
                reason: "empty training set".into(),
            });
        }
        if train_x.len() != train_y.len() {
            return Err(CiuError::InvalidTrainingData {
                reason: format!(
                    "{} feature rows but {} target rows",
                    train_x.len(),
                    train_y.len()
                ),
            });
        }
        if k < 1 || k > train_x.len() {
            return Err(CiuError::InvalidTrainingData {
                reason: format!("k = {k} outside [1, {}]", train_x.len()),
            });
        }
        let n_features = train_x[0].len();
        for row in &train_x {
            if row.len() != n_features {
                return Err(CiuError::InvalidTrainingData {
                    reason: "ragged training matrix".into(),
                });
            }
        }
        let n_targets = train_y[0].len();
        for row in &train_y {
            if row.len() != n_targets {
                return Err(CiuError::InvalidTrainingData {
                    reason: "ragged target matrix".into(),
                });
            }
        }

        let mut scale = vec![0.0; n_features];
        for f in 0..n_features {
            let lo = train_x.iter().map(|r| r[f]).fold(f64::INFINITY, f64::min);
            let hi = train_x.iter().map(|r| r[f]).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                scale[f] = 1.0 / (hi - lo);
            }
        }
        Ok(Self {
            train_x,
            train_y,
            k,
            task,
            scale,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn task(&self) -> KnnTask {
        self.task
    }

    pub fn n_train(&self) -> usize {
        self.train_x.len()
    }

    fn distance_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.scale)
            .map(|((x, y), s)| {
                let d = (x - y) * s;
                d * d
            })
            .sum()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut order: Vec<(f64, usize)> = self
            .train_x
            .iter()
            .enumerate()
            .map(|(i, row)| (self.distance_sq(x, row), i))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

        let n_targets = self.train_y[0].len();
        let mut mean = vec![0.0; n_targets];
        for (_, idx) in order.iter().take(self.k) {
            for (m, t) in mean.iter_mut().zip(&self.train_y[*idx]) {
                *m += t;
            }
        }
        for m in &mut mean {
            *m /= self.k as f64;
        }
        mean
    }
}

/// Free-function form of [`KnnModel::predict`] with arity checking.
pub fn knn_predict(model: &KnnModel, x: &[f64]) -> Result<Vec<f64>> {
    model.eval(x)
}

impl BlackBoxModel for KnnModel {
    fn arity_in(&self) -> usize {
        self.train_x[0].len()
    }

    fn arity_out(&self) -> usize {
        self.train_y[0].len()
    }

    fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.arity_in() {
            return Err(CiuError::ArityMismatch {
                what: "model input",
                expected: self.arity_in(),
                actual: input.len(),
            });
        }
        Ok(self.predict(input))
    }

    fn parallel_eval_safe(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ],
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        )
    }

    #[test]
    fn k1_on_a_training_row_returns_its_target_exactly() {
        let (x, y) = toy();
        let model = KnnModel::fit(x, y, 1, KnnTask::Regression).unwrap();
        assert_eq!(model.predict(&[1.0, 0.0]), vec![2.0]);
    }

    #[test]
    fn k_equal_to_n_returns_the_global_mean() {
        let (x, y) = toy();
        let model = KnnModel::fit(x, y, 4, KnnTask::Regression).unwrap();
        assert_eq!(model.predict(&[0.3, 0.9]), vec![2.5]);
    }

    #[test]
    fn predictions_stay_within_target_range() {
        let (x, y) = toy();
        let model = KnnModel::fit(x, y, 2, KnnTask::Regression).unwrap();
        for probe in [
            [0.5, 0.5],
            [-10.0, 30.0],
            [100.0, -100.0],
            [0.0, 0.0],
        ] {
            let p = model.predict(&probe)[0];
            assert!((1.0..=4.0).contains(&p), "prediction {p} escaped target range");
        }
    }

    #[test]
    fn invalid_k_is_rejected() {
        let (x, y) = toy();
        assert!(KnnModel::fit(x.clone(), y.clone(), 0, KnnTask::Regression).is_err());
        assert!(KnnModel::fit(x, y, 5, KnnTask::Regression).is_err());
    }

    #[test]
    fn classification_targets_yield_class_frequencies() {
        let x = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let y = vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ];
        let model = KnnModel::fit(x, y, 4, KnnTask::Classification).unwrap();
        assert_eq!(model.predict(&[0.5]), vec![0.5, 0.5]);
    }
}
