//! A small fully-connected network with sigmoid activations on every layer,
//! trained by plain full-batch gradient descent on mean-squared error.
//!
//! The sigmoid output layer bounds every output to (0, 1) no matter how far
//! an input vector strays from the training region, which is exactly the
//! guarantee that makes random perturbation sampling safe for
//! classification outputs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};
use crate::types::BlackBoxModel;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Feed-forward sigmoid network. Inputs are rescaled by the per-feature
/// min/max captured at training time so raw-unit features do not saturate
/// the first layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallMlp {
    layer_sizes: Vec<usize>,
    /// Per layer: `weights[l][out][in]`.
    weights: Vec<Vec<Vec<f64>>>,
    /// Per layer: `biases[l][out]`.
    biases: Vec<Vec<f64>>,
    input_min: Vec<f64>,
    input_max: Vec<f64>,
}

impl SmallMlp {
    /// Fresh network with weights and biases drawn uniformly from
    /// `[-0.5, 0.5]` using the seed, and identity input scaling.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|s| *s == 0) {
            return Err(CiuError::InvalidTrainingData {
                reason: format!("bad layer sizes {layer_sizes:?}: need >= 2 non-zero layers"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 1..layer_sizes.len() {
            let (n_in, n_out) = (layer_sizes[l - 1], layer_sizes[l]);
            weights.push(
                (0..n_out)
                    .map(|_| (0..n_in).map(|_| rng.gen_range(-0.5..=0.5)).collect())
                    .collect(),
            );
            biases.push((0..n_out).map(|_| rng.gen_range(-0.5..=0.5)).collect());
        }
        let n_inputs = layer_sizes[0];
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            input_min: vec![0.0; n_inputs],
            input_max: vec![1.0; n_inputs],
        })
    }

    /// Set the per-feature scaling applied before the first layer.
    pub fn with_input_scaling(mut self, min: Vec<f64>, max: Vec<f64>) -> Self {
        self.input_min = min;
        self.input_max = max;
        self
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_min)
            .zip(&self.input_max)
            .map(|((v, lo), hi)| {
                let w = hi - lo;
                if w > 0.0 {
                    (v - lo) / w
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Activations of every layer, input first. Used by both prediction and
    /// backpropagation.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut activations = Vec::with_capacity(self.layer_sizes.len());
        activations.push(self.normalize(x));
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let prev = activations.last().expect("at least the input layer");
            let next: Vec<f64> = w
                .iter()
                .zip(b)
                .map(|(row, bias)| {
                    sigmoid(row.iter().zip(prev).map(|(wi, ai)| wi * ai).sum::<f64>() + bias)
                })
                .collect();
            activations.push(next);
        }
        activations
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).pop().expect("network has layers")
    }
}

impl BlackBoxModel for SmallMlp {
    fn arity_in(&self) -> usize {
        self.layer_sizes[0]
    }

    fn arity_out(&self) -> usize {
        *self.layer_sizes.last().expect("network has layers")
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

/// Outcome of a training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainReport {
    /// Mean squared error over all rows and outputs after the last epoch.
    pub final_mse: f64,
    /// Fraction of rows whose arg-max prediction matches the arg-max
    /// target. Present only when the targets are one-hot rows.
    pub accuracy: Option<f64>,
    pub epochs_run: usize,
}

fn is_one_hot(row: &[f64]) -> bool {
    row.iter().all(|v| *v == 0.0 || *v == 1.0) && row.iter().filter(|v| **v == 1.0).count() == 1
}

fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite activations"))
        .map(|(i, _)| i)
        .expect("non-empty row")
}

/// Train a sigmoid network on `(features, targets)` with plain full-batch
/// gradient descent. Deterministic for a fixed seed. Errors when the loss
/// leaves the finite range, naming the epoch.
pub fn train_mlp(
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    layer_sizes: &[usize],
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<(SmallMlp, TrainReport)> {
    if features.is_empty() {
        return Err(CiuError::InvalidTrainingData {
            reason: "empty dataset".into(),
        });
    }
    if features.len() != targets.len() {
        return Err(CiuError::InvalidTrainingData {
            reason: format!(
                "{} feature rows but {} target rows",
                features.len(),
                targets.len()
            ),
        });
    }
    let n_in = *layer_sizes.first().ok_or_else(|| CiuError::InvalidTrainingData {
        reason: "no layer sizes".into(),
    })?;
    let n_out = *layer_sizes.last().expect("checked non-empty");
    for row in features {
        if row.len() != n_in {
            return Err(CiuError::ArityMismatch {
                what: "feature row",
                expected: n_in,
                actual: row.len(),
            });
        }
    }
    for row in targets {
        if row.len() != n_out {
            return Err(CiuError::ArityMismatch {
                what: "target row",
                expected: n_out,
                actual: row.len(),
            });
        }
    }

    let n_rows = features.len() as f64;
    let mut input_min = vec![f64::INFINITY; n_in];
    let mut input_max = vec![f64::NEG_INFINITY; n_in];
    for row in features {
        for (i, v) in row.iter().enumerate() {
            input_min[i] = input_min[i].min(*v);
            input_max[i] = input_max[i].max(*v);
        }
    }
    let mut net = SmallMlp::init(layer_sizes, seed)?.with_input_scaling(input_min, input_max);
    let n_layers = net.weights.len();

    let mut final_mse = f64::NAN;
    for epoch in 0..epochs {
        let mut grad_w: Vec<Vec<Vec<f64>>> = net
            .weights
            .iter()
            .map(|w| w.iter().map(|row| vec![0.0; row.len()]).collect())
            .collect();
        let mut grad_b: Vec<Vec<f64>> =
            net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut sse = 0.0;

        for (x, t) in features.iter().zip(targets) {
            let activations = net.forward(x);
            let output = &activations[n_layers];
            // delta of the output layer: (a - t) * a * (1 - a)
            let mut delta: Vec<f64> = output
                .iter()
                .zip(t)
                .map(|(a, t)| {
                    sse += (a - t) * (a - t);
                    (a - t) * a * (1.0 - a)
                })
                .collect();
            for l in (0..n_layers).rev() {
                let prev = &activations[l];
                for (o, d) in delta.iter().enumerate() {
                    for (i, a) in prev.iter().enumerate() {
                        grad_w[l][o][i] += d * a;
                    }
                    grad_b[l][o] += d;
                }
                if l > 0 {
                    delta = (0..net.weights[l][0].len())
                        .map(|i| {
                            let back: f64 =
                                delta.iter().enumerate().map(|(o, d)| d * net.weights[l][o][i]).sum();
                            back * prev[i] * (1.0 - prev[i])
                        })
                        .collect();
                }
            }
        }

        for l in 0..n_layers {
            for (o, row) in net.weights[l].iter_mut().enumerate() {
                for (i, w) in row.iter_mut().enumerate() {
                    *w -= learning_rate * grad_w[l][o][i] / n_rows;
                }
                net.biases[l][o] -= learning_rate * grad_b[l][o] / n_rows;
            }
        }

        final_mse = sse / (n_rows * n_out as f64);
        if !final_mse.is_finite() {
            return Err(CiuError::TrainingDiverged { epoch: epoch + 1 });
        }
    }

    if epochs == 0 {
        // No update happened; report the untrained error.
        let mut sse = 0.0;
        for (x, t) in features.iter().zip(targets) {
            for (a, t) in net.predict(x).iter().zip(t) {
                sse += (a - t) * (a - t);
            }
        }
        final_mse = sse / (n_rows * n_out as f64);
    }

    let accuracy = if targets.iter().all(|t| is_one_hot(t)) {
        let hits = features
            .iter()
            .zip(targets)
            .filter(|(x, t)| argmax(&net.predict(x)) == argmax(t))
            .count();
        Some(hits as f64 / n_rows)
    } else {
        None
    };

    Ok((
        net,
        TrainReport {
            final_mse,
            accuracy,
            epochs_run: epochs,
        },
    ))
}
