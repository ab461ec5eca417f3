//! Built-in black-box testbed models: the three analytic archetypes
//! (weighted sum, rule-based step surface, smooth non-linear demo), a small
//! sigmoid MLP with a plain gradient-descent trainer, and a k-nearest-
//! neighbors model. All are immutable once built and safe to evaluate
//! concurrently.

mod analytic;
mod knn;
mod mlp;
mod persist;

pub use analytic::{LinearModel, NonlinearDemoModel, RuleStepModel};
pub use knn::{knn_predict, KnnModel, KnnTask};
pub use mlp::{train_mlp, SmallMlp, TrainReport};
pub use persist::{load_model, save_model, ModelFile, ModelSpec};
