//! Model persistence: a self-describing JSON file holding the model kind,
//! its parameters and the input/output descriptors it was built for.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};
use crate::models::{KnnModel, LinearModel, NonlinearDemoModel, RuleStepModel, SmallMlp};
use crate::types::{BlackBoxModel, InputDescriptor, OutputDescriptor, Problem};

/// Kind tag plus parameters for every built-in model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Linear(LinearModel),
    RuleStep(RuleStepModel),
    NonlinearDemo,
    Mlp(SmallMlp),
    Knn(KnnModel),
}

impl ModelSpec {
    /// Materialize the described model.
    pub fn into_model(self) -> Arc<dyn BlackBoxModel> {
        match self {
            ModelSpec::Linear(m) => Arc::new(m),
            ModelSpec::RuleStep(m) => Arc::new(m),
            ModelSpec::NonlinearDemo => Arc::new(NonlinearDemoModel::new()),
            ModelSpec::Mlp(m) => Arc::new(m),
            ModelSpec::Knn(m) => Arc::new(m),
        }
    }
}

/// On-disk representation: format marker, model, and the descriptor ranges
/// the model expects. See the repository README for the documented schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub model: ModelSpec,
    pub inputs: Vec<InputDescriptor>,
    pub outputs: Vec<OutputDescriptor>,
}

pub const MODEL_FORMAT: &str = "ciu-model/1";

impl ModelFile {
    pub fn new(
        model: ModelSpec,
        inputs: Vec<InputDescriptor>,
        outputs: Vec<OutputDescriptor>,
    ) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            model,
            inputs,
            outputs,
        }
    }

    /// Rebuild a validated problem handle from the file contents.
    pub fn into_problem(self) -> Result<Problem> {
        Problem::new(self.model.into_model(), self.inputs, self.outputs)
    }
}

/// Write a model file as pretty-printed JSON.
pub fn save_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(file)?;
    fs::write(path, json)?;
    Ok(())
}

/// Read and validate a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| CiuError::ModelFile(format!("{}: {e}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CiuError::ModelFile(format!("{}: {e}", path.display())))?;
    if file.format != MODEL_FORMAT {
        return Err(CiuError::ModelFile(format!(
            "{}: unsupported format `{}`, expected `{MODEL_FORMAT}`",
            path.display(),
            file.format
        )));
    }
    Ok(file)
}
