//! Versioned JSON model files.
//!
//! A model file carries everything needed to segment a new image: the
//! Gabor bank configuration, the z-score statistics, the hyperparameters
//! and the trained parameters.
//!
//! ```json
//! {"format": "mriseg-model", "version": 1, "gabor": {...}, "stats": {...},
//!  "config": {...}, "model": {"kind": "svm", "params": {...}}}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierConfig, Model};
use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_atomic};
use crate::gabor::{FeatureStats, GaborConfig};

pub const MODEL_FORMAT: &str = "mriseg-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub gabor: GaborConfig,
    pub stats: FeatureStats,
    pub config: ClassifierConfig,
    pub model: Model,
    /// Free-form record of the run that produced the model.
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl ModelFile {
    pub fn new(gabor: GaborConfig, stats: FeatureStats, config: ClassifierConfig, model: Model) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            gabor,
            stats,
            config,
            model,
            provenance: serde_json::Value::Null,
        }
    }

    pub fn model_kind(&self) -> super::ClassifierKind {
        self.model.kind()
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let load_err = |e: Error| Error::ModelLoad(e.to_string());
        if self.format != MODEL_FORMAT {
            return Err(Error::ModelLoad(format!("unexpected format `{}`", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::ModelLoad(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        self.gabor.validate().map_err(load_err)?;
        self.stats.validate().map_err(load_err)?;
        self.model.validate().map_err(|e| match e {
            Error::ModelLoad(_) => e,
            other => load_err(other),
        })?;
        if self.model.dim() != crate::FEATURE_DIM {
            return Err(Error::ModelLoad(format!(
                "model dimension {} differs from the feature dimension",
                self.model.dim()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_slice(bytes).map_err(|e| Error::ModelLoad(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    write_atomic(path, file.to_json()?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    ModelFile::from_json(&read_file(path)?)
}
