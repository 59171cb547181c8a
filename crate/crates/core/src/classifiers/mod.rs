//! The four pixel classifiers behind one train/predict interface.
//!
//! All models consume feature vectors that have already been z-scored with
//! the [`FeatureStats`] fitted on the same training rows.

mod isnn;
mod knn;
mod persist;
mod pnn;
pub mod smo;
mod svm;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use isnn::{train_isnn, IsnnConfig, IsnnModel, IsnnNode, IsnnStep};
pub use knn::{train_knn, KnnConfig, KnnModel};
pub use persist::{load_model, save_model, ModelFile, MODEL_FORMAT, MODEL_VERSION};
pub use pnn::{train_pnn, PnnConfig, PnnModel};
pub use svm::{
    iteration_cap, train_binary, train_svm, train_svm_with_diagnostics, BinarySvm, Kernel,
    PairDiagnostics, SvmConfig, SvmModel, BALANCE_TOLERANCE, SUPPORT_THRESHOLD,
};

use crate::dataset_io::{LabelMap, TrainingSet};
use crate::error::{Error, Result};
use crate::gabor::{FeatureGrid, FeatureStats};
use crate::tissue::Tissue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Pnn,
    Knn,
    Isnn,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Pnn,
        ClassifierKind::Knn,
        ClassifierKind::Isnn,
        ClassifierKind::Svm,
    ];

    /// Tie-break rank: SVM first, then ISNN, PNN, KNN.
    pub fn precedence(self) -> u8 {
        match self {
            ClassifierKind::Svm => 0,
            ClassifierKind::Isnn => 1,
            ClassifierKind::Pnn => 2,
            ClassifierKind::Knn => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Pnn => "PNN",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Isnn => "ISNN",
            ClassifierKind::Svm => "SVM",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier `{s}`")))
    }
}

pub trait Classifier: Send + Sync {
    fn kind(&self) -> ClassifierKind;
    fn dim(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Result<Tissue>;
}

pub(crate) fn check_dim(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: (dim, 1),
            found: (x.len(), 1),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("feature vector is not finite".into()));
    }
    Ok(())
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Hyperparameters for all four classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub pnn: PnnConfig,
    pub knn: KnnConfig,
    pub isnn: IsnnConfig,
    pub svm: SvmConfig,
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Model {
    Pnn(PnnModel),
    Knn(KnnModel),
    Isnn(IsnnModel),
    Svm(SvmModel),
}

impl Model {
    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Pnn(m) => m,
            Model::Knn(m) => m,
            Model::Isnn(m) => m,
            Model::Svm(m) => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Pnn(m) => m.validate(),
            Model::Knn(m) => m.validate(),
            Model::Isnn(m) => m.validate(),
            Model::Svm(m) => m.validate(),
        }
    }
}

impl Classifier for Model {
    fn kind(&self) -> ClassifierKind {
        self.inner().kind()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn predict(&self, x: &[f64]) -> Result<Tissue> {
        self.inner().predict(x)
    }
}

/// Trains `kind` on already-normalized rows.
pub fn train(kind: ClassifierKind, ts: &TrainingSet, config: &ClassifierConfig) -> Result<Model> {
    if ts.is_empty() {
        return Err(Error::EmptyDataset("training set has no rows".into()));
    }
    Ok(match kind {
        ClassifierKind::Pnn => Model::Pnn(train_pnn(ts, &config.pnn)?),
        ClassifierKind::Knn => Model::Knn(train_knn(ts, &config.knn)?),
        ClassifierKind::Isnn => Model::Isnn(train_isnn(ts, &config.isnn)?),
        ClassifierKind::Svm => Model::Svm(train_svm(ts, &config.svm)?),
    })
}

/// Normalizes every pixel's features with `stats` and predicts its tissue.
pub fn segment_image(
    grid: &FeatureGrid,
    stats: &FeatureStats,
    model: &dyn Classifier,
) -> Result<LabelMap> {
    let width = grid.width();
    let labels = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            model
                .predict(&stats.normalize(v))
                .map_err(|e| Error::Pixel {
                    x: i % width,
                    y: i / width,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMap::new(grid.width(), grid.height(), labels)
}
