//! Run configuration: built-in defaults, overridden by a JSON file,
//! overridden by command-line flags.

use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use mriseg::classifiers::{ClassifierConfig, ClassifierKind, Kernel};
use mriseg::dataset_io::PhantomConfig;
use mriseg::fsutil::read_file;
use mriseg::gabor::GaborConfig;
use mriseg::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub classifier: ClassifierKind,
    pub classifiers: ClassifierConfig,
    pub gabor: GaborConfig,
    /// Training pixels drawn per tissue from each image.
    pub per_class: usize,
    pub seed: u64,
    pub phantom: PhantomConfig,
    pub emit_overlays: bool,
    pub emit_feature_dumps: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            classifier: ClassifierKind::Svm,
            classifiers: ClassifierConfig::default(),
            gabor: GaborConfig::default(),
            per_class: 20,
            seed: 0,
            phantom: PhantomConfig::default(),
            emit_overlays: false,
            emit_feature_dumps: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Pnn,
    Knn,
    Isnn,
    Svm,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pnn => ClassifierKind::Pnn,
            KindArg::Knn => ClassifierKind::Knn,
            KindArg::Isnn => ClassifierKind::Isnn,
            KindArg::Svm => ClassifierKind::Svm,
        }
    }
}

/// Flags shared by every subcommand. Each one, when given, replaces the
/// corresponding value from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Base random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Training pixels per tissue and image
    #[arg(long, global = true)]
    pub per_class: Option<usize>,
    /// Classifier for train and evaluate
    #[arg(long, global = true, value_enum)]
    pub classifier: Option<KindArg>,
    /// PNN smoothing parameter
    #[arg(long, global = true)]
    pub pnn_sigma: Option<f64>,
    /// KNN neighbor count
    #[arg(long, global = true)]
    pub knn_k: Option<usize>,
    /// ISNN learning rate
    #[arg(long, global = true)]
    pub isnn_mu: Option<f64>,
    /// ISNN passes over the training rows
    #[arg(long, global = true)]
    pub isnn_epochs: Option<usize>,
    /// SVM box constraint
    #[arg(long, global = true)]
    pub svm_c: Option<f64>,
    /// SVM kernel
    #[arg(long, global = true, value_enum)]
    pub svm_kernel: Option<KernelArg>,
    /// RBF kernel width (implies the RBF kernel)
    #[arg(long, global = true)]
    pub svm_gamma: Option<f64>,
    /// Phantom image side in pixels
    #[arg(long, global = true)]
    pub size: Option<usize>,
    /// Phantom noise standard deviation
    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,
    /// Write color overlays next to label maps
    #[arg(long, global = true)]
    pub overlays: bool,
    /// Write per-channel feature images
    #[arg(long, global = true)]
    pub feature_dumps: bool,
}

impl RunConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::InvalidConfig(format!("config file: {e}")))
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => Self::from_json(&read_file(Path::new(path))?)?,
            None => RunConfig::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, f: &Overrides) {
        if let Some(v) = f.seed {
            self.seed = v;
            self.phantom.seed = v;
        }
        if let Some(v) = f.per_class {
            self.per_class = v;
        }
        if let Some(v) = f.classifier {
            self.classifier = v.into();
        }
        if let Some(v) = f.pnn_sigma {
            self.classifiers.pnn.sigma = v;
        }
        if let Some(v) = f.knn_k {
            self.classifiers.knn.k = v;
        }
        if let Some(v) = f.isnn_mu {
            self.classifiers.isnn.mu = v;
        }
        if let Some(v) = f.isnn_epochs {
            self.classifiers.isnn.epochs = v;
        }
        if let Some(v) = f.svm_c {
            self.classifiers.svm.c = v;
        }
        match (f.svm_kernel, f.svm_gamma) {
            (Some(KernelArg::Linear), _) => self.classifiers.svm.kernel = Kernel::Linear,
            (_, Some(gamma)) => self.classifiers.svm.kernel = Kernel::Rbf { gamma },
            (Some(KernelArg::Rbf), None) => {
                if self.classifiers.svm.kernel == Kernel::Linear {
                    self.classifiers.svm.kernel = Kernel::Rbf {
                        gamma: 1.0 / mriseg::FEATURE_DIM as f64,
                    };
                }
            }
            (None, None) => {}
        }
        if let Some(v) = f.size {
            self.phantom.size = v;
        }
        if let Some(v) = f.noise_sigma {
            self.phantom.noise_sigma = v;
        }
        self.emit_overlays |= f.overlays;
        self.emit_feature_dumps |= f.feature_dumps;
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_class == 0 {
            return Err(Error::InvalidConfig("per_class must be at least 1".into()));
        }
        self.gabor.validate()?;
        self.phantom.validate()?;
        self.classifiers.svm.validate()?;
        self.classifiers.isnn.validate()?;
        if !(self.classifiers.pnn.sigma > 0.0 && self.classifiers.pnn.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "PNN sigma must be positive, got {}",
                self.classifiers.pnn.sigma
            )));
        }
        if self.classifiers.knn.k == 0 {
            return Err(Error::InvalidK {
                k: 0,
                points: 0,
            });
        }
        Ok(())
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}
