//! Probabilistic neural network: a Parzen-window density per class with a
//! Bayes decision weighted by priors and misclassification costs.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{check_dim, sq_dist, Classifier, ClassifierKind};
use crate::dataset_io::TrainingSet;
use crate::error::{Error, Result};
use crate::tissue::{Tissue, NUM_TISSUES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PnnConfig {
    pub sigma: f64,
}

impl Default for PnnConfig {
    fn default() -> Self {
        PnnConfig { sigma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnnModel {
    dim: usize,
    sigma: f64,
    priors: [f64; NUM_TISSUES],
    costs: [f64; NUM_TISSUES],
    /// Stored patterns per class, flattened row-major.
    patterns: [Vec<f64>; NUM_TISSUES],
}

impl PnnModel {
    /// Builds a model with uniform priors and unit costs from per-class
    /// pattern lists of any dimension.
    pub fn from_patterns(sigma: f64, patterns: [Vec<Vec<f64>>; NUM_TISSUES]) -> Result<Self> {
        let dim = patterns
            .iter()
            .flatten()
            .map(Vec::len)
            .next()
            .ok_or(Error::EmptyClass(Tissue::Background))?;
        let mut flat: [Vec<f64>; NUM_TISSUES] = Default::default();
        for (slot, class) in flat.iter_mut().zip(&patterns) {
            for p in class {
                check_dim(dim, p)?;
                slot.extend_from_slice(p);
            }
        }
        let model = PnnModel {
            dim,
            sigma,
            priors: [1.0 / NUM_TISSUES as f64; NUM_TISSUES],
            costs: [1.0; NUM_TISSUES],
            patterns: flat,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_priors_and_costs(
        mut self,
        priors: [f64; NUM_TISSUES],
        costs: [f64; NUM_TISSUES],
    ) -> Result<Self> {
        self.priors = priors;
        self.costs = costs;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "PNN sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidConfig("PNN dimension is zero".into()));
        }
        for t in Tissue::ALL {
            let p = &self.patterns[t.index()];
            if p.is_empty() {
                return Err(Error::EmptyClass(t));
            }
            if p.len() % self.dim != 0 || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::ModelLoad(format!("malformed patterns for {t}")));
            }
        }
        let prior_sum: f64 = self.priors.iter().sum();
        if self.priors.iter().any(|p| !(*p >= 0.0)) || (prior_sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("PNN priors must sum to 1".into()));
        }
        if self.costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidConfig("PNN costs must be non-negative".into()));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pattern_count(&self, class: Tissue) -> usize {
        self.patterns[class.index()].len() / self.dim
    }

    /// Gaussian normalizer `1 / ((2 pi)^(n/2) sigma^n)`.
    fn normalizer(&self) -> f64 {
        let n = self.dim as f64;
        1.0 / (TAU.powf(n / 2.0) * self.sigma.powf(n))
    }

    /// Parzen density of `class` at `x`:
    /// `normalizer * mean_i exp(-|x - x_i|^2 / (2 sigma^2))`.
    pub fn class_pdf(&self, class: Tissue, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let patterns = &self.patterns[class.index()];
        if patterns.is_empty() {
            return Err(Error::UnknownClass(class.to_string()));
        }
        let two_s2 = 2.0 * self.sigma * self.sigma;
        let sum: f64 = patterns
            .chunks_exact(self.dim)
            .map(|p| (-sq_dist(x, p) / two_s2).exp())
            .sum();
        let m = (patterns.len() / self.dim) as f64;
        Ok(self.normalizer() * sum / m)
    }

    /// Class of the stored pattern closest to `x`; ties go to the lower code.
    fn nearest_pattern_class(&self, x: &[f64]) -> Tissue {
        let mut best = (f64::INFINITY, Tissue::Background);
        for t in Tissue::ALL {
            for p in self.patterns[t.index()].chunks_exact(self.dim) {
                let d = sq_dist(x, p);
                if d < best.0 {
                    best = (d, t);
                }
            }
        }
        best.1
    }
}

impl Classifier for PnnModel {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Pnn
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// Argmax of `prior * cost * density`, lowest code on ties. When every
    /// density underflows to zero the nearest stored pattern decides.
    fn predict(&self, x: &[f64]) -> Result<Tissue> {
        let mut best: Option<(f64, Tissue)> = None;
        for t in Tissue::ALL {
            let score = self.priors[t.index()] * self.costs[t.index()] * self.class_pdf(t, x)?;
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, t));
            }
        }
        match best {
            Some((score, t)) if score > 0.0 => Ok(t),
            _ => Ok(self.nearest_pattern_class(x)),
        }
    }
}

pub fn train_pnn(ts: &TrainingSet, config: &PnnConfig) -> Result<PnnModel> {
    let mut patterns: [Vec<Vec<f64>>; NUM_TISSUES] = Default::default();
    for (f, t) in ts.features.iter().zip(&ts.labels) {
        patterns[t.index()].push(f.to_vec());
    }
    if let Some(t) = Tissue::ALL.into_iter().find(|t| patterns[t.index()].is_empty()) {
        return Err(Error::EmptyClass(t));
    }
    PnnModel::from_patterns(config.sigma, patterns)
}
