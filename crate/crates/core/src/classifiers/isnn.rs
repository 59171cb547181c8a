//! Incremental supervised neural network.
//!
//! A prototype classifier in the LVQ family: the winning node is pulled
//! toward a sample of its own class, and a sample whose nearest node
//! belongs to another class becomes a new node instead of pushing the
//! winner away.

use serde::{Deserialize, Serialize};

use super::{check_dim, sq_dist, Classifier, ClassifierKind};
use crate::dataset_io::TrainingSet;
use crate::error::{Error, Result};
use crate::tissue::{Tissue, NUM_TISSUES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsnnConfig {
    pub mu: f64,
    pub epochs: usize,
}

impl Default for IsnnConfig {
    fn default() -> Self {
        IsnnConfig { mu: 0.1, epochs: 1 }
    }
}

impl IsnnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ISNN learning rate must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("ISNN needs at least one epoch".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsnnNode {
    pub weight: Vec<f64>,
    pub class: Tissue,
    pub insertion_index: usize,
}

/// Outcome of presenting one sample during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsnnStep {
    /// The nearest node had the sample's class and was moved toward it.
    Matched { node: usize },
    /// The nearest node had another class; the sample was appended as `node`.
    Inserted { node: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsnnModel {
    dim: usize,
    mu: f64,
    epochs: usize,
    nodes: Vec<IsnnNode>,
}

impl IsnnModel {
    /// Seeds one node per class present, using each class's first row.
    pub fn initialize(ts: &TrainingSet, config: &IsnnConfig) -> Result<Self> {
        config.validate()?;
        if ts.is_empty() {
            return Err(Error::EmptyDataset("ISNN training set is empty".into()));
        }
        let mut seen = [false; NUM_TISSUES];
        let mut nodes = Vec::new();
        for (f, t) in ts.features.iter().zip(&ts.labels) {
            if !seen[t.index()] {
                seen[t.index()] = true;
                nodes.push(IsnnNode {
                    weight: f.to_vec(),
                    class: *t,
                    insertion_index: nodes.len(),
                });
            }
        }
        Ok(IsnnModel {
            dim: crate::FEATURE_DIM,
            mu: config.mu,
            epochs: config.epochs,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[IsnnNode] {
        &self.nodes
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Index of the nearest node; the earlier insertion wins ties.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim, x)?;
        let mut best = (f64::INFINITY, 0);
        for (i, n) in self.nodes.iter().enumerate() {
            let d = sq_dist(x, &n.weight);
            if d < best.0 {
                best = (d, i);
            }
        }
        if self.nodes.is_empty() {
            return Err(Error::UnknownClass("ISNN has no nodes".into()));
        }
        Ok(best.1)
    }

    /// Presents one labeled sample.
    pub fn learn(&mut self, x: &[f64], class: Tissue) -> Result<IsnnStep> {
        let win = self.nearest(x)?;
        if self.nodes[win].class == class {
            let mu = self.mu;
            for (w, xi) in self.nodes[win].weight.iter_mut().zip(x) {
                *w += mu * (xi - *w);
            }
            Ok(IsnnStep::Matched { node: win })
        } else {
            let node = self.nodes.len();
            self.nodes.push(IsnnNode {
                weight: x.to_vec(),
                class,
                insertion_index: node,
            });
            Ok(IsnnStep::Inserted { node })
        }
    }

    pub fn validate(&self) -> Result<()> {
        IsnnConfig {
            mu: self.mu,
            epochs: self.epochs,
        }
        .validate()?;
        if self.nodes.is_empty() {
            return Err(Error::ModelLoad("ISNN model has no nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.weight.len() != self.dim || n.insertion_index != i {
                return Err(Error::ModelLoad(format!("ISNN node {i} is malformed")));
            }
        }
        Ok(())
    }
}

impl Classifier for IsnnModel {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Isnn
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<Tissue> {
        Ok(self.nodes[self.nearest(x)?].class)
    }
}

/// Runs `epochs` passes over the rows in order.
pub fn train_isnn(ts: &TrainingSet, config: &IsnnConfig) -> Result<IsnnModel> {
    let mut model = IsnnModel::initialize(ts, config)?;
    for _ in 0..config.epochs {
        for (f, t) in ts.features.iter().zip(&ts.labels) {
            model.learn(f, *t)?;
        }
    }
    Ok(model)
}
