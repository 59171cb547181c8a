//! k-nearest-neighbor majority vote.

use serde::{Deserialize, Serialize};

use super::{check_dim, sq_dist, Classifier, ClassifierKind};
use crate::dataset_io::TrainingSet;
use crate::error::{Error, Result};
use crate::tissue::{Tissue, NUM_TISSUES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    dim: usize,
    k: usize,
    points: Vec<f64>,
    labels: Vec<Tissue>,
}

impl KnnModel {
    pub fn new(dim: usize, k: usize, points: Vec<f64>, labels: Vec<Tissue>) -> Result<Self> {
        let model = KnnModel {
            dim,
            k,
            points,
            labels,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.points.len() != self.dim * self.labels.len() {
            return Err(Error::ModelLoad(
                "KNN points do not match labels and dimension".into(),
            ));
        }
        if self.k == 0 || self.k > self.labels.len() {
            return Err(Error::InvalidK {
                k: self.k,
                points: self.labels.len(),
            });
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `k` nearest rows as `(squared distance, row)`, ordered by
    /// distance then row index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<(f64, usize)>> {
        check_dim(self.dim, x)?;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, p) in self.points.chunks_exact(self.dim).enumerate() {
            let d = sq_dist(x, p);
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            // rows arrive in index order, so equal distances stay behind earlier rows
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        Ok(best)
    }
}

impl Classifier for KnnModel {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Knn
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// Majority vote; tied classes are separated by their closest member,
    /// then by lowest code.
    fn predict(&self, x: &[f64]) -> Result<Tissue> {
        let mut votes = [0usize; NUM_TISSUES];
        let mut closest = [f64::INFINITY; NUM_TISSUES];
        for (d, i) in self.neighbors(x)? {
            let c = self.labels[i].index();
            votes[c] += 1;
            closest[c] = closest[c].min(d);
        }
        let winner = Tissue::ALL
            .into_iter()
            .filter(|t| votes[t.index()] > 0)
            .min_by(|a, b| {
                votes[b.index()]
                    .cmp(&votes[a.index()])
                    .then(closest[a.index()].total_cmp(&closest[b.index()]))
                    .then(a.cmp(b))
            })
            .expect("k >= 1 guarantees a vote");
        Ok(winner)
    }
}

pub fn train_knn(ts: &TrainingSet, config: &KnnConfig) -> Result<KnnModel> {
    if config.k == 0 || config.k > ts.len() {
        return Err(Error::InvalidK {
            k: config.k,
            points: ts.len(),
        });
    }
    let points = ts.features.iter().flatten().copied().collect();
    KnnModel::new(crate::FEATURE_DIM, config.k, points, ts.labels.clone())
}
