use serde::{Deserialize, Serialize};

use super::features::FeatureGrid;
use crate::dataset_io::TrainingSet;
use crate::error::{Error, Result};
use crate::{FeatureVector, FEATURE_DIM};

/// Smallest standard deviation used as a divisor.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-dimension z-score parameters fitted on training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: FeatureVector,
    pub std: FeatureVector,
}

impl FeatureStats {
    /// Identity transform (mean 0, std 1).
    pub fn identity() -> Self {
        FeatureStats {
            mean: [0.0; FEATURE_DIM],
            std: [1.0; FEATURE_DIM],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s >= STD_FLOOR)
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "feature stats need finite means and std >= 1e-12".into(),
            ))
        }
    }

    pub fn normalize(&self, v: &FeatureVector) -> FeatureVector {
        std::array::from_fn(|d| (v[d] - self.mean[d]) / self.std[d])
    }

    pub fn normalize_grid(&self, grid: &FeatureGrid) -> FeatureGrid {
        let mut out = grid.clone();
        out.values_mut()
            .iter_mut()
            .for_each(|v| *v = self.normalize(v));
        out
    }

    pub fn normalize_training_set(&self, ts: &TrainingSet) -> TrainingSet {
        let mut out = ts.clone();
        out.features.iter_mut().for_each(|v| *v = self.normalize(v));
        out
    }
}

/// Population mean and standard deviation per dimension. Computed relative
/// to the first row so a constant column yields exactly its value and zero
/// spread.
pub fn fit_stats(ts: &TrainingSet) -> Result<FeatureStats> {
    let rows = &ts.features;
    let first = rows
        .first()
        .ok_or_else(|| Error::EmptyDataset("cannot fit feature stats on zero rows".into()))?;
    let n = rows.len() as f64;
    let mut mean = [0.0; FEATURE_DIM];
    let mut std = [0.0; FEATURE_DIM];
    for d in 0..FEATURE_DIM {
        let shift = first[d];
        let (s1, s2) = rows.iter().fold((0.0, 0.0), |(a, b), r| {
            let v = r[d] - shift;
            (a + v, b + v * v)
        });
        let m = s1 / n;
        mean[d] = shift + m;
        std[d] = (s2 / n - m * m).max(0.0).sqrt().max(STD_FLOOR);
    }
    Ok(FeatureStats { mean, std })
}
