use crate::error::{Error, Result};
use crate::gabor::FeatureGrid;
use crate::rng::Rng;
use crate::tissue::Tissue;
use crate::FeatureVector;

use super::image::LabelMap;

/// Where a training row came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSource {
    pub image_id: String,
    pub x: usize,
    pub y: usize,
}

/// Labeled feature rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<Tissue>,
    pub sources: Vec<SampleSource>,
}

impl TrainingSet {
    pub fn new(
        features: Vec<FeatureVector>,
        labels: Vec<Tissue>,
        sources: Vec<SampleSource>,
    ) -> Result<Self> {
        if features.len() != labels.len() || labels.len() != sources.len() {
            return Err(Error::InvalidConfig(format!(
                "training set columns disagree: {} rows, {} labels, {} sources",
                features.len(),
                labels.len(),
                sources.len()
            )));
        }
        Ok(TrainingSet {
            features,
            labels,
            sources,
        })
    }

    /// Rows without provenance, tagged with a synthetic id.
    pub fn from_rows(rows: Vec<(FeatureVector, Tissue)>) -> Self {
        let sources = (0..rows.len())
            .map(|i| SampleSource {
                image_id: "synthetic".into(),
                x: i,
                y: 0,
            })
            .collect();
        let (features, labels) = rows.into_iter().unzip();
        TrainingSet {
            features,
            labels,
            sources,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 5] {
        let mut c = [0; 5];
        for t in &self.labels {
            c[t.index()] += 1;
        }
        c
    }

    /// Appends all rows of `other`.
    pub fn extend(&mut self, other: &TrainingSet) {
        self.features.extend_from_slice(&other.features);
        self.labels.extend_from_slice(&other.labels);
        self.sources.extend_from_slice(&other.sources);
    }

    /// Concatenates sets in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a TrainingSet>) -> TrainingSet {
        let mut out = TrainingSet::default();
        for p in parts {
            out.extend(p);
        }
        out
    }
}

/// Draws `per_class` pixels of every tissue without replacement.
///
/// Tissues are visited in code order. For each, the candidate pixels are
/// listed in row-major order and the first `per_class` positions of a
/// partial Fisher–Yates shuffle (`j = i + below(n - i)`) are taken, all from
/// one stream seeded with `seed`. Rows are grouped by tissue in draw order.
pub fn sample_training_points(
    features: &FeatureGrid,
    labels: &LabelMap,
    per_class: usize,
    seed: u64,
    image_id: &str,
) -> Result<TrainingSet> {
    if per_class == 0 {
        return Err(Error::InvalidConfig("per_class must be at least 1".into()));
    }
    if features.dims() != labels.dims() {
        return Err(Error::DimensionMismatch {
            expected: labels.dims(),
            found: features.dims(),
        });
    }
    let width = labels.width();
    let mut by_tissue: [Vec<usize>; 5] = Default::default();
    for (i, t) in labels.labels().iter().enumerate() {
        by_tissue[t.index()].push(i);
    }
    for t in Tissue::ALL {
        let available = by_tissue[t.index()].len();
        if available < per_class {
            return Err(Error::InsufficientPixels {
                tissue: t,
                available,
                requested: per_class,
            });
        }
    }

    let mut rng = Rng::new(seed);
    let mut out = TrainingSet::default();
    for t in Tissue::ALL {
        let pool = &mut by_tissue[t.index()];
        let n = pool.len();
        for i in 0..per_class {
            let j = i + rng.below((n - i) as u64) as usize;
            pool.swap(i, j);
            let p = pool[i];
            out.features.push(features.values()[p]);
            out.labels.push(t);
            out.sources.push(SampleSource {
                image_id: image_id.to_string(),
                x: p % width,
                y: p / width,
            });
        }
    }
    Ok(out)
}
