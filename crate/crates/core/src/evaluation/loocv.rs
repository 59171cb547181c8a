//! Leave-one-out cross-validation over a labeled dataset.
//!
//! Features are extracted once per image and each image is sampled once,
//! with a seed derived from the base seed and the image's position. Fold
//! `i` pools the samples of every other image in dataset order, fits the
//! z-score statistics on that pool, trains, and segments image `i`. No
//! pixel of the held-out image reaches the statistics or the model.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::score_segmentation;
use super::report::{EvalReport, FoldScore};
use crate::classifiers::{segment_image, train, ClassifierConfig, ClassifierKind, Model};
use crate::dataset_io::{sample_training_points, Dataset, LabelMap, TrainingSet};
use crate::error::{Error, Result};
use crate::gabor::{build_filter_bank, extract_features, fit_stats, FeatureGrid, FeatureStats, GaborConfig};
use crate::hybrid::{derive_rule_table, hybrid_segment, RuleTable};
use crate::rng::derive_seed;

/// Everything that determines an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Training pixels drawn per tissue from each image.
    pub per_class: usize,
    pub seed: u64,
    pub gabor: GaborConfig,
    pub classifiers: ClassifierConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            per_class: 20,
            seed: 0,
            gabor: GaborConfig::default(),
            classifiers: ClassifierConfig::default(),
        }
    }
}

/// An image with its features, ground truth and training sample.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub id: String,
    pub features: FeatureGrid,
    pub truth: LabelMap,
    pub samples: TrainingSet,
}

#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub items: Vec<PreparedImage>,
}

/// Seed used to sample the image at `index`.
pub fn sampling_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

pub fn prepare_dataset(dataset: &Dataset, gabor: &GaborConfig, per_class: usize, seed: u64) -> Result<PreparedDataset> {
    let bank = build_filter_bank(gabor)?;
    let items = dataset
        .items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let features = extract_features(&item.image, &bank)?;
            let samples = sample_training_points(
                &features,
                &item.labels,
                per_class,
                sampling_seed(seed, i),
                &item.id,
            )?;
            Ok(PreparedImage {
                id: item.id.clone(),
                features,
                truth: item.labels.clone(),
                samples,
            })
        })
        .zip(dataset.items.par_iter())
        .map(|(r, item): (Result<PreparedImage>, _)| r.map_err(|e| e.in_entry(&item.id)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedDataset { items })
}

/// Fits statistics on raw rows, normalizes them and trains `kind`.
pub fn train_on_pool(pool: &TrainingSet, kind: ClassifierKind, config: &ClassifierConfig) -> Result<(FeatureStats, Model)> {
    let stats = fit_stats(pool)?;
    let model = train(kind, &stats.normalize_training_set(pool), config)?;
    Ok((stats, model))
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Samples of every image except `fold`, in dataset order.
    pub fn training_pool(&self, fold: usize) -> TrainingSet {
        TrainingSet::concat(
            self.items
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != fold)
                .map(|(_, it)| &it.samples),
        )
    }

    /// Samples of every image, in dataset order.
    pub fn full_pool(&self) -> TrainingSet {
        TrainingSet::concat(self.items.iter().map(|it| &it.samples))
    }

    pub fn train_fold(&self, fold: usize, kind: ClassifierKind, config: &ClassifierConfig) -> Result<(FeatureStats, Model)> {
        train_on_pool(&self.training_pool(fold), kind, config).map_err(|e| e.in_fold(fold))
    }
}

/// Per-fold segmentations of the held-out image, by classifier.
pub type FoldPredictions = BTreeMap<ClassifierKind, LabelMap>;

/// Reports for several classifiers evaluated on the same folds.
#[derive(Debug, Clone)]
pub struct LoocvRun {
    pub reports: Vec<EvalReport>,
    pub predictions: Vec<FoldPredictions>,
}

pub fn run_loocv(dataset: &Dataset, kind: ClassifierKind, config: &EvalConfig) -> Result<EvalReport> {
    let prepared = prepare_dataset(dataset, &config.gabor, config.per_class, config.seed)?;
    let mut run = run_loocv_prepared(&prepared, &[kind], &config.classifiers)?;
    Ok(run.reports.remove(0))
}

/// Runs every fold for each of `kinds`. Folds may execute in parallel; the
/// result is ordered by fold index and independent of scheduling.
pub fn run_loocv_prepared(
    prepared: &PreparedDataset,
    kinds: &[ClassifierKind],
    config: &ClassifierConfig,
) -> Result<LoocvRun> {
    if prepared.len() < 2 {
        return Err(Error::EmptyDataset(format!(
            "leave-one-out needs at least 2 images, found {}",
            prepared.len()
        )));
    }
    if kinds.is_empty() {
        return Err(Error::InvalidConfig("no classifiers requested".into()));
    }
    let folds = (0..prepared.len())
        .into_par_iter()
        .map(|fold| run_fold(prepared, fold, kinds, config).map_err(|e| e.in_fold(fold)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut per_kind: Vec<Vec<FoldScore>> = vec![Vec::new(); kinds.len()];
    let mut predictions = Vec::with_capacity(folds.len());
    for fold in folds {
        let mut maps = FoldPredictions::new();
        for (slot, (kind, score, map)) in per_kind.iter_mut().zip(fold) {
            slot.push(score);
            maps.insert(kind, map);
        }
        predictions.push(maps);
    }
    let reports = kinds
        .iter()
        .zip(per_kind)
        .map(|(k, f)| EvalReport::for_classifier(*k, f))
        .collect();
    Ok(LoocvRun { reports, predictions })
}

fn run_fold(
    prepared: &PreparedDataset,
    fold: usize,
    kinds: &[ClassifierKind],
    config: &ClassifierConfig,
) -> Result<Vec<(ClassifierKind, FoldScore, LabelMap)>> {
    let pool = prepared.training_pool(fold);
    let stats = fit_stats(&pool)?;
    let normalized = stats.normalize_training_set(&pool);
    let test = &prepared.items[fold];
    kinds
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let model = train(kind, &normalized, config)?;
            let map = segment_image(&test.features, &stats, &model)?;
            let scores = score_segmentation(&map, &test.truth)?;
            let score = FoldScore {
                fold,
                image_id: test.id.clone(),
                train_rows: pool.len(),
                scores,
                runtime: start.elapsed(),
            };
            Ok((kind, score, map))
        })
        .collect()
}

/// All four classifiers, the rule table derived from their mean scores,
/// and the hybrid segmentation scored on the same folds.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub reports: Vec<EvalReport>,
    pub rules: RuleTable,
    pub hybrid: EvalReport,
    pub predictions: Vec<FoldPredictions>,
}

impl Comparison {
    pub fn report(&self, kind: ClassifierKind) -> &EvalReport {
        self.reports
            .iter()
            .find(|r| r.classifier == Some(kind))
            .expect("comparison covers every classifier")
    }

    /// Classifier reports followed by the hybrid report.
    pub fn all_reports(&self) -> Vec<EvalReport> {
        let mut all = self.reports.clone();
        all.push(self.hybrid.clone());
        all
    }
}

pub fn run_comparison(prepared: &PreparedDataset, config: &ClassifierConfig) -> Result<Comparison> {
    let run = run_loocv_prepared(prepared, &ClassifierKind::ALL, config)?;
    let rules = derive_rule_table(&super::score_matrix(&run.reports))?;
    let hybrid_folds = run
        .predictions
        .iter()
        .enumerate()
        .map(|(fold, maps)| {
            let start = Instant::now();
            let test = &prepared.items[fold];
            let fused = hybrid_segment(maps, &rules).map_err(|e| e.in_fold(fold))?;
            let scores = score_segmentation(&fused, &test.truth)?;
            Ok(FoldScore {
                fold,
                image_id: test.id.clone(),
                train_rows: run.reports[0].folds[fold].train_rows,
                scores,
                runtime: start.elapsed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        reports: run.reports,
        rules,
        hybrid: EvalReport::hybrid(hybrid_folds),
        predictions: run.predictions,
    })
}
