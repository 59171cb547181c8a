//! Per-tissue precision, recall and F-measure, leave-one-out evaluation
//! and comparison reports.

mod loocv;
mod metrics;
mod report;

use std::collections::BTreeMap;

pub use loocv::{
    prepare_dataset, run_comparison, run_loocv, run_loocv_prepared, sampling_seed, train_on_pool,
    Comparison, EvalConfig, FoldPredictions, LoocvRun, PreparedDataset, PreparedImage,
};
pub use metrics::{
    confusion_counts, f_measure, precision, recall, score_segmentation, ConfusionCounts,
    TissueScore,
};
pub use report::{
    aggregate_reports, reports_to_csv, write_reports_csv, ComparisonRow, ComparisonTable,
    EvalReport, EvalSummary, FoldScore, HYBRID_LABEL, SUMMARY_FORMAT, SUMMARY_VERSION,
};

use crate::classifiers::ClassifierKind;
use crate::tissue::PerTissue;

/// Mean F per classifier and tissue, as consumed by the rule table.
pub fn score_matrix(reports: &[EvalReport]) -> BTreeMap<ClassifierKind, PerTissue<f64>> {
    reports
        .iter()
        .filter_map(|r| r.classifier.map(|k| (k, r.mean_f_per_tissue())))
        .collect()
}
