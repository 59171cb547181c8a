use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::metrics::TissueScore;
use crate::classifiers::ClassifierKind;
use crate::error::Result;
use crate::fsutil::write_atomic;
use crate::tissue::{PerTissue, Tissue};

/// Label used for the fused segmentation in reports.
pub const HYBRID_LABEL: &str = "HYBRID";

/// Scores of one held-out image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub image_id: String,
    pub train_rows: usize,
    pub scores: PerTissue<TissueScore>,
    /// Wall-clock time; kept out of serialized reports so they stay
    /// reproducible byte for byte.
    #[serde(skip)]
    pub runtime: Duration,
}

impl FoldScore {
    pub fn mean_f(&self) -> f64 {
        self.scores.iter().map(|(_, s)| s.f_measure).sum::<f64>() / Tissue::ALL.len() as f64
    }
}

/// Leave-one-out results of one method, ordered by fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `PNN`, `KNN`, `ISNN`, `SVM` or `HYBRID`.
    pub method: String,
    pub classifier: Option<ClassifierKind>,
    pub folds: Vec<FoldScore>,
}

impl EvalReport {
    pub fn for_classifier(kind: ClassifierKind, folds: Vec<FoldScore>) -> Self {
        EvalReport {
            method: kind.name().into(),
            classifier: Some(kind),
            folds,
        }
    }

    pub fn hybrid(folds: Vec<FoldScore>) -> Self {
        EvalReport {
            method: HYBRID_LABEL.into(),
            classifier: None,
            folds,
        }
    }

    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    /// Unweighted mean over folds of one tissue's F-measure.
    pub fn mean_f(&self, tissue: Tissue) -> f64 {
        mean(self.folds.iter().map(|f| f.scores[tissue].f_measure))
    }

    pub fn mean_f_per_tissue(&self) -> PerTissue<f64> {
        PerTissue::from_fn(|t| self.mean_f(t))
    }

    /// Fold mean of the per-image tissue-mean F-measure.
    pub fn overall_mean_f(&self) -> f64 {
        mean(self.folds.iter().map(FoldScore::mean_f))
    }

    pub fn total_runtime(&self) -> Duration {
        self.folds.iter().map(|f| f.runtime).sum()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// One row of the classifier comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub classifier: Option<ClassifierKind>,
    pub folds: usize,
    pub mean_f: PerTissue<f64>,
    pub overall_mean_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// Builds a table directly from mean scores, e.g. reference figures.
    pub fn from_scores(scores: &[(ClassifierKind, PerTissue<f64>)]) -> Self {
        let rows = scores
            .iter()
            .map(|(k, s)| ComparisonRow {
                method: k.name().into(),
                classifier: Some(*k),
                folds: 1,
                mean_f: *s,
                overall_mean_f: mean(s.iter().map(|(_, v)| *v)),
            })
            .collect();
        ComparisonTable { rows }
    }

    pub fn row(&self, method: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Methods ordered by overall mean F, best first; classifier precedence
    /// and then the method label break ties.
    pub fn ranking(&self) -> Vec<&ComparisonRow> {
        let mut rows: Vec<&ComparisonRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            b.overall_mean_f
                .total_cmp(&a.overall_mean_f)
                .then(
                    a.classifier
                        .map(|k| k.precedence())
                        .cmp(&b.classifier.map(|k| k.precedence())),
                )
                .then(a.method.cmp(&b.method))
        });
        rows
    }

    /// Plain-text grid of mean F per method and tissue.
    pub fn render(&self) -> String {
        let mut out = format!("{:<8}", "method");
        for t in Tissue::ALL {
            out.push_str(&format!(" {:>12}", t.name()));
        }
        out.push_str(&format!(" {:>12}\n", "overall"));
        for r in &self.rows {
            out.push_str(&format!("{:<8}", r.method));
            for (_, v) in r.mean_f.iter() {
                out.push_str(&format!(" {v:>12.4}"));
            }
            out.push_str(&format!(" {:>12.4}\n", r.overall_mean_f));
        }
        out
    }
}

/// Mean scores per method, in the given order.
pub fn aggregate_reports(reports: &[EvalReport]) -> ComparisonTable {
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            method: r.method.clone(),
            classifier: r.classifier,
            folds: r.fold_count(),
            mean_f: r.mean_f_per_tissue(),
            overall_mean_f: r.overall_mean_f(),
        })
        .collect();
    ComparisonTable { rows }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    fold: usize,
    classifier: &'a str,
    tissue: &'a str,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    precision: f64,
    recall: f64,
    f_measure: f64,
    degenerate: bool,
}

/// Per-fold, per-tissue rows for every report:
/// `fold,classifier,tissue,tp,fp,fn,precision,recall,f_measure,degenerate`.
pub fn reports_to_csv(reports: &[EvalReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for f in &r.folds {
            for (t, s) in f.scores.iter() {
                w.serialize(CsvRow {
                    fold: f.fold,
                    classifier: &r.method,
                    tissue: t.name(),
                    tp: s.counts.tp,
                    fp: s.counts.fp,
                    fn_: s.counts.fn_,
                    precision: s.precision,
                    recall: s.recall,
                    f_measure: s.f_measure,
                    degenerate: s.degenerate,
                })?;
            }
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_reports_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    write_atomic(path, reports_to_csv(reports)?.as_bytes())
}

pub const SUMMARY_FORMAT: &str = "mriseg-evaluation";
pub const SUMMARY_VERSION: u32 = 1;

/// JSON summary of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub format: String,
    pub version: u32,
    /// Resolved run configuration, echoed verbatim.
    pub config: serde_json::Value,
    pub images: Vec<String>,
    /// Averages are unweighted means over folds; `overall_mean_f` is the
    /// fold mean of the tissue-mean F-measure.
    pub table: ComparisonTable,
    pub reports: Vec<EvalReport>,
}

impl EvalSummary {
    pub fn new(config: serde_json::Value, reports: &[EvalReport]) -> Self {
        let images = reports
            .first()
            .map(|r| r.folds.iter().map(|f| f.image_id.clone()).collect())
            .unwrap_or_default();
        EvalSummary {
            format: SUMMARY_FORMAT.into(),
            version: SUMMARY_VERSION,
            config,
            images,
            table: aggregate_reports(reports),
            reports: reports.to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}
