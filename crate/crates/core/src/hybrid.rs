//! Rule-based fusion of the four classifiers.
//!
//! Each tissue is assigned the classifier with the best mean F-measure on
//! it. At every pixel, a tissue is a candidate when its assigned classifier
//! labels the pixel with that tissue. A single candidate wins outright;
//! several candidates are separated by their assigned classifier's score
//! (then lowest tissue code); with no candidate the globally best
//! classifier decides.
//!
//! Rule tables are stored as JSON:
//!
//! ```json
//! {"assignment": {"background": "svm", ...}, "fallback": "svm",
//!  "scores": {"pnn": {"background": 1.0, ...}, ...}}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::dataset_io::LabelMap;
use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_atomic};
use crate::tissue::{PerTissue, Tissue, NUM_TISSUES};

pub type ScoreMatrix = BTreeMap<ClassifierKind, PerTissue<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    pub assignment: PerTissue<ClassifierKind>,
    pub fallback: ClassifierKind,
    pub scores: ScoreMatrix,
}

fn overall(scores: &PerTissue<f64>) -> f64 {
    scores.iter().map(|(_, v)| *v).sum::<f64>() / NUM_TISSUES as f64
}

/// Best classifier by `key`, breaking ties by precedence.
fn best_by(scores: &ScoreMatrix, key: impl Fn(&PerTissue<f64>) -> (f64, f64)) -> ClassifierKind {
    ClassifierKind::ALL
        .into_iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(&scores[a]), key(&scores[b]));
            kb.0.total_cmp(&ka.0)
                .then(kb.1.total_cmp(&ka.1))
                .then(a.precedence().cmp(&b.precedence()))
        })
        .expect("four classifiers")
}

/// Per tissue: highest mean F, then highest overall mean F, then the fixed
/// precedence SVM, ISNN, PNN, KNN. The fallback is the classifier with the
/// highest overall mean F under the same precedence.
pub fn derive_rule_table(scores: &ScoreMatrix) -> Result<RuleTable> {
    for kind in ClassifierKind::ALL {
        let row = scores
            .get(&kind)
            .ok_or_else(|| Error::MissingCell(format!("no scores for {kind}")))?;
        for (t, v) in row.iter() {
            if !v.is_finite() {
                return Err(Error::MissingCell(format!("{kind} / {t} is not a number")));
            }
        }
    }
    if let Some(extra) = scores.keys().find(|k| !ClassifierKind::ALL.contains(k)) {
        return Err(Error::InvalidConfig(format!("unexpected classifier {extra}")));
    }
    let assignment = PerTissue::from_fn(|t| best_by(scores, |row| (row[t], overall(row))));
    let fallback = best_by(scores, |row| (overall(row), 0.0));
    Ok(RuleTable {
        assignment,
        fallback,
        scores: scores.clone(),
    })
}

impl RuleTable {
    /// Checks that the assignment and fallback follow from the scores.
    pub fn validate(&self) -> Result<()> {
        let derived = derive_rule_table(&self.scores)?;
        if derived.assignment != self.assignment || derived.fallback != self.fallback {
            return Err(Error::InvalidConfig(
                "rule table assignment does not follow from its scores".into(),
            ));
        }
        Ok(())
    }

    /// Score of the classifier assigned to `tissue` on that tissue.
    pub fn assigned_score(&self, tissue: Tissue) -> f64 {
        self.scores[&self.assignment[tissue]][tissue]
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let table: RuleTable = serde_json::from_slice(bytes)?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }

    /// Fused label from the four classifiers' labels at one pixel.
    pub fn fuse(&self, labels: &BTreeMap<ClassifierKind, Tissue>) -> Tissue {
        let mut best: Option<(f64, Tissue)> = None;
        for t in Tissue::ALL {
            if labels[&self.assignment[t]] == t {
                let s = self.assigned_score(t);
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, t));
                }
            }
        }
        best.map_or(labels[&self.fallback], |(_, t)| t)
    }
}

/// Fuses per-classifier segmentations of one image.
pub fn hybrid_segment(predictions: &BTreeMap<ClassifierKind, LabelMap>, rules: &RuleTable) -> Result<LabelMap> {
    let needed = Tissue::ALL
        .into_iter()
        .map(|t| rules.assignment[t])
        .chain([rules.fallback]);
    for kind in needed {
        if !predictions.contains_key(&kind) {
            return Err(Error::InvalidConfig(format!("no segmentation from {kind}")));
        }
    }
    let mut maps = predictions.values();
    let first = maps.next().expect("at least one segmentation");
    for m in maps {
        if m.dims() != first.dims() {
            return Err(Error::DimensionMismatch {
                expected: first.dims(),
                found: m.dims(),
            });
        }
    }
    let labels = (0..first.labels().len())
        .into_par_iter()
        .map(|i| {
            let at: BTreeMap<ClassifierKind, Tissue> =
                predictions.iter().map(|(k, m)| (*k, m.labels()[i])).collect();
            rules.fuse(&at)
        })
        .collect();
    LabelMap::new(first.width(), first.height(), labels)
}
