use serde::{Deserialize, Serialize};

use crate::dataset_io::LabelMap;
use crate::error::{Error, Result};
use crate::tissue::{PerTissue, Tissue};

/// Pixel counts for one tissue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, fn_ }
    }

    /// True when a denominator vanished and a fixed convention was used.
    pub fn is_degenerate(&self) -> bool {
        self.tp + self.fp == 0 || self.tp + self.fn_ == 0
    }
}

/// `tp / (tp + fp)`; 0 when nothing was predicted but the tissue exists,
/// 1 when the tissue is absent from both maps.
pub fn precision(c: &ConfusionCounts) -> f64 {
    if c.tp + c.fp == 0 {
        if c.fn_ > 0 {
            0.0
        } else {
            1.0
        }
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    }
}

/// `tp / (tp + fn)`; 0 when the tissue is absent from the truth but was
/// predicted, 1 when it is absent from both maps.
pub fn recall(c: &ConfusionCounts) -> f64 {
    if c.tp + c.fn_ == 0 {
        if c.fp > 0 {
            0.0
        } else {
            1.0
        }
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f_measure(c: &ConfusionCounts) -> f64 {
    let (p, r) = (precision(c), recall(c));
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn confusion_counts(pred: &LabelMap, truth: &LabelMap, tissue: Tissue) -> Result<ConfusionCounts> {
    check_dims(pred, truth)?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        match (p == tissue, t == tissue) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

fn check_dims(pred: &LabelMap, truth: &LabelMap) -> Result<()> {
    if pred.dims() != truth.dims() {
        return Err(Error::DimensionMismatch {
            expected: truth.dims(),
            found: pred.dims(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TissueScore {
    pub tissue: Tissue,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub degenerate: bool,
}

impl TissueScore {
    pub fn from_counts(tissue: Tissue, counts: ConfusionCounts) -> Self {
        TissueScore {
            tissue,
            counts,
            precision: precision(&counts),
            recall: recall(&counts),
            f_measure: f_measure(&counts),
            degenerate: counts.is_degenerate(),
        }
    }
}

/// Scores all five tissues in one pass over the maps.
pub fn score_segmentation(pred: &LabelMap, truth: &LabelMap) -> Result<PerTissue<TissueScore>> {
    check_dims(pred, truth)?;
    let mut counts = PerTissue::<ConfusionCounts>::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        if p == t {
            counts[p].tp += 1;
        } else {
            counts[p].fp += 1;
            counts[t].fn_ += 1;
        }
    }
    Ok(PerTissue::from_fn(|t| TissueScore::from_counts(t, counts[t])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Tissue::*;

    fn map(w: usize, labels: &[Tissue]) -> LabelMap {
        LabelMap::new(w, labels.len() / w, labels.to_vec()).unwrap()
    }

    #[test]
    fn hand_counted_two_by_two() {
        let pred = map(2, &[GrayMatter, GrayMatter, WhiteMatter, Background]);
        let truth = map(2, &[GrayMatter, WhiteMatter, WhiteMatter, Background]);
        let c = confusion_counts(&pred, &truth, GrayMatter).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 0));
        assert_eq!(precision(&c), 0.5);
        assert_eq!(recall(&c), 1.0);
        assert!((f_measure(&c) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(confusion_counts(&pred, &truth, Csf).unwrap(), ConfusionCounts::default());
    }

    #[test]
    fn degenerate_conventions() {
        let absent = TissueScore::from_counts(Csf, ConfusionCounts::new(0, 0, 0));
        assert_eq!((absent.precision, absent.recall, absent.f_measure), (1.0, 1.0, 1.0));
        assert!(absent.degenerate);
        let missed = TissueScore::from_counts(Csf, ConfusionCounts::new(0, 0, 4));
        assert_eq!((missed.precision, missed.recall, missed.f_measure), (0.0, 0.0, 0.0));
        assert!(missed.degenerate);
        let spurious = TissueScore::from_counts(Csf, ConfusionCounts::new(0, 3, 0));
        assert_eq!((spurious.precision, spurious.recall, spurious.f_measure), (0.0, 0.0, 0.0));
        assert!(spurious.degenerate);
        let wrong = TissueScore::from_counts(Csf, ConfusionCounts::new(0, 2, 2));
        assert_eq!(wrong.f_measure, 0.0);
        assert!(!wrong.degenerate);
    }

    #[test]
    fn identity_and_single_error() {
        let mut labels = vec![Background; 128 * 128];
        for (i, l) in labels.iter_mut().enumerate() {
            *l = Tissue::ALL[(i / 3000) % 5];
        }
        let truth = map(128, &labels);
        let scores = score_segmentation(&truth, &truth).unwrap();
        assert!(scores.iter().all(|(_, s)| s.f_measure == 1.0));
        labels[5000] = Csf;
        let pred = map(128, &labels);
        let scores = score_segmentation(&pred, &truth).unwrap();
        let below: Vec<_> = scores.iter().filter(|(_, s)| s.f_measure < 1.0).map(|(t, _)| t).collect();
        assert_eq!(below, vec![Skull, Csf]);
    }

    #[test]
    fn size_mismatch() {
        let a = map(2, &[Csf; 4]);
        let b = map(4, &[Csf; 4]);
        assert_eq!(score_segmentation(&a, &b).unwrap_err().code(), "DimensionMismatch");
        assert_eq!(confusion_counts(&a, &b, Csf).unwrap_err().code(), "DimensionMismatch");
    }
}
