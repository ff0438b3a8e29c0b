use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Rates at a threshold; a score at or above the threshold predicts positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tpr: f64,
    pub tnr: f64,
    pub ba: f64,
    pub threshold: f64,
}

/// Positive and negative scores, each sorted ascending.
struct Split {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl Split {
    fn new(probs: &[f64], labels: &[bool]) -> Result<Self> {
        if probs.len() != labels.len() {
            return Err(invalid(format!("{} scores but {} labels", probs.len(), labels.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (&p, &y) in probs.iter().zip(labels) {
            if y {
                pos.push(p)
            } else {
                neg.push(p)
            }
        }
        if pos.is_empty() || neg.is_empty() {
            return Err(Error::UndefinedMetric("labels contain a single class".into()));
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        Ok(Self { pos, neg })
    }

    fn rates(&self, c: f64) -> (f64, f64) {
        let tp = self.pos.len() - self.pos.partition_point(|&p| p < c);
        let tn = self.neg.partition_point(|&p| p < c);
        (tp as f64 / self.pos.len() as f64, tn as f64 / self.neg.len() as f64)
    }

    fn at(&self, c: f64) -> Classification {
        let (tpr, tnr) = self.rates(c);
        Classification { tpr, tnr, ba: 0.5 * (tpr + tnr), threshold: c }
    }
}

/// Rates with predictions `p >= threshold`.
pub fn confusion_at(probs: &[f64], labels: &[bool], threshold: f64) -> Result<Classification> {
    Ok(Split::new(probs, labels)?.at(threshold))
}

/// Threshold among the unique scores and their midpoints that minimizes
/// `|TPR - TNR|`; ties go to the larger threshold.
pub fn select_threshold(probs: &[f64], labels: &[bool]) -> Result<f64> {
    let split = Split::new(probs, labels)?;
    let mut unique: Vec<f64> = probs.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let mut best = (f64::INFINITY, f64::NEG_INFINITY);
    let mut consider = |c: f64| {
        let (tpr, tnr) = split.rates(c);
        let gap = (tpr - tnr).abs();
        if gap < best.0 || (gap == best.0 && c > best.1) {
            best = (gap, c);
        }
    };
    for (k, &c) in unique.iter().enumerate() {
        consider(c);
        if let Some(&next) = unique.get(k + 1) {
            consider(0.5 * (c + next));
        }
    }
    Ok(best.1)
}

/// Threshold chosen on the validation split, rates reported on the evaluation split.
pub fn classification_metrics(
    val_probs: &[f64],
    val_labels: &[bool],
    eval_probs: &[f64],
    eval_labels: &[bool],
) -> Result<Classification> {
    let c = select_threshold(val_probs, val_labels)?;
    confusion_at(eval_probs, eval_labels, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_scores_are_perfect() {
        let p = [0.1, 0.2, 0.8, 0.9];
        let y = [false, false, true, true];
        let c = classification_metrics(&p, &y, &p, &y).unwrap();
        assert_eq!((c.tpr, c.tnr, c.ba), (1.0, 1.0, 1.0));
        // 0.5 and 0.8 both separate; the larger wins
        assert_eq!(c.threshold, 0.8);
    }

    #[test]
    fn six_point_confusion_table() {
        let p = [0.9, 0.7, 0.4, 0.6, 0.3, 0.1];
        let y = [true, true, true, false, false, false];
        // at 0.5: TP = 2 (0.9, 0.7), FN = 1 (0.4), FP = 1 (0.6), TN = 2 (0.3, 0.1)
        let c = confusion_at(&p, &y, 0.5).unwrap();
        assert_eq!((c.tpr, c.tnr), (2.0 / 3.0, 2.0 / 3.0));
        assert!((c.ba - 2.0 / 3.0).abs() < 1e-16);
        // at 0.35: TP = 3, FP = 1
        let c = confusion_at(&p, &y, 0.35).unwrap();
        assert_eq!((c.tpr, c.tnr), (1.0, 2.0 / 3.0));
        // a score equal to the threshold is positive
        assert_eq!(confusion_at(&p, &y, 0.4).unwrap().tpr, 1.0);
        // balanced candidates: 0.4 < c <= 0.6 gives 2/3 vs 2/3; the largest is 0.6
        assert_eq!(select_threshold(&p, &y).unwrap(), 0.6);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(select_threshold(&[0.2, 0.3], &[true, true]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(confusion_at(&[0.2], &[false], 0.1), Err(Error::UndefinedMetric(_))));
        assert!(matches!(confusion_at(&[1.2, 0.1], &[true, false], 0.1), Err(Error::InvalidArgument(_))));
        assert!(matches!(confusion_at(&[0.1], &[true, false], 0.1), Err(Error::InvalidArgument(_))));
    }
}
