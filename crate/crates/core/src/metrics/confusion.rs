use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// (TN, FP, FN, TP) of a 2x2 matrix with class 1 positive.
    pub fn binary_counts(&self) -> (u64, u64, u64, u64) {
        assert_eq!(
            self.n_classes, 2,
            "binary metric on {}-class matrix",
            self.n_classes
        );
        (
            self.counts[0][0],
            self.counts[0][1],
            self.counts[1][0],
            self.counts[1][1],
        )
    }
}

/// A metric value plus whether a zero-denominator convention produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn regular(value: f64) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    fn degenerate() -> Self {
        Self {
            value: 0.0,
            degenerate: true,
        }
    }
}

pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if label >= n_classes {
                return Err(MetricsError::LabelOutOfRange { label, n_classes });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, counts })
}

/// F1 of the positive class. TP = 0 gives 0; with no positives at all
/// (TP = FP = FN = 0) the 0 is flagged degenerate.
pub fn f1_binary(cm: &ConfusionMatrix) -> Score {
    let (_, fp, fn_, tp) = cm.binary_counts();
    if tp == 0 {
        return if fp == 0 && fn_ == 0 {
            Score::degenerate()
        } else {
            Score::regular(0.0)
        };
    }
    // 2PR/(P+R) simplifies to 2TP/(2TP+FP+FN).
    let tp = tp as f64;
    Score::regular(2.0 * tp / (2.0 * tp + fp as f64 + fn_ as f64))
}

/// Matthews correlation; any zero marginal gives a flagged 0.
pub fn mcc_binary(cm: &ConfusionMatrix) -> Score {
    let (tn, fp, fn_, tp) = cm.binary_counts();
    let (tn, fp, fn_, tp) = (tn as f64, fp as f64, fn_ as f64, tp as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return Score::degenerate();
    }
    let v = (tp * tn - fp * fn_) / den.sqrt();
    Score::regular(v.clamp(-1.0, 1.0))
}
