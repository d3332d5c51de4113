use serde::{Deserialize, Serialize};

use crate::metrics::{confusion_matrix, f1_binary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    /// Predict positive iff `score >= threshold`.
    pub threshold: f64,
    /// Training F1 at that threshold.
    pub f1: f64,
}

/// Picks the F1-maximizing cut among midpoints of adjacent distinct scores,
/// preferring the lowest on ties. With a single distinct score the cut is
/// that score.
pub fn score_to_classifier(scores: &[f64], labels: &[u8]) -> ThresholdChoice {
    let mut distinct: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let candidates: Vec<f64> = if distinct.len() <= 1 {
        distinct.first().copied().into_iter().collect()
    } else {
        distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    };
    let truth: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
    let mut best = ThresholdChoice {
        threshold: candidates.first().copied().unwrap_or(0.0),
        f1: f64::NEG_INFINITY,
    };
    for &t in &candidates {
        let pred: Vec<usize> = scores.iter().map(|&s| usize::from(s >= t)).collect();
        let f1 = confusion_matrix(&truth, &pred, 2)
            .map(|cm| f1_binary(&cm).value)
            .unwrap_or(0.0);
        if f1 > best.f1 {
            best = ThresholdChoice { threshold: t, f1 };
        }
    }
    if best.f1 == f64::NEG_INFINITY {
        best.f1 = 0.0;
    }
    best
}
