use serde::{Deserialize, Serialize};

use super::MetricsError;

/// ROC points from (0,0) to (1,1) with the trapezoidal area under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// (false-positive rate, true-positive rate), both non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweeps a threshold over the distinct scores in descending order; tied
/// scores move the curve in one diagonal step, which counts each tied
/// positive/negative pair as one half.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            truth: labels.len(),
            pred: scores.len(),
        });
    }
    if let Some(&s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(s));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (p, n) = (pos as f64, neg as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the area in units of one (positive, negative) pair.
    let mut area2 = 0u64;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (tp0, fp0) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        area2 += (fp - fp0) * (tp + tp0);
        points.push((fp as f64 / n, tp as f64 / p));
    }
    let auc = area2 as f64 / (2.0 * p * n);
    Ok(RocCurve { points, auc })
}

/// One-vs-rest AUROCs with macro and micro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassAuroc {
    /// Unweighted mean of the defined per-class values.
    pub macro_auc: Option<f64>,
    /// AUROC of all (score, one-hot label) pairs pooled.
    pub micro_auc: f64,
    pub per_class: Vec<Option<f64>>,
    /// Set when some class had no positives (or no negatives) and was left
    /// out of the macro average.
    pub degenerate: bool,
    pub class_curves: Vec<Option<RocCurve>>,
    pub micro_curve: RocCurve,
}

pub fn auroc_multiclass<R: AsRef<[f64]>>(
    probs: &[R],
    labels: &[usize],
) -> Result<MulticlassAuroc, MetricsError> {
    if probs.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            truth: labels.len(),
            pred: probs.len(),
        });
    }
    let n_classes = probs.first().map_or(0, |r| r.as_ref().len());
    for (row, p) in probs.iter().enumerate() {
        let p = p.as_ref();
        let sum: f64 = p.iter().sum();
        if p.len() != n_classes || (sum - 1.0).abs() > 1e-6 {
            return Err(MetricsError::RowNotNormalized { row, sum });
        }
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(MetricsError::LabelOutOfRange { label, n_classes });
    }

    let mut class_curves = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let scores: Vec<f64> = probs.iter().map(|r| r.as_ref()[c]).collect();
        let onehot: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        class_curves.push(match roc_curve(&scores, &onehot) {
            Ok(curve) => Some(curve),
            Err(MetricsError::SingleClass) => None,
            Err(e) => return Err(e),
        });
    }
    let per_class: Vec<Option<f64>> = class_curves
        .iter()
        .map(|c| c.as_ref().map(|c| c.auc))
        .collect();
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let macro_auc =
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    let pooled: Vec<f64> = probs
        .iter()
        .flat_map(|r| r.as_ref().iter().copied())
        .collect();
    let pooled_labels: Vec<bool> = labels
        .iter()
        .flat_map(|&l| (0..n_classes).map(move |c| c == l))
        .collect();
    let micro_curve = roc_curve(&pooled, &pooled_labels)?;

    Ok(MulticlassAuroc {
        macro_auc,
        micro_auc: micro_curve.auc,
        degenerate: defined.len() < n_classes,
        per_class,
        class_curves,
        micro_curve,
    })
}

/// Macro-averaged curve for plotting: the per-class TPRs interpolated onto
/// the union of their FPR grids and averaged.
pub fn macro_average_curve(curves: &[&RocCurve]) -> Vec<(f64, f64)> {
    if curves.is_empty() {
        return vec![(0.0, 0.0), (1.0, 1.0)];
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut out = vec![(0.0, 0.0)];
    out.extend(grid.into_iter().map(|x| {
        let tpr = curves
            .iter()
            .map(|c| interp_upper(&c.points, x))
            .sum::<f64>()
            / curves.len() as f64;
        (x, tpr)
    }));
    out
}

/// Highest TPR reached at exactly `x`, or the linear interpolation between
/// the neighbouring points.
fn interp_upper(points: &[(f64, f64)], x: f64) -> f64 {
    let mut best: Option<f64> = None;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 == x {
            best = Some(best.map_or(y0, |b: f64| b.max(y0)));
        }
        if x1 == x {
            best = Some(best.map_or(y1, |b: f64| b.max(y1)));
        }
        if best.is_none() && x0 < x && x < x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    best.unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        let r = roc_curve(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn all_tied() {
        let r = roc_curve(&[0.4; 5], &[true, false, true, false, false]).unwrap();
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn one_win_one_loss() {
        let r = roc_curve(&[0.9, 0.8, 0.3], &[true, false, true]).unwrap();
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn single_class_errors() {
        assert_eq!(
            roc_curve(&[0.1, 0.2], &[true, true]),
            Err(MetricsError::SingleClass)
        );
        assert!(roc_curve(&[f64::NAN, 0.2], &[true, false]).is_err());
    }

    #[test]
    fn multiclass_perfect() {
        let probs: Vec<[f64; 4]> = (0..8)
            .map(|i| {
                let mut r = [0.0; 4];
                r[i % 4] = 1.0;
                r
            })
            .collect();
        let labels: Vec<usize> = (0..8).map(|i| i % 4).collect();
        let m = auroc_multiclass(&probs, &labels).unwrap();
        assert_eq!(m.macro_auc, Some(1.0));
        assert_eq!(m.micro_auc, 1.0);
        assert!(!m.degenerate);
    }

    #[test]
    fn multiclass_missing_class_flagged() {
        let probs = vec![
            [0.7, 0.1, 0.1, 0.1],
            [0.1, 0.7, 0.1, 0.1],
            [0.6, 0.2, 0.1, 0.1],
        ];
        let m = auroc_multiclass(&probs, &[0, 1, 0]).unwrap();
        assert_eq!(m.per_class[2], None);
        assert_eq!(m.per_class[3], None);
        assert!(m.degenerate);
        assert_eq!(m.macro_auc, Some(1.0));
    }

    #[test]
    fn multiclass_rejects_unnormalized() {
        assert!(matches!(
            auroc_multiclass(&[[0.5, 0.6]], &[0]),
            Err(MetricsError::RowNotNormalized { .. })
        ));
    }

    #[test]
    fn macro_curve_spans_unit_square() {
        let a = roc_curve(&[0.9, 0.1, 0.5], &[true, false, false]).unwrap();
        let b = roc_curve(&[0.2, 0.8, 0.5, 0.4], &[true, false, true, false]).unwrap();
        let m = macro_average_curve(&[&a, &b]);
        assert_eq!(m.first().unwrap().0, 0.0);
        assert_eq!(*m.last().unwrap(), (1.0, 1.0));
        assert!(m.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}
