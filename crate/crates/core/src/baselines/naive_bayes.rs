use serde::{Deserialize, Serialize};

use super::BaselineError;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class, per-feature mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

fn check_rows<R: AsRef<[f64]>>(features: &[R], labels: &[usize]) -> Result<usize, BaselineError> {
    if features.len() != labels.len() {
        return Err(BaselineError::LabelCount {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let d = features.first().ok_or(BaselineError::Empty)?.as_ref().len();
    if let Some(r) = features.iter().find(|r| r.as_ref().len() != d) {
        return Err(BaselineError::FeatureLength {
            expected: d,
            found: r.as_ref().len(),
        });
    }
    Ok(d)
}

/// Fits class priors and maximum-likelihood Gaussians. Labels are class
/// indices `0..C`; every class up to the largest label needs two samples.
pub fn nb_fit<R: AsRef<[f64]>>(features: &[R], labels: &[usize]) -> Result<NbModel, BaselineError> {
    let d = check_rows(features, labels)?;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    if n_classes < 2 || counts.iter().any(|&c| c < 2) {
        return Err(BaselineError::InsufficientClasses(format!(
            "class counts {counts:?}"
        )));
    }

    let mut means = vec![vec![0.0; d]; n_classes];
    for (x, &l) in features.iter().zip(labels) {
        for (m, v) in means[l].iter_mut().zip(x.as_ref()) {
            *m += v;
        }
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= n as f64);
    }
    let mut variances = vec![vec![0.0; d]; n_classes];
    for (x, &l) in features.iter().zip(labels) {
        for ((s, v), m) in variances[l].iter_mut().zip(x.as_ref()).zip(&means[l]) {
            *s += (v - m) * (v - m);
        }
    }
    for (s, &n) in variances.iter_mut().zip(&counts) {
        s.iter_mut()
            .for_each(|v| *v = (*v / n as f64).max(VARIANCE_FLOOR));
    }
    let total = labels.len() as f64;
    let priors = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(NbModel {
        priors,
        means,
        variances,
    })
}

/// Class posterior, computed in log space and normalized.
pub fn nb_predict(model: &NbModel, x: &[f64]) -> Vec<f64> {
    let log_joint: Vec<f64> = model
        .priors
        .iter()
        .zip(model.means.iter().zip(&model.variances))
        .map(|(prior, (mean, var))| {
            let ll: f64 = x
                .iter()
                .zip(mean.iter().zip(var))
                .map(|(v, (m, s2))| {
                    -0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2)
                })
                .sum();
            prior.ln() + ll
        })
        .collect();
    let max = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_joint.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}
