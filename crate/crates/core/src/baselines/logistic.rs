use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::nn::sigmoid;

/// Relative slack allowed when checking that the loss never increases.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Mean BCE before each iteration, plus the final value.
    pub loss_history: Vec<f64>,
}

impl LrModel {
    pub fn zeros(d: usize) -> Self {
        Self {
            weights: vec![0.0; d],
            intercept: 0.0,
            loss_history: Vec::new(),
        }
    }
}

pub fn lr_predict(model: &LrModel, x: &[f64]) -> f64 {
    let z: f64 = model.intercept + model.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
    sigmoid(z)
}

fn mean_bce(model: &LrModel, features: &[impl AsRef<[f64]>], labels: &[u8]) -> f64 {
    let clip = |p: f64| p.clamp(1e-12, 1.0 - 1e-12);
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let p = clip(lr_predict(model, x.as_ref()));
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / features.len() as f64
}

/// Full-batch gradient descent on mean binary cross-entropy from zero
/// weights. Aborts if an iteration increases the loss.
pub fn lr_fit<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[u8],
    learning_rate: f64,
    iterations: usize,
) -> Result<LrModel, BaselineError> {
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
    let n = features.len() as f64;
    let mut model = LrModel::zeros(d);
    let mut prev = mean_bce(&model, features, labels);
    model.loss_history.push(prev);
    let mut grad = vec![0.0; d];
    for iter in 0..iterations {
        grad.fill(0.0);
        let mut grad_b = 0.0;
        for (x, &y) in features.iter().zip(labels) {
            let x = x.as_ref();
            let err = lr_predict(&model, x) - f64::from(y);
            grad_b += err;
            for (g, v) in grad.iter_mut().zip(x) {
                *g += err * v;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= learning_rate * g / n;
        }
        model.intercept -= learning_rate * grad_b / n;
        let loss = mean_bce(&model, features, labels);
        if !loss.is_finite() || loss > prev * (1.0 + MONOTONE_SLACK) {
            return Err(BaselineError::Divergence { iter, prev, loss });
        }
        model.loss_history.push(loss);
        prev = loss;
    }
    Ok(model)
}
