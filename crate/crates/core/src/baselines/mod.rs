//! Reference predictors: partial SAPS-II and SOFA scores computed from the
//! monitored channels, Gaussian naive Bayes and logistic regression on
//! flattened windows, and the threshold picker that turns a score into a
//! binary classifier.

mod logistic;
mod naive_bayes;
mod scores;
mod threshold;

pub use logistic::{lr_fit, lr_predict, LrModel};
pub use naive_bayes::{nb_fit, nb_predict, NbModel, VARIANCE_FLOOR};
pub use scores::{
    parse_point_table, saps2_probability, saps2_score, saps2_table, sofa_score, sofa_table,
    ComponentPoints, ComponentTable, PointBand, PointTable, ScoreBreakdown, ScoreSource,
    POINT_TABLE_FORMAT,
};
pub use threshold::{score_to_classifier, ThresholdChoice};

use thiserror::Error;

use crate::data::VitalChannel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("{what} value {value} outside the plausible range")]
    Implausible { what: String, value: f64 },
    #[error("{channel} value {value} outside plausible range [{lo}, {hi}]")]
    ImplausibleChannel {
        channel: VitalChannel,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("point table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error("training data needs at least two samples of each of two classes: {0}")]
    InsufficientClasses(String),
    #[error("feature vectors have inconsistent length: expected {expected}, found {found}")]
    FeatureLength { expected: usize, found: usize },
    #[error("{features} feature rows but {labels} labels")]
    LabelCount { features: usize, labels: usize },
    #[error("logistic regression diverged at iteration {iter}: loss {prev} -> {loss}")]
    Divergence { iter: usize, prev: f64, loss: f64 },
    #[error("empty input")]
    Empty,
}
