//! Binary and multiclass evaluation plus the K-fold splitter.

mod confusion;
mod kfold;
mod roc;

pub use confusion::{confusion_matrix, f1_binary, mcc_binary, ConfusionMatrix, Score};
pub use kfold::kfold_split;
pub use roc::{auroc_multiclass, macro_average_curve, roc_curve, MulticlassAuroc, RocCurve};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("y_true has {truth} labels but y_pred has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("AUROC is undefined without both positive and negative samples")]
    SingleClass,
    #[error("non-finite score {0}")]
    NonFiniteScore(f64),
    #[error("probability row {row} sums to {sum}, not 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("cannot split {n} samples into {k} folds")]
    TooFewSamples { n: usize, k: usize },
}
