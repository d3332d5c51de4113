//! LSTM classifier written from first principles: matrices, the gated
//! memory cell, backpropagation through time, Adam, and a seeded
//! mini-batch training loop with binary and 4-class heads.

mod adam;
mod batch;
mod io;
mod linalg;
mod lstm;
mod model;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use batch::batch_gradients;
pub use io::{load_model, save_model, MODEL_FORMAT};
pub use linalg::{sigmoid, softmax, Matrix};
pub use lstm::{
    backward_bptt, forward_sequence, loss, lstm_cell_forward, CellCache, Gate, Gradients,
    HeadParams, LstmParams, Network, SequenceCache, PROB_CLIP,
};
pub use model::{
    dropout_mask, predict, train, ModelConfig, Prediction, Task, TrainedModel, GRAD_CLIP_NORM,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("training diverged at epoch {epoch}: mean loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("model was trained on {trained}-hour windows, got {given}-hour window")]
    FrameMismatch { trained: usize, given: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("window {0} has no length-of-stay class")]
    MissingLosClass(String),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Format(String),
}
