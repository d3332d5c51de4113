use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::batch::batch_gradients;
use super::lstm::{loss, Network};
use super::NnError;
use crate::data::N_CHANNELS;
use crate::preprocess::{
    finalize_grid, ChannelGrid, ChannelStats, Frame, LabeledWindow, LOS_CLASSES,
};
use crate::rng;

/// Global L2 norm the per-batch gradient is clipped to.
pub const GRAD_CLIP_NORM: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_units: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_units: 64,
            dropout_rate: 0.2,
            learning_rate: 1e-3,
            epochs: 60,
            batch_size: 100,
            folds: 3,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must be in [0,1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.hidden_units == 0 || self.epochs == 0 || self.batch_size == 0 || self.folds == 0 {
            return bad("hidden_units, epochs, batch_size and folds must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// In-hospital mortality, sigmoid head.
    Binary,
    /// Time-to-death class, 4-way softmax head.
    Multiclass,
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Binary => 1,
            Task::Multiclass => LOS_CLASSES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Binary => "binary",
            Task::Multiclass => "multiclass",
        }
    }

    fn label(self, w: &LabeledWindow) -> Result<usize, NnError> {
        match self {
            Task::Binary => Ok(usize::from(w.mortality_label)),
            Task::Multiclass => w
                .los_class
                .map(usize::from)
                .ok_or_else(|| NnError::MissingLosClass(w.grid.stay_id.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub network: Network,
    pub stats: ChannelStats,
    pub task: Task,
    pub frame: Frame,
    pub config: ModelConfig,
    /// Mean training loss per epoch.
    pub training_log: Vec<f64>,
}

impl TrainedModel {
    /// Imputes and normalizes an interpolated raw-unit grid with the
    /// statistics this model was trained on.
    pub fn prepare(&self, grid: &ChannelGrid) -> ChannelGrid {
        finalize_grid(grid, &self.stats)
    }
}

/// Model output for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// One positive-class probability (binary) or a distribution over the
    /// length-of-stay classes.
    pub probs: Vec<f64>,
}

impl Prediction {
    /// Binary: 1 iff p >= 0.5. Multiclass: argmax, lowest index on ties.
    pub fn decision(&self) -> usize {
        if self.probs.len() == 1 {
            usize::from(self.probs[0] >= 0.5)
        } else {
            let mut best = 0;
            for (k, &p) in self.probs.iter().enumerate() {
                if p > self.probs[best] {
                    best = k;
                }
            }
            best
        }
    }
}

/// Inverted-dropout multipliers: 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`. `None` when dropout is off.
pub fn dropout_mask(hidden: usize, rate: f64, rng: &mut impl Rng) -> Option<Vec<f64>> {
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(
        (0..hidden)
            .map(|_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            })
            .collect(),
    )
}

/// Mini-batch training with a seeded shuffle every epoch, a fresh dropout
/// mask per example, gradient clipping and Adam.
pub fn train(
    windows: &[LabeledWindow],
    task: Task,
    cfg: &ModelConfig,
    stats: &ChannelStats,
) -> Result<TrainedModel, NnError> {
    cfg.validate()?;
    let first = windows.first().ok_or(NnError::EmptyTrainingSet)?;
    let frame = first.grid.frame;
    let labels = windows
        .iter()
        .map(|w| {
            if w.grid.frame != frame || w.grid.len() != frame.hours() {
                return Err(NnError::FrameMismatch {
                    trained: frame.hours(),
                    given: w.grid.len(),
                });
            }
            task.label(w)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = rng::seeded(cfg.seed);
    let mut net = Network::init(N_CHANNELS, cfg.hidden_units, task.classes(), &mut rng);
    let mut grads = net.zeros_like();
    let mut opt = AdamState::new(&net.slices());
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut training_log = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            let masks: Vec<Option<Vec<f64>>> = batch
                .iter()
                .map(|_| dropout_mask(cfg.hidden_units, cfg.dropout_rate, &mut rng))
                .collect();
            let seqs: Vec<&[_]> = batch
                .iter()
                .map(|&i| windows[i].grid.values.as_slice())
                .collect();
            let batch_labels: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let probs = batch_gradients(&net, &seqs, &batch_labels, &masks, scale, &mut grads)?;
            total += probs
                .iter()
                .zip(&batch_labels)
                .map(|(p, &l)| loss(p, l))
                .sum::<f64>();
            grads.clip_norm(GRAD_CLIP_NORM);
            let g = grads.slices();
            adam_step(&mut net.slices_mut(), &g, &mut opt, cfg.learning_rate);
        }
        let mean = total / windows.len() as f64;
        if !mean.is_finite() {
            return Err(NnError::Divergence { epoch, loss: mean });
        }
        training_log.push(mean);
    }

    Ok(TrainedModel {
        network: net,
        stats: stats.clone(),
        task,
        frame,
        config: cfg.clone(),
        training_log,
    })
}

/// Inference without dropout on a grid prepared with the model's statistics.
pub fn predict(model: &TrainedModel, grid: &ChannelGrid) -> Result<Prediction, NnError> {
    if grid.frame != model.frame || grid.len() != model.frame.hours() {
        return Err(NnError::FrameMismatch {
            trained: model.frame.hours(),
            given: grid.len(),
        });
    }
    let (probs, _) = model.network.forward(&grid.values, None)?;
    Ok(Prediction { probs })
}
