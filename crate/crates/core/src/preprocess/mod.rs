//! From raw records to labeled, normalized fixed-length windows.

mod grid;
mod labels;
mod pipeline;
mod sampling;

pub use grid::{
    compute_channel_stats, impute_mean, interpolate_linear, normalize_zscore, resample_to_grid,
    ChannelGrid, ChannelStats, Frame, Row,
};
pub use labels::{apply_exclusions, label_los, label_mortality, LabeledWindow, LOS_CLASSES};
pub use pipeline::{finalize_grid, group_by_stay, interpolated_grids};
pub use sampling::undersample;

use thiserror::Error;

use crate::data::VitalChannel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("channel {0} has no observed cells in the training data")]
    NoObservations(VitalChannel),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error(
        "stay {stay_id}: length-of-stay label needs a positive death time, got {death_time:?}"
    )]
    NoPositiveDeathTime {
        stay_id: String,
        death_time: Option<f64>,
    },
    #[error("frame must be 6, 12 or 24 hours, got {0}")]
    InvalidFrame(u32),
    #[error("undersampling needs at least one item")]
    EmptyInput,
}
