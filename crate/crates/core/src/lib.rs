//! Early ICU outcome prediction from the first hours of vital-sign records.
//!
//! The crate covers the full path from raw timestamped observations to
//! evaluated predictions:
//!
//! * [`data`] parses observation/cohort CSV files and generates seeded
//!   synthetic cohorts with a planted outcome signal.
//! * [`preprocess`] applies the cohort exclusions, grids each stay hourly,
//!   fills gaps (linear interpolation, then population means), normalizes,
//!   derives mortality / length-of-stay labels and undersamples.
//! * [`nn`] is a dependency-free LSTM classifier trained with BPTT and Adam.
//! * [`baselines`] holds partial SAPS-II / SOFA calculators, Gaussian naive
//!   Bayes and logistic regression.
//! * [`metrics`] has confusion matrices, F1, MCC, ROC/AUROC with
//!   micro/macro averaging and the K-fold splitter.

pub mod baselines;
pub mod data;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod rng;

pub use data::{CohortEntry, RawObservation, VitalChannel, N_CHANNELS};
pub use preprocess::{ChannelGrid, ChannelStats, Frame, LabeledWindow};
