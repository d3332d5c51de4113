//! Experiment orchestration and reporting for the two-stage ICU mortality
//! and length-of-stay models.

pub mod config;
pub mod experiment;
pub mod report;
pub mod svg;

pub use config::{parse_config, ConfigError, DataSource, ExperimentConfig, ModelKind};
pub use experiment::{run_experiment, ExperimentError, ExperimentOutput, StagePrediction};
pub use report::{build_report, emit_report, MetricsReport};
