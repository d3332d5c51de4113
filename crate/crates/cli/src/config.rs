//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are skipped. Every key may appear
//! at most once and unknown keys are rejected, so a config file pins a run
//! completely.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use icu_core::data::SyntheticConfig;
use icu_core::nn::ModelConfig;
use icu_core::preprocess::Frame;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

pub const KEYS: [&str; 17] = [
    "cohort_path",
    "observations_path",
    "synthetic.n",
    "synthetic.mortality_rate",
    "synthetic.signal",
    "synthetic.missing_rate",
    "frame_hours",
    "hidden_units",
    "dropout_rate",
    "learning_rate",
    "epochs",
    "batch_size",
    "folds",
    "test_fraction",
    "seed",
    "models",
    "out_dir",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lstm,
    Nb,
    Lr,
    Saps2,
    Sofa,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [Self::Lstm, Self::Nb, Self::Lr, Self::Saps2, Self::Sofa];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lstm => "lstm",
            Self::Nb => "nb",
            Self::Lr => "lr",
            Self::Saps2 => "saps2",
            Self::Sofa => "sofa",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown model `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Files {
        cohort_path: PathBuf,
        observations_path: PathBuf,
    },
    Synthetic(SyntheticConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub frames: Vec<Frame>,
    pub model: ModelConfig,
    pub models: Vec<ModelKind>,
    pub test_fraction: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        Self {
            source: DataSource::Synthetic(SyntheticConfig {
                seed: model.seed,
                ..SyntheticConfig::default()
            }),
            frames: Frame::ALL.to_vec(),
            seed: model.seed,
            model,
            models: ModelKind::ALL.to_vec(),
            test_fraction: DEFAULT_TEST_FRACTION,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.test_fraction > 0.0 && self.test_fraction <= 0.5) {
            return invalid(format!(
                "test_fraction {} not in (0, 0.5]",
                self.test_fraction
            ));
        }
        if self.frames.is_empty() {
            return invalid("frame_hours is empty".into());
        }
        if self.models.is_empty() {
            return invalid("models is empty".into());
        }
        if self.model.seed != self.seed {
            return invalid("model seed differs from experiment seed".into());
        }
        self.model.validate().or_else(|e| invalid(e.to_string()))?;
        if let DataSource::Synthetic(s) = &self.source {
            s.validate().or_else(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// Sets the experiment seed everywhere it is consumed.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.model.seed = seed;
        if let DataSource::Synthetic(s) = &mut self.source {
            s.seed = seed;
        }
    }
}

pub fn parse_frame(s: &str) -> Result<Frame, String> {
    s.parse::<u32>()
        .ok()
        .and_then(|h| Frame::try_from(h).ok())
        .ok_or_else(|| format!("frame must be one of 6, 12, 24 (got `{s}`)"))
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim) {
        let v = item(part)?;
        out.push(v);
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut synth = SyntheticConfig::default();
    let mut cohort_path = None;
    let mut observations_path = None;
    let mut seed = None;
    let mut any_synthetic = false;
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or(ConfigError::Syntax { line })?;
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.into(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.into(),
            });
        }
        let bad = || ConfigError::BadValue {
            line,
            key: key.into(),
            value: value.into(),
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let int = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match key {
            "cohort_path" => cohort_path = Some(PathBuf::from(value)),
            "observations_path" => observations_path = Some(PathBuf::from(value)),
            "synthetic.n" => synth.n_stays = int(value)?,
            "synthetic.mortality_rate" => synth.mortality_rate = num(value)?,
            "synthetic.signal" => synth.frame_signal_strength = num(value)?,
            "synthetic.missing_rate" => synth.missing_rate = num(value)?,
            "frame_hours" => cfg.frames = parse_list(value, parse_frame).map_err(|_| bad())?,
            "hidden_units" => cfg.model.hidden_units = int(value)?,
            "dropout_rate" => cfg.model.dropout_rate = num(value)?,
            "learning_rate" => cfg.model.learning_rate = num(value)?,
            "epochs" => cfg.model.epochs = int(value)?,
            "batch_size" => cfg.model.batch_size = int(value)?,
            "folds" => cfg.model.folds = int(value)?,
            "test_fraction" => cfg.test_fraction = num(value)?,
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
            "models" => cfg.models = parse_list(value, str::parse).map_err(|_| bad())?,
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            _ => unreachable!("key list checked above"),
        }
        any_synthetic |= key.starts_with("synthetic.");
    }

    cfg.source = match (cohort_path, observations_path) {
        (Some(cohort_path), Some(observations_path)) => {
            if any_synthetic {
                return Err(ConfigError::Invalid(
                    "synthetic.* keys conflict with input paths".into(),
                ));
            }
            DataSource::Files {
                cohort_path,
                observations_path,
            }
        }
        (None, None) => DataSource::Synthetic(synth),
        _ => {
            return Err(ConfigError::Invalid(
                "cohort_path and observations_path must be given together".into(),
            ))
        }
    };
    cfg.frames.sort_by_key(|f| f.hours());
    cfg.frames.dedup();
    cfg.models.sort();
    cfg.models.dedup();
    cfg.set_seed(seed.unwrap_or(cfg.seed));
    cfg.validate()?;
    Ok(cfg)
}
