//! Raw observation and cohort records, their CSV formats, and the seeded
//! synthetic cohort generator.

mod channel;
mod records;
mod synthetic;

pub use channel::{VitalChannel, N_CHANNELS};
pub use records::{
    parse_cohort, parse_observations, write_cohort, write_observations, CohortEntry,
    RawObservation, COHORT_HEADER, OBSERVATIONS_HEADER,
};
pub use synthetic::{generate_synthetic_cohort, ChannelProfile, SyntheticConfig, CHANNEL_PROFILES};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    BadHeader {
        line: u64,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: unknown channel `{name}`")]
    UnknownChannel { line: u64, name: String },
    #[error("line {line}: invalid {field} `{value}`")]
    InvalidNumber {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: negative offset_minutes {value}")]
    NegativeOffset { line: u64, value: i64 },
    #[error("line {line}: duplicate stay_id `{stay_id}`")]
    DuplicateStay { line: u64, stay_id: String },
    #[error("line {line}: los_hours must be positive, got {value}")]
    NonPositiveLos { line: u64, value: f64 },
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}
