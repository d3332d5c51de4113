use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::{CohortEntry, DataError, RawObservation, VitalChannel, N_CHANNELS};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_stays: usize,
    /// Fraction of stays that end in death; exactly `floor(n_stays * rate)`.
    pub mortality_rate: f64,
    /// Drift of non-survivor trajectories, in channel standard deviations
    /// accumulated over six hours.
    pub frame_signal_strength: f64,
    /// Independent drop probability per observation.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_stays: 1000,
            mortality_rate: 0.3,
            frame_signal_strength: 3.0,
            missing_rate: 0.3,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |msg: String| Err(DataError::InvalidConfig(msg));
        if self.n_stays == 0 {
            return bad("n_stays must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.mortality_rate) {
            return bad(format!(
                "mortality_rate {} not in [0,1]",
                self.mortality_rate
            ));
        }
        if !(self.frame_signal_strength >= 0.0 && self.frame_signal_strength.is_finite()) {
            return bad(format!(
                "frame_signal_strength {} must be finite and >= 0",
                self.frame_signal_strength
            ));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate {} not in [0,1)", self.missing_rate));
        }
        Ok(())
    }
}

/// Baseline distribution of one channel and the sign of its deterioration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProfile {
    pub channel: VitalChannel,
    pub baseline: f64,
    pub sd: f64,
    /// +1 if the value rises as the patient deteriorates, -1 if it falls.
    pub deterioration: f64,
}

const fn profile(
    channel: VitalChannel,
    baseline: f64,
    sd: f64,
    deterioration: f64,
) -> ChannelProfile {
    ChannelProfile {
        channel,
        baseline,
        sd,
        deterioration,
    }
}

/// Adult ICU reference values used by the generator. Index matches
/// [`VitalChannel::index`].
pub const CHANNEL_PROFILES: [ChannelProfile; N_CHANNELS] = [
    profile(VitalChannel::HeartRate, 80.0, 10.0, 1.0),
    profile(VitalChannel::SystolicBp, 120.0, 12.0, -1.0),
    profile(VitalChannel::DiastolicBp, 70.0, 8.0, -1.0),
    profile(VitalChannel::MeanBp, 87.0, 9.0, -1.0),
    profile(VitalChannel::RespiratoryRate, 16.0, 3.0, 1.0),
    profile(VitalChannel::OxygenSaturation, 97.0, 1.5, -1.0),
    profile(VitalChannel::GlasgowComaScore, 14.0, 1.0, -1.0),
    profile(VitalChannel::BloodUreaNitrogen, 15.0, 5.0, 1.0),
    profile(VitalChannel::Temperature, 37.0, 0.4, 1.0),
    profile(VitalChannel::WhiteBloodCells, 8.0, 2.5, 1.0),
    profile(VitalChannel::Bilirubin, 0.7, 0.3, 1.0),
];

/// Per-stay offset around the baseline, as a fraction of the channel sd.
const STAY_OFFSET_SD: f64 = 0.5;
/// Longest stay the generator produces, in hours.
const MAX_LOS_HOURS: f64 = 120.0;
/// Time-to-death ranges, one per length-of-stay class.
const DEATH_RANGES: [(f64, f64); 4] =
    [(0.5, 6.0), (6.0, 12.0), (12.0, 24.0), (24.0, MAX_LOS_HOURS)];

/// Patients who die sooner deteriorate faster.
fn severity(death_time_hours: f64) -> f64 {
    (24.0 / (death_time_hours + 12.0)).clamp(0.5, 2.0)
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// Generates a cohort with planted outcome signal.
///
/// Survivors fluctuate around [`CHANNEL_PROFILES`] baselines. Non-survivors
/// drift linearly from admission in the deterioration direction of each
/// channel, at `frame_signal_strength * sd / 6` per hour scaled by a severity
/// factor that grows as time-to-death shrinks. Non-survivor stays end at
/// death. Every stay gets one observation per channel per hour of stay, each
/// dropped independently with probability `missing_rate`.
///
/// The output is a pure function of `cfg`.
pub fn generate_synthetic_cohort(
    cfg: &SyntheticConfig,
) -> Result<(Vec<CohortEntry>, Vec<RawObservation>), DataError> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let n = cfg.n_stays;
    // Nudge so that e.g. 100 * 0.29 floors to 29, not 28.
    let n_dead = ((n as f64) * cfg.mortality_rate + 1e-9).floor() as usize;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut dead = vec![false; n];
    for &i in &order[..n_dead.min(n)] {
        dead[i] = true;
    }

    let age_dist = Normal::new(63.0f64, 16.0).expect("valid normal");
    let los_dist = LogNormal::new(30f64.ln(), 0.6).expect("valid lognormal");
    let unit = Normal::new(0.0f64, 1.0).expect("valid normal");

    let mut cohort = Vec::with_capacity(n);
    let mut observations = Vec::new();
    for (i, &is_dead) in dead.iter().enumerate() {
        let stay_id = format!("s{:05}", i + 1);
        let patient_id = format!("p{:05}", i + 1);
        let age_years = round_to(age_dist.sample(&mut rng).clamp(1.0, 100.0), 0.1);

        let (los_hours, death_time_hours) = if is_dead {
            let class = rng.random_range(0..DEATH_RANGES.len());
            let (lo, hi) = DEATH_RANGES[class];
            let t = round_to(rng.random_range(lo..hi), 0.01).clamp(lo, hi - 0.01);
            (t, Some(t))
        } else {
            let los = round_to(los_dist.sample(&mut rng).clamp(0.5, MAX_LOS_HOURS), 0.01);
            (los, None)
        };

        // Per-hour drift in sd units.
        let slope = match death_time_hours {
            Some(t) => cfg.frame_signal_strength / 6.0 * severity(t),
            None => 0.0,
        };
        let offsets: Vec<f64> = CHANNEL_PROFILES
            .iter()
            .map(|_| STAY_OFFSET_SD * unit.sample(&mut rng))
            .collect();

        let los_minutes = los_hours * 60.0;
        let hours = los_hours.ceil() as u32;
        for hour in 0..hours {
            for (p, offset) in CHANNEL_PROFILES.iter().zip(&offsets) {
                let minute = hour * 60 + rng.random_range(0..60);
                let noise = unit.sample(&mut rng);
                let dropped = rng.random::<f64>() < cfg.missing_rate;
                if dropped || f64::from(minute) >= los_minutes {
                    continue;
                }
                let drift = p.deterioration * slope * f64::from(minute) / 60.0;
                let (lo, hi) = p.channel.plausible_range();
                let raw = p.baseline + p.sd * (offset + drift + noise);
                let value = if p.channel == VitalChannel::GlasgowComaScore {
                    raw.round().clamp(lo, hi)
                } else {
                    round_to(raw, 0.01).clamp(lo, hi)
                };
                observations.push(RawObservation {
                    stay_id: stay_id.clone(),
                    channel: p.channel,
                    offset_minutes: minute,
                    value,
                });
            }
        }

        cohort.push(CohortEntry {
            stay_id,
            patient_id,
            age_years,
            los_hours,
            death_time_hours,
        });
    }
    Ok((cohort, observations))
}
