use std::fmt;

use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::data::{RawObservation, VitalChannel, N_CHANNELS};

/// Observation window after admission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Frame {
    H6,
    H12,
    H24,
}

impl Frame {
    pub const ALL: [Frame; 3] = [Frame::H6, Frame::H12, Frame::H24];

    pub fn hours(self) -> usize {
        match self {
            Frame::H6 => 6,
            Frame::H12 => 12,
            Frame::H24 => 24,
        }
    }
}

impl TryFrom<u32> for Frame {
    type Error = PreprocessError;

    fn try_from(h: u32) -> Result<Self, Self::Error> {
        match h {
            6 => Ok(Frame::H6),
            12 => Ok(Frame::H12),
            24 => Ok(Frame::H24),
            other => Err(PreprocessError::InvalidFrame(other)),
        }
    }
}

impl From<Frame> for u32 {
    fn from(f: Frame) -> u32 {
        f.hours() as u32
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hours())
    }
}

pub type Row = [f64; N_CHANNELS];

/// Hourly T x 11 matrix for one stay. Unobserved cells hold 0.0 with a
/// false mask bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    pub stay_id: String,
    pub frame: Frame,
    pub values: Vec<Row>,
    pub mask: Vec<[bool; N_CHANNELS]>,
}

impl ChannelGrid {
    pub fn empty(stay_id: impl Into<String>, frame: Frame) -> Self {
        let t = frame.hours();
        Self {
            stay_id: stay_id.into(),
            frame,
            values: vec![[0.0; N_CHANNELS]; t],
            mask: vec![[false; N_CHANNELS]; t],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn set(&mut self, t: usize, channel: VitalChannel, value: f64) {
        self.values[t][channel.index()] = value;
        self.mask[t][channel.index()] = true;
    }

    pub fn get(&self, t: usize, channel: VitalChannel) -> Option<f64> {
        let c = channel.index();
        self.mask[t][c].then_some(self.values[t][c])
    }

    /// Observed values of one channel in time order.
    pub fn observed(&self, channel: VitalChannel) -> impl Iterator<Item = f64> + '_ {
        let c = channel.index();
        self.values
            .iter()
            .zip(&self.mask)
            .filter_map(move |(v, m)| m[c].then_some(v[c]))
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|row| row.iter().all(|&m| m))
    }

    /// Row-major flattening, used by the non-sequential baselines.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Per-channel population mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Row,
    pub sd: Row,
}

/// Bins a stay's observations into hourly cells, averaging within each bin.
///
/// An observation at `offset_minutes` lands in hour `offset_minutes / 60`, so
/// an offset on a bin's right edge belongs to the next bin. Observations past
/// the frame, and observations of other stays, are ignored.
pub fn resample_to_grid(stay_id: &str, obs: &[RawObservation], frame: Frame) -> ChannelGrid {
    let t_max = frame.hours();
    let mut sums = vec![[0.0f64; N_CHANNELS]; t_max];
    let mut counts = vec![[0u32; N_CHANNELS]; t_max];
    for o in obs.iter().filter(|o| o.stay_id == stay_id) {
        let t = (o.offset_minutes / 60) as usize;
        if t < t_max {
            sums[t][o.channel.index()] += o.value;
            counts[t][o.channel.index()] += 1;
        }
    }
    let mut grid = ChannelGrid::empty(stay_id, frame);
    for t in 0..t_max {
        for c in 0..N_CHANNELS {
            if counts[t][c] > 0 {
                grid.values[t][c] = sums[t][c] / f64::from(counts[t][c]);
                grid.mask[t][c] = true;
            }
        }
    }
    grid
}

/// Fills interior gaps of every channel by linear interpolation in hour
/// index. Leading and trailing gaps are left for [`impute_mean`].
pub fn interpolate_linear(grid: &ChannelGrid) -> ChannelGrid {
    let mut out = grid.clone();
    for c in 0..N_CHANNELS {
        let mut last: Option<usize> = None;
        for t in 0..grid.len() {
            if !grid.mask[t][c] {
                continue;
            }
            if let Some(l) = last {
                let (v0, v1) = (grid.values[l][c], grid.values[t][c]);
                let span = (t - l) as f64;
                for k in l + 1..t {
                    let w = (k - l) as f64 / span;
                    out.values[k][c] = v0 + w * (v1 - v0);
                    out.mask[k][c] = true;
                }
            }
            last = Some(t);
        }
    }
    out
}

/// Mean and population standard deviation over mask-true cells only.
pub fn compute_channel_stats(training: &[ChannelGrid]) -> Result<ChannelStats, PreprocessError> {
    let mut mean = [0.0; N_CHANNELS];
    let mut sd = [0.0; N_CHANNELS];
    for channel in VitalChannel::ALL {
        let c = channel.index();
        let (sum, n) = training
            .iter()
            .flat_map(|g| g.observed(channel))
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            return Err(PreprocessError::NoObservations(channel));
        }
        let m = sum / n as f64;
        let ss: f64 = training
            .iter()
            .flat_map(|g| g.observed(channel))
            .map(|v| (v - m) * (v - m))
            .sum();
        mean[c] = m;
        sd[c] = (ss / n as f64).sqrt();
    }
    Ok(ChannelStats { mean, sd })
}

/// Sets every remaining missing cell to its channel's population mean.
pub fn impute_mean(grid: &ChannelGrid, stats: &ChannelStats) -> ChannelGrid {
    let mut out = grid.clone();
    for (row, mask) in out.values.iter_mut().zip(out.mask.iter_mut()) {
        for c in 0..N_CHANNELS {
            if !mask[c] {
                row[c] = stats.mean[c];
                mask[c] = true;
            }
        }
    }
    out
}

/// z-scores every cell; channels with zero spread map to 0.
pub fn normalize_zscore(grid: &ChannelGrid, stats: &ChannelStats) -> ChannelGrid {
    let mut out = grid.clone();
    for row in &mut out.values {
        for (v, (&mean, &sd)) in row.iter_mut().zip(stats.mean.iter().zip(&stats.sd)) {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
    out
}
