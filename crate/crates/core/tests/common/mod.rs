#![allow(dead_code)]

use icu_core::data::{generate_synthetic_cohort, SyntheticConfig};
use icu_core::preprocess::{
    apply_exclusions, compute_channel_stats, finalize_grid, interpolated_grids, ChannelStats,
    Frame, LabeledWindow,
};

/// Normalized windows from a planted-signal synthetic cohort.
pub fn planted_windows(
    n_stays: usize,
    mortality_rate: f64,
    frame: Frame,
    seed: u64,
) -> (Vec<LabeledWindow>, ChannelStats) {
    let cfg = SyntheticConfig {
        n_stays,
        mortality_rate,
        frame_signal_strength: 3.0,
        missing_rate: 0.2,
        seed,
    };
    let (cohort, obs) = generate_synthetic_cohort(&cfg).unwrap();
    let cohort = apply_exclusions(&cohort);
    let grids = interpolated_grids(&cohort, &obs, frame);
    let stats = compute_channel_stats(&grids).unwrap();
    let windows = grids
        .iter()
        .zip(&cohort)
        .map(|(g, e)| LabeledWindow::new(finalize_grid(g, &stats), e))
        .collect();
    (windows, stats)
}
