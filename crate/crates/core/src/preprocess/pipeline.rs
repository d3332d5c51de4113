use std::collections::HashMap;

use super::{
    impute_mean, interpolate_linear, normalize_zscore, resample_to_grid, ChannelGrid, ChannelStats,
    Frame,
};
use crate::data::{CohortEntry, RawObservation};

/// Observations indexed by stay.
pub fn group_by_stay(obs: &[RawObservation]) -> HashMap<&str, Vec<RawObservation>> {
    let mut map: HashMap<&str, Vec<RawObservation>> = HashMap::new();
    for o in obs {
        map.entry(o.stay_id.as_str()).or_default().push(o.clone());
    }
    map
}

/// Gridded and linearly interpolated raw-unit windows, one per cohort entry
/// and in cohort order. Stays without observations give all-missing grids.
pub fn interpolated_grids(
    cohort: &[CohortEntry],
    obs: &[RawObservation],
    frame: Frame,
) -> Vec<ChannelGrid> {
    let by_stay = group_by_stay(obs);
    cohort
        .iter()
        .map(|e| {
            let stay_obs = by_stay
                .get(e.stay_id.as_str())
                .map_or(&[][..], Vec::as_slice);
            interpolate_linear(&resample_to_grid(&e.stay_id, stay_obs, frame))
        })
        .collect()
}

/// Mean imputation followed by z-normalization.
pub fn finalize_grid(grid: &ChannelGrid, stats: &ChannelStats) -> ChannelGrid {
    normalize_zscore(&impute_mean(grid, stats), stats)
}
