use serde::{Deserialize, Serialize};

use super::{ChannelGrid, PreprocessError};
use crate::data::CohortEntry;

pub const LOS_CLASSES: usize = 4;

const MIN_AGE: f64 = 16.0;
const MAX_AGE: f64 = 89.0;
const MIN_LOS_HOURS: f64 = 1.0;

/// Normalized window with its stage-1 label and, for deaths, the stage-2 class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledWindow {
    pub grid: ChannelGrid,
    pub mortality_label: u8,
    pub los_class: Option<u8>,
}

impl LabeledWindow {
    /// Builds the window for a stay. The LOS class is attached only for
    /// deaths with a positive death time.
    pub fn new(grid: ChannelGrid, entry: &CohortEntry) -> Self {
        Self {
            grid,
            mortality_label: label_mortality(entry),
            los_class: label_los(entry).ok(),
        }
    }
}

/// Keeps adults aged 16 to 89 whose stay lasted at least one hour.
pub fn apply_exclusions(cohort: &[CohortEntry]) -> Vec<CohortEntry> {
    cohort
        .iter()
        .filter(|e| (MIN_AGE..=MAX_AGE).contains(&e.age_years) && e.los_hours >= MIN_LOS_HOURS)
        .cloned()
        .collect()
}

/// 1 for in-hospital death (any recorded death time), 0 for survivors.
pub fn label_mortality(entry: &CohortEntry) -> u8 {
    u8::from(entry.death_time_hours.is_some())
}

/// Time-to-death class: <6 h, [6,12) h, [12,24) h, >= 24 h.
pub fn label_los(entry: &CohortEntry) -> Result<u8, PreprocessError> {
    match entry.death_time_hours {
        Some(t) if t > 0.0 => Ok(if t < 6.0 {
            0
        } else if t < 12.0 {
            1
        } else if t < 24.0 {
            2
        } else {
            3
        }),
        other => Err(PreprocessError::NoPositiveDeathTime {
            stay_id: entry.stay_id.clone(),
            death_time: other,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(age: f64, los: f64, death: Option<f64>) -> CohortEntry {
        CohortEntry {
            stay_id: format!("a{age}-l{los}"),
            patient_id: "p".into(),
            age_years: age,
            los_hours: los,
            death_time_hours: death,
        }
    }

    #[test]
    fn exclusion_boundaries() {
        let cohort = vec![
            entry(90.0, 48.0, None),
            entry(16.0, 1.5, None),
            entry(45.0, 0.5, None),
            entry(89.0, 1.0, None),
            entry(15.9, 10.0, None),
            entry(30.0, 0.99, None),
        ];
        let kept = apply_exclusions(&cohort);
        assert_eq!(kept, vec![cohort[1].clone(), cohort[3].clone()]);
        assert_eq!(apply_exclusions(&kept), kept);
    }

    #[test]
    fn mortality_labels() {
        assert_eq!(label_mortality(&entry(50.0, 5.0, None)), 0);
        assert_eq!(label_mortality(&entry(50.0, 50.0, Some(30.0))), 1);
        assert_eq!(label_mortality(&entry(50.0, 5.0, Some(0.5))), 1);
        assert_eq!(label_mortality(&entry(50.0, 5.0, Some(-1.0))), 1);
    }

    #[test]
    fn los_classes() {
        let l = |t| label_los(&entry(50.0, 100.0, Some(t))).unwrap();
        assert_eq!(l(5.9), 0);
        assert_eq!(l(6.0), 1);
        assert_eq!(l(11.999), 1);
        assert_eq!(l(12.0), 2);
        assert_eq!(l(24.0), 3);
        assert_eq!(l(0.001), 0);
        assert!(label_los(&entry(50.0, 5.0, None)).is_err());
        assert!(label_los(&entry(50.0, 5.0, Some(0.0))).is_err());
        assert!(label_los(&entry(50.0, 5.0, Some(-2.0))).is_err());
    }

    #[test]
    fn window_gets_los_only_for_positive_death() {
        let g = ChannelGrid::empty("s", super::super::Frame::H6);
        let w = LabeledWindow::new(g.clone(), &entry(50.0, 5.0, Some(7.0)));
        assert_eq!((w.mortality_label, w.los_class), (1, Some(1)));
        let w = LabeledWindow::new(g.clone(), &entry(50.0, 5.0, Some(0.0)));
        assert_eq!((w.mortality_label, w.los_class), (1, None));
        let w = LabeledWindow::new(g, &entry(50.0, 5.0, None));
        assert_eq!((w.mortality_label, w.los_class), (0, None));
    }
}
