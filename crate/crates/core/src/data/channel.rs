use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const N_CHANNELS: usize = 11;

/// The eleven monitored variables. The discriminant is the column index used
/// in every grid and weight matrix, so the order must never change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VitalChannel {
    /// beats/min
    HeartRate = 0,
    /// mmHg
    SystolicBp = 1,
    /// mmHg
    DiastolicBp = 2,
    /// mmHg
    MeanBp = 3,
    /// breaths/min
    RespiratoryRate = 4,
    /// %
    OxygenSaturation = 5,
    /// points, 3-15
    GlasgowComaScore = 6,
    /// mg/dL
    BloodUreaNitrogen = 7,
    /// degrees Celsius
    Temperature = 8,
    /// 10^3/uL
    WhiteBloodCells = 9,
    /// mg/dL
    Bilirubin = 10,
}

impl VitalChannel {
    pub const ALL: [VitalChannel; N_CHANNELS] = [
        VitalChannel::HeartRate,
        VitalChannel::SystolicBp,
        VitalChannel::DiastolicBp,
        VitalChannel::MeanBp,
        VitalChannel::RespiratoryRate,
        VitalChannel::OxygenSaturation,
        VitalChannel::GlasgowComaScore,
        VitalChannel::BloodUreaNitrogen,
        VitalChannel::Temperature,
        VitalChannel::WhiteBloodCells,
        VitalChannel::Bilirubin,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Lowercase snake-case name used in the observations CSV.
    pub fn name(self) -> &'static str {
        match self {
            VitalChannel::HeartRate => "heart_rate",
            VitalChannel::SystolicBp => "systolic_bp",
            VitalChannel::DiastolicBp => "diastolic_bp",
            VitalChannel::MeanBp => "mean_bp",
            VitalChannel::RespiratoryRate => "respiratory_rate",
            VitalChannel::OxygenSaturation => "oxygen_saturation",
            VitalChannel::GlasgowComaScore => "glasgow_coma_score",
            VitalChannel::BloodUreaNitrogen => "blood_urea_nitrogen",
            VitalChannel::Temperature => "temperature",
            VitalChannel::WhiteBloodCells => "white_blood_cells",
            VitalChannel::Bilirubin => "bilirubin",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            VitalChannel::HeartRate => "beats/min",
            VitalChannel::SystolicBp | VitalChannel::DiastolicBp | VitalChannel::MeanBp => "mmHg",
            VitalChannel::RespiratoryRate => "breaths/min",
            VitalChannel::OxygenSaturation => "%",
            VitalChannel::GlasgowComaScore => "points",
            VitalChannel::BloodUreaNitrogen | VitalChannel::Bilirubin => "mg/dL",
            VitalChannel::Temperature => "degC",
            VitalChannel::WhiteBloodCells => "10^3/uL",
        }
    }

    /// Physically plausible closed range. Values outside it are rejected by
    /// the score calculators and never produced by the generator.
    pub fn plausible_range(self) -> (f64, f64) {
        match self {
            VitalChannel::HeartRate => (0.0, 300.0),
            VitalChannel::SystolicBp => (0.0, 300.0),
            VitalChannel::DiastolicBp => (0.0, 250.0),
            VitalChannel::MeanBp => (0.0, 250.0),
            VitalChannel::RespiratoryRate => (0.0, 80.0),
            VitalChannel::OxygenSaturation => (0.0, 100.0),
            VitalChannel::GlasgowComaScore => (3.0, 15.0),
            VitalChannel::BloodUreaNitrogen => (0.0, 300.0),
            VitalChannel::Temperature => (25.0, 45.0),
            VitalChannel::WhiteBloodCells => (0.0, 500.0),
            VitalChannel::Bilirubin => (0.0, 80.0),
        }
    }
}

impl fmt::Display for VitalChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VitalChannel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|c| c.name() == s).ok_or(())
    }
}
