use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::data::VitalChannel;
use crate::preprocess::ChannelGrid;

pub const POINT_TABLE_FORMAT: &str = "# format: icu-points v1";

const SAPS2_TABLE: &str = include_str!("../../data/saps2_points.tsv");
const SOFA_TABLE: &str = include_str!("../../data/sofa_points.tsv");

/// SAPS-II components with no source among the monitored channels.
const SAPS2_NOT_ASSESSED: [&str; 7] = [
    "pao2_fio2",
    "urine_output",
    "sodium",
    "potassium",
    "bicarbonate",
    "chronic_diseases",
    "admission_type",
];
const SOFA_NOT_ASSESSED: [&str; 3] = ["respiration", "coagulation", "renal"];

/// Oldest age accepted by the score calculators.
const MAX_AGE: f64 = 130.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    Age,
    Channel(VitalChannel),
}

/// Points for values in `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointBand {
    pub lower: f64,
    pub upper: f64,
    pub points: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTable {
    pub name: String,
    pub source: ScoreSource,
    /// Sorted, contiguous, covering the whole real line.
    pub bands: Vec<PointBand>,
}

impl ComponentTable {
    pub fn points(&self, value: f64) -> u32 {
        self.bands
            .iter()
            .find(|b| value >= b.lower && value < b.upper)
            .map_or(0, |b| b.points)
    }

    pub fn max_points(&self) -> u32 {
        self.bands.iter().map(|b| b.points).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTable {
    pub components: Vec<ComponentTable>,
}

impl PointTable {
    pub fn component(&self, name: &str) -> Option<&ComponentTable> {
        self.components.iter().find(|c| c.name == name)
    }
}

fn parse_bound(raw: &str, line: usize) -> Result<f64, BaselineError> {
    match raw {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" => Ok(f64::INFINITY),
        _ => raw.parse::<f64>().map_err(|_| BaselineError::Table {
            line,
            reason: format!("bad bound `{raw}`"),
        }),
    }
}

/// Reads a versioned tab-separated point table.
pub fn parse_point_table(text: &str) -> Result<PointTable, BaselineError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == POINT_TABLE_FORMAT => {}
        _ => {
            return Err(BaselineError::Table {
                line: 1,
                reason: format!("missing `{POINT_TABLE_FORMAT}` header"),
            })
        }
    }
    let mut components: Vec<ComponentTable> = Vec::new();
    for (k, raw) in lines {
        let line = k + 1;
        let raw = raw.trim_end();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let err = |reason: String| BaselineError::Table { line, reason };
        let [name, source, lower, upper, points] = fields[..] else {
            return Err(err(format!(
                "expected 5 tab-separated fields, found {}",
                fields.len()
            )));
        };
        let source = if source == "age" {
            ScoreSource::Age
        } else {
            ScoreSource::Channel(
                source
                    .parse()
                    .map_err(|_| err(format!("unknown source `{source}`")))?,
            )
        };
        let band = PointBand {
            lower: parse_bound(lower, line)?,
            upper: parse_bound(upper, line)?,
            points: points
                .parse()
                .map_err(|_| err(format!("bad points `{points}`")))?,
        };
        match components.last_mut() {
            Some(c) if c.name == name => {
                if c.source != source {
                    return Err(err(format!("component `{name}` changes source")));
                }
                let prev = c.bands.last().map_or(f64::NEG_INFINITY, |b| b.upper);
                if band.lower != prev {
                    return Err(err(format!(
                        "band starts at {} but previous ends at {prev}",
                        band.lower
                    )));
                }
                c.bands.push(band);
            }
            _ => {
                if components.iter().any(|c| c.name == name) {
                    return Err(err(format!("component `{name}` is not contiguous")));
                }
                if band.lower != f64::NEG_INFINITY {
                    return Err(err(format!("component `{name}` must start at -inf")));
                }
                components.push(ComponentTable {
                    name: name.to_string(),
                    source,
                    bands: vec![band],
                });
            }
        }
    }
    for c in &components {
        if c.bands.last().map(|b| b.upper) != Some(f64::INFINITY) {
            return Err(BaselineError::Table {
                line: 0,
                reason: format!("component `{}` must end at inf", c.name),
            });
        }
    }
    Ok(PointTable { components })
}

pub fn saps2_table() -> &'static PointTable {
    static TABLE: OnceLock<PointTable> = OnceLock::new();
    TABLE.get_or_init(|| parse_point_table(SAPS2_TABLE).expect("bundled SAPS-II table parses"))
}

pub fn sofa_table() -> &'static PointTable {
    static TABLE: OnceLock<PointTable> = OnceLock::new();
    TABLE.get_or_init(|| parse_point_table(SOFA_TABLE).expect("bundled SOFA table parses"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPoints {
    pub name: String,
    pub points: u32,
    /// Value that earned the points; `None` if the channel was never observed.
    pub worst_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub components: Vec<ComponentPoints>,
    pub not_assessed: Vec<String>,
    pub total: u32,
    /// SAPS-II only.
    pub mortality_probability: Option<f64>,
}

impl ScoreBreakdown {
    pub fn points(&self, component: &str) -> Option<u32> {
        self.components
            .iter()
            .find(|c| c.name == component)
            .map(|c| c.points)
    }
}

/// Published SAPS-II logistic transform:
/// logit = -7.7631 + 0.0737 S + 0.9971 ln(S + 1).
pub fn saps2_probability(total: u32) -> f64 {
    let s = f64::from(total);
    let logit = -7.7631 + 0.0737 * s + 0.9971 * (s + 1.0).ln();
    1.0 / (1.0 + (-logit).exp())
}

fn validate(grid: &ChannelGrid) -> Result<(), BaselineError> {
    for channel in VitalChannel::ALL {
        let (lo, hi) = channel.plausible_range();
        if let Some(value) = grid.observed(channel).find(|v| !(*v >= lo && *v <= hi)) {
            return Err(BaselineError::ImplausibleChannel {
                channel,
                value,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

fn score_components(
    table: &PointTable,
    grid: &ChannelGrid,
    age_years: Option<f64>,
) -> Vec<ComponentPoints> {
    table
        .components
        .iter()
        .map(|comp| {
            let values: Vec<f64> = match comp.source {
                ScoreSource::Age => age_years.into_iter().collect(),
                ScoreSource::Channel(ch) => grid.observed(ch).collect(),
            };
            // Worst value = most points; the earliest such value on ties.
            let mut best: Option<(u32, f64)> = None;
            for v in values {
                let pts = comp.points(v);
                if best.is_none_or(|(b, _)| pts > b) {
                    best = Some((pts, v));
                }
            }
            ComponentPoints {
                name: comp.name.clone(),
                points: best.map_or(0, |b| b.0),
                worst_value: best.map(|b| b.1),
            }
        })
        .collect()
}

/// Partial SAPS-II over the mask-true cells of a raw-unit grid plus age.
pub fn saps2_score(grid: &ChannelGrid, age_years: f64) -> Result<ScoreBreakdown, BaselineError> {
    validate(grid)?;
    if !(0.0..=MAX_AGE).contains(&age_years) {
        return Err(BaselineError::Implausible {
            what: "age_years".into(),
            value: age_years,
        });
    }
    let components = score_components(saps2_table(), grid, Some(age_years));
    let total = components.iter().map(|c| c.points).sum();
    Ok(ScoreBreakdown {
        components,
        not_assessed: SAPS2_NOT_ASSESSED.iter().map(|s| s.to_string()).collect(),
        total,
        mortality_probability: Some(saps2_probability(total)),
    })
}

/// Partial SOFA (cardiovascular, neurological, hepatic) over a raw-unit grid.
pub fn sofa_score(grid: &ChannelGrid) -> Result<ScoreBreakdown, BaselineError> {
    validate(grid)?;
    let components = score_components(sofa_table(), grid, None);
    let total = components.iter().map(|c| c.points).sum();
    Ok(ScoreBreakdown {
        components,
        not_assessed: SOFA_NOT_ASSESSED.iter().map(|s| s.to_string()).collect(),
        total,
        mortality_probability: None,
    })
}
