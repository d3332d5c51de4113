use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DataError, VitalChannel};

pub const OBSERVATIONS_HEADER: &str = "stay_id,channel,offset_minutes,value";
pub const COHORT_HEADER: &str = "stay_id,patient_id,age_years,los_hours,death_time_hours";

/// One timestamped measurement of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawObservation {
    pub stay_id: String,
    pub channel: VitalChannel,
    /// Minutes since ICU admission.
    pub offset_minutes: u32,
    pub value: f64,
}

/// Per-stay demographics and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortEntry {
    pub stay_id: String,
    pub patient_id: String,
    pub age_years: f64,
    pub los_hours: f64,
    /// Hours from admission to in-hospital death; `None` for survivors.
    pub death_time_hours: Option<f64>,
}

impl CohortEntry {
    pub fn is_survivor(&self) -> bool {
        self.death_time_hours.is_none()
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// Iterates (line, record) pairs after checking the header line.
fn rows<'a>(
    text: &'a str,
    header: &'static str,
) -> Result<impl Iterator<Item = Result<(u64, csv::StringRecord), DataError>> + 'a, DataError> {
    let mut records = reader(text).into_records();
    let first = match records.next() {
        None => {
            return Err(DataError::BadHeader {
                line: 1,
                expected: header,
                found: String::new(),
            })
        }
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    let found = first.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(DataError::BadHeader {
            line: 1,
            expected: header,
            found,
        });
    }
    let width = header.split(',').count();
    Ok(records.map(move |r| {
        let rec = r.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(DataError::MalformedRow {
                line,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((line, rec))
    }))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> DataError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    DataError::MalformedRow {
        line,
        reason: e.to_string(),
    }
}

fn parse_f64(line: u64, field: &'static str, raw: &str) -> Result<f64, DataError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::InvalidNumber {
            line,
            field,
            value: raw.to_string(),
        }),
    }
}

fn non_empty(line: u64, field: &str, raw: &str) -> Result<String, DataError> {
    if raw.is_empty() {
        Err(DataError::MalformedRow {
            line,
            reason: format!("empty {field}"),
        })
    } else {
        Ok(raw.to_string())
    }
}

/// Parses the observations CSV (`stay_id,channel,offset_minutes,value`).
pub fn parse_observations(text: &str) -> Result<Vec<RawObservation>, DataError> {
    let mut out = Vec::new();
    for row in rows(text, OBSERVATIONS_HEADER)? {
        let (line, rec) = row?;
        let stay_id = non_empty(line, "stay_id", &rec[0])?;
        let channel = rec[1]
            .parse::<VitalChannel>()
            .map_err(|_| DataError::UnknownChannel {
                line,
                name: rec[1].to_string(),
            })?;
        let offset: i64 = rec[2].parse().map_err(|_| DataError::InvalidNumber {
            line,
            field: "offset_minutes",
            value: rec[2].to_string(),
        })?;
        if offset < 0 {
            return Err(DataError::NegativeOffset {
                line,
                value: offset,
            });
        }
        let offset_minutes = u32::try_from(offset).map_err(|_| DataError::InvalidNumber {
            line,
            field: "offset_minutes",
            value: rec[2].to_string(),
        })?;
        let value = parse_f64(line, "value", &rec[3])?;
        out.push(RawObservation {
            stay_id,
            channel,
            offset_minutes,
            value,
        });
    }
    Ok(out)
}

/// Parses the cohort CSV. An empty `death_time_hours` marks a survivor.
pub fn parse_cohort(text: &str) -> Result<Vec<CohortEntry>, DataError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in rows(text, COHORT_HEADER)? {
        let (line, rec) = row?;
        let stay_id = non_empty(line, "stay_id", &rec[0])?;
        if !seen.insert(stay_id.clone()) {
            return Err(DataError::DuplicateStay { line, stay_id });
        }
        let patient_id = non_empty(line, "patient_id", &rec[1])?;
        let age_years = parse_f64(line, "age_years", &rec[2])?;
        let los_hours = parse_f64(line, "los_hours", &rec[3])?;
        if los_hours <= 0.0 {
            return Err(DataError::NonPositiveLos {
                line,
                value: los_hours,
            });
        }
        let death_time_hours = match &rec[4] {
            "" => None,
            raw => Some(parse_f64(line, "death_time_hours", raw)?),
        };
        out.push(CohortEntry {
            stay_id,
            patient_id,
            age_years,
            los_hours,
            death_time_hours,
        });
    }
    Ok(out)
}

/// Serializes observations in the format read by [`parse_observations`].
/// Float fields use the shortest representation that parses back exactly.
pub fn write_observations(obs: &[RawObservation]) -> String {
    let mut s = String::with_capacity(32 * (obs.len() + 1));
    s.push_str(OBSERVATIONS_HEADER);
    s.push('\n');
    for o in obs {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            o.stay_id, o.channel, o.offset_minutes, o.value
        );
    }
    s
}

pub fn write_cohort(cohort: &[CohortEntry]) -> String {
    let mut s = String::with_capacity(40 * (cohort.len() + 1));
    s.push_str(COHORT_HEADER);
    s.push('\n');
    for e in cohort {
        let _ = write!(
            s,
            "{},{},{},{},",
            e.stay_id, e.patient_id, e.age_years, e.los_hours
        );
        if let Some(d) = e.death_time_hours {
            let _ = write!(s, "{d}");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs_csv(rows: &str) -> String {
        format!("{OBSERVATIONS_HEADER}\n{rows}")
    }

    fn cohort_csv(rows: &str) -> String {
        format!("{COHORT_HEADER}\n{rows}")
    }

    #[test]
    fn single_observation_row() {
        let got = parse_observations(&obs_csv("s1,heart_rate,30,72.0\n")).unwrap();
        assert_eq!(
            got,
            vec![RawObservation {
                stay_id: "s1".into(),
                channel: VitalChannel::HeartRate,
                offset_minutes: 30,
                value: 72.0,
            }]
        );
    }

    #[test]
    fn unknown_channel_reports_line() {
        let err =
            parse_observations(&obs_csv("s1,heart_rate,0,70\ns1,pulse_ox,5,98\n")).unwrap_err();
        assert_eq!(
            err,
            DataError::UnknownChannel {
                line: 3,
                name: "pulse_ox".into()
            }
        );
        assert!(err.to_string().contains("unknown channel"));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_observations(&obs_csv("")).unwrap().is_empty());
        assert!(parse_cohort(&cohort_csv("")).unwrap().is_empty());
    }

    #[test]
    fn observation_errors() {
        assert!(matches!(
            parse_observations(&obs_csv("s1,heart_rate,-5,70\n")),
            Err(DataError::NegativeOffset { line: 2, value: -5 })
        ));
        assert!(matches!(
            parse_observations(&obs_csv("s1,heart_rate,5,abc\n")),
            Err(DataError::InvalidNumber {
                line: 2,
                field: "value",
                ..
            })
        ));
        assert!(matches!(
            parse_observations(&obs_csv("s1,heart_rate,5,inf\n")),
            Err(DataError::InvalidNumber { line: 2, .. })
        ));
        assert!(matches!(
            parse_observations(&obs_csv("s1,heart_rate,5\n")),
            Err(DataError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_observations("stay,channel,offset,value\n"),
            Err(DataError::BadHeader { .. })
        ));
    }

    #[test]
    fn cohort_rows() {
        let got = parse_cohort(&cohort_csv("s1,p1,67,48.0,\ns2,p2,81,30.0,12.5\n")).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].death_time_hours, None);
        assert!(got[0].is_survivor());
        assert_eq!(got[1].death_time_hours, Some(12.5));
        assert_eq!(got[1].age_years, 81.0);
    }

    #[test]
    fn cohort_errors() {
        assert!(matches!(
            parse_cohort(&cohort_csv("s1,p1,67,48.0,\ns1,p2,50,10,\n")),
            Err(DataError::DuplicateStay { line: 3, .. })
        ));
        assert!(matches!(
            parse_cohort(&cohort_csv("s1,p1,67,0,\n")),
            Err(DataError::NonPositiveLos { line: 2, .. })
        ));
        assert!(matches!(
            parse_cohort(&cohort_csv("s1,p1,sixty,4,\n")),
            Err(DataError::InvalidNumber {
                field: "age_years",
                ..
            })
        ));
    }
}
