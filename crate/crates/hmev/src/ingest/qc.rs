//! Quality control: flag filtering, missing-day year drops, and the
//! minimum-record-length gate.

use super::{days_in_year, StationRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcConfig {
    /// Years with more missing daily observations than this are dropped.
    pub max_missing_days: u32,
    /// Stations with fewer retained years are rejected.
    pub min_years: u32,
    /// Values at or below this (mm) count as dry days, matching the
    /// instrument sensitivity floor.
    pub wet_threshold_mm: f64,
    /// Treat any day with a non-blank quality flag as missing.
    pub drop_flagged: bool,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig { max_missing_days: 30, min_years: 100, wet_threshold_mm: 0.3, drop_flagged: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QcReport {
    pub station: String,
    pub flagged_values_removed: usize,
    /// (year, missing-day count) of every dropped year.
    pub dropped_years: Vec<(i32, u32)>,
    pub retained_years: Vec<i32>,
    /// Why the station was rejected, when it was.
    pub rejection: Option<String>,
}

#[derive(Debug, Clone)]
pub enum QcOutcome {
    Accepted { record: StationRecord, report: QcReport },
    Rejected { report: QcReport },
}

impl QcOutcome {
    pub fn report(&self) -> &QcReport {
        match self {
            QcOutcome::Accepted { report, .. } | QcOutcome::Rejected { report } => report,
        }
    }

    pub fn accepted(self) -> Option<(StationRecord, QcReport)> {
        match self {
            QcOutcome::Accepted { record, report } => Some((record, report)),
            QcOutcome::Rejected { .. } => None,
        }
    }
}

/// Apply quality control. Flagged values become missing, years with too
/// many missing days are dropped entirely, and a station with too few
/// retained years is rejected (a result, not an error). Idempotent.
pub fn apply_qc(record: &StationRecord, config: &QcConfig) -> QcOutcome {
    use chrono::Datelike;
    let mut flagged_removed = 0usize;
    let cleaned: Vec<super::DayRecord> = record
        .days
        .iter()
        .map(|d| {
            let mut d = *d;
            if config.drop_flagged && d.quality_flag != ' ' && d.tenths.is_some() {
                d.tenths = None;
                flagged_removed += 1;
            }
            d
        })
        .collect();

    // count missing days against the full calendar year, so partial years
    // at the record edges drop out naturally
    let mut dropped: Vec<(i32, u32)> = Vec::new();
    let mut retained: Vec<i32> = Vec::new();
    let years: Vec<i32> = {
        let mut y: Vec<i32> = cleaned.iter().map(|d| d.date.year()).collect();
        y.dedup();
        y
    };
    for &year in &years {
        let present =
            cleaned.iter().filter(|d| d.date.year() == year && d.tenths.is_some()).count() as u32;
        let missing = days_in_year(year) - present.min(days_in_year(year));
        if missing > config.max_missing_days {
            dropped.push((year, missing));
        } else {
            retained.push(year);
        }
    }

    let report = QcReport {
        station: record.id.clone(),
        flagged_values_removed: flagged_removed,
        dropped_years: dropped,
        retained_years: retained.clone(),
        rejection: None,
    };

    if (retained.len() as u32) < config.min_years {
        let mut report = report;
        report.rejection = Some(format!(
            "only {} retained years; at least {} required",
            retained.len(),
            config.min_years
        ));
        return QcOutcome::Rejected { report };
    }

    let days = cleaned.into_iter().filter(|d| retained.binary_search(&d.date.year()).is_ok()).collect();
    let record = StationRecord { id: record.id.clone(), days };
    QcOutcome::Accepted { record, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DayRecord;
    use chrono::{Datelike, NaiveDate};

    /// Build a full year of daily records at 1.0 mm, then apply overrides.
    fn full_year(year: i32, missing_days: &[u32], flagged_days: &[u32]) -> Vec<DayRecord> {
        let mut days = Vec::new();
        let mut date = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        while date.year() == year {
            let ordinal = chrono::Datelike::ordinal(&date);
            let mut d = DayRecord {
                date,
                tenths: Some(10),
                measurement_flag: ' ',
                quality_flag: ' ',
                source_flag: ' ',
            };
            if missing_days.contains(&ordinal) {
                d.tenths = None;
            }
            if flagged_days.contains(&ordinal) {
                d.quality_flag = 'G';
            }
            days.push(d);
            date = date.succ_opt().unwrap();
        }
        days
    }

    fn station(years: Vec<Vec<DayRecord>>) -> StationRecord {
        StationRecord::new("TEST".into(), years.into_iter().flatten().collect()).unwrap()
    }

    fn lenient() -> QcConfig {
        QcConfig { min_years: 1, ..QcConfig::default() }
    }

    #[test]
    fn thirty_missing_days_survive_thirty_one_do_not() {
        let keep: Vec<u32> = (1..=30).collect();
        let drop: Vec<u32> = (1..=31).collect();
        let rec = station(vec![full_year(2000, &keep, &[]), full_year(2001, &drop, &[])]);
        let outcome = apply_qc(&rec, &lenient());
        let (_, report) = outcome.accepted().unwrap();
        assert_eq!(report.retained_years, vec![2000]);
        assert_eq!(report.dropped_years, vec![(2001, 31)]);
    }

    #[test]
    fn flagged_values_count_as_missing() {
        // 20 genuinely missing + 15 flagged = 35 missing > 30: dropped
        let missing: Vec<u32> = (1..=20).collect();
        let flagged: Vec<u32> = (100..115).collect();
        let rec = station(vec![full_year(2000, &missing, &flagged), full_year(2001, &[], &[])]);
        let outcome = apply_qc(&rec, &lenient());
        let report = outcome.report();
        assert_eq!(report.dropped_years.len(), 1);
        assert_eq!(report.dropped_years[0].0, 2000);
        assert_eq!(report.flagged_values_removed, 15);
    }

    #[test]
    fn min_years_gate_rejects() {
        let rec = station(vec![full_year(2000, &[], &[])]);
        let config = QcConfig { min_years: 100, ..QcConfig::default() };
        match apply_qc(&rec, &config) {
            QcOutcome::Rejected { report } => {
                let reason = report.rejection.unwrap();
                assert!(reason.contains("1 retained"), "{reason}");
            }
            QcOutcome::Accepted { .. } => panic!("expected rejection"),
        }
        // 99 retained years at the default 100-year floor: still rejected
        let years: Vec<Vec<DayRecord>> = (1900..1999).map(|y| full_year(y, &[], &[])).collect();
        let rec = station(years);
        assert!(matches!(apply_qc(&rec, &QcConfig::default()), QcOutcome::Rejected { .. }));
    }

    #[test]
    fn qc_is_idempotent() {
        let missing: Vec<u32> = (1..=40).collect();
        let rec = station(vec![
            full_year(2000, &missing, &[]),
            full_year(2001, &[], &[5, 9]),
            full_year(2002, &[], &[]),
        ]);
        let once = apply_qc(&rec, &lenient()).accepted().unwrap().0;
        let twice = apply_qc(&once, &lenient()).accepted().unwrap().0;
        assert_eq!(once, twice);
    }
}
