//! Daily-record ingestion: fixed-width archive parsing, quality control,
//! autocorrelation-based declustering, and train/test block splits.

mod decluster;
mod fixed_width;
mod qc;

pub use decluster::{decluster, DeclusterConfig, DeclusterReport};
pub use fixed_width::{parse_station_file, parse_station_path, write_station_file, PRECIP_ELEMENT};
pub use qc::{apply_qc, QcConfig, QcOutcome, QcReport};

use crate::data::Dataset;
use crate::error::HmevError;
use crate::rng::{derive_rng, domain};
use crate::Result;
use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::BufRead;

/// One day of one station record. The raw archive value is kept in tenths
/// of a millimetre so serialization is lossless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRecord {
    pub date: NaiveDate,
    /// Measured value in tenths of mm; `None` is the missing sentinel.
    pub tenths: Option<i32>,
    pub measurement_flag: char,
    pub quality_flag: char,
    pub source_flag: char,
}

impl DayRecord {
    pub fn missing(date: NaiveDate) -> Self {
        DayRecord { date, tenths: None, measurement_flag: ' ', quality_flag: ' ', source_flag: ' ' }
    }

    /// Value in millimetres, if present.
    pub fn mm(&self) -> Option<f64> {
        self.tenths.map(|t| f64::from(t) / 10.0)
    }
}

/// A station's daily series with strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: String,
    pub days: Vec<DayRecord>,
}

impl StationRecord {
    pub fn new(id: String, days: Vec<DayRecord>) -> Result<Self> {
        for pair in days.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(HmevError::InvalidData(format!(
                    "dates must be strictly increasing; {} follows {}",
                    pair[1].date, pair[0].date
                )));
            }
        }
        Ok(StationRecord { id, days })
    }

    /// Calendar years present in the record, ascending.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.days.iter().map(|d| d.date.year()).collect();
        years.dedup();
        years
    }

    /// Days belonging to one calendar year.
    pub fn days_of_year(&self, year: i32) -> impl Iterator<Item = &DayRecord> {
        self.days.iter().filter(move |d| d.date.year() == year)
    }
}

/// Number of calendar days in a year.
pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// Read a plain two-column `date,mm` CSV (header optional, ISO dates) as a
/// station record, for data that does not come from a fixed-width archive.
pub fn read_csv_daily<R: BufRead>(reader: R, station_id: &str) -> Result<StationRecord> {
    let mut days = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (date_s, value_s) = line.split_once(',').ok_or_else(|| HmevError::Parse {
            line: i + 1,
            message: "expected date,mm".into(),
        })?;
        let date_s = date_s.trim();
        if i == 0 && date_s.eq_ignore_ascii_case("date") {
            continue;
        }
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d").map_err(|e| HmevError::Parse {
            line: i + 1,
            message: format!("bad date {date_s}: {e}"),
        })?;
        let value_s = value_s.trim();
        let tenths = if value_s.is_empty() || value_s.eq_ignore_ascii_case("na") {
            None
        } else {
            let mm: f64 = value_s.parse().map_err(|_| HmevError::Parse {
                line: i + 1,
                message: format!("bad value {value_s}"),
            })?;
            Some((mm * 10.0).round() as i32)
        };
        days.push(DayRecord {
            date,
            tenths,
            measurement_flag: ' ',
            quality_flag: ' ',
            source_flag: ' ',
        });
    }
    StationRecord::new(station_id.to_string(), days)
}

/// How to divide a block dataset into training and validation years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// First `m_train` blocks train; every later block is held out.
    FirstYears { m_train: usize },
    /// Disjoint random year subsets, reproducible from `(seed, replicate)`.
    Random { m_train: usize, m_test: usize, replicate: u64 },
}

/// Split a block dataset into train and test datasets.
pub fn split_train_test(data: &Dataset, mode: SplitMode, seed: u64) -> Result<(Dataset, Dataset)> {
    let j = data.n_blocks();
    let take = |idx: &[usize]| -> Result<Dataset> {
        Dataset::new(idx.iter().map(|&i| data.blocks()[i].clone()).collect(), data.block_size())
    };
    match mode {
        SplitMode::FirstYears { m_train } => {
            if m_train == 0 || m_train >= j {
                return Err(HmevError::InvalidData(format!(
                    "first-years split needs 0 < m_train < {j}, got {m_train}"
                )));
            }
            let train: Vec<usize> = (0..m_train).collect();
            let test: Vec<usize> = (m_train..j).collect();
            Ok((take(&train)?, take(&test)?))
        }
        SplitMode::Random { m_train, m_test, replicate } => {
            if m_train == 0 || m_test == 0 || m_train + m_test > j {
                return Err(HmevError::InvalidData(format!(
                    "random split needs m_train + m_test <= {j}, got {m_train} + {m_test}"
                )));
            }
            let mut rng = derive_rng(seed, &[domain::SPLIT, replicate]);
            let mut order: Vec<usize> = (0..j).collect();
            order.shuffle(&mut rng);
            let mut train: Vec<usize> = order[..m_train].to_vec();
            let mut test: Vec<usize> = order[m_train..m_train + m_test].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok((take(&train)?, take(&test)?))
        }
    }
}
