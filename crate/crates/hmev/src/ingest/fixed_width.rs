//! Fixed-width daily archive format.
//!
//! Layout per line: station id in columns 1–11, year 12–15, month 16–17,
//! element code 18–21, then 31 groups of a 5-character right-justified
//! value and 3 flag characters (measurement, quality, source). Precipitation
//! lines carry element `PRCP` with values in tenths of mm and `-9999` as
//! the missing sentinel. Lines of other elements are skipped.

use super::{DayRecord, StationRecord};
use crate::error::HmevError;
use crate::Result;
use chrono::NaiveDate;
use std::io::{BufRead, Write};

pub const PRECIP_ELEMENT: &str = "PRCP";

const LINE_LEN: usize = 11 + 4 + 2 + 4 + 31 * 8;
const MISSING: i32 = -9999;

/// Parse one station's daily archive. All lines must carry the same
/// station id; non-`PRCP` elements are ignored; day slots that do not
/// exist in the calendar (e.g. Feb 30) are ignored regardless of content.
pub fn parse_station_file<R: BufRead>(reader: R) -> Result<StationRecord> {
    let mut id: Option<String> = None;
    let mut days: Vec<DayRecord> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        let n = lineno + 1;
        if line.len() != LINE_LEN {
            return Err(HmevError::Parse {
                line: n,
                message: format!("expected a {LINE_LEN}-character record, got {}", line.len()),
            });
        }
        let station = &line[0..11];
        match &id {
            None => id = Some(station.trim_end().to_string()),
            Some(prev) if prev != station.trim_end() => {
                return Err(HmevError::Parse {
                    line: n,
                    message: format!("mixed station ids: {prev} and {}", station.trim_end()),
                });
            }
            _ => {}
        }
        let element = &line[17..21];
        if element != PRECIP_ELEMENT {
            continue;
        }
        let year: i32 = line[11..15].trim().parse().map_err(|_| HmevError::Parse {
            line: n,
            message: format!("bad year field {:?}", &line[11..15]),
        })?;
        let month: u32 = line[15..17].trim().parse().map_err(|_| HmevError::Parse {
            line: n,
            message: format!("bad month field {:?}", &line[15..17]),
        })?;
        for day in 1..=31u32 {
            let offset = 21 + (day as usize - 1) * 8;
            let value_field = &line[offset..offset + 5];
            let value: i32 = value_field.trim().parse().map_err(|_| HmevError::Parse {
                line: n,
                message: format!("non-numeric value field {value_field:?} (day {day})"),
            })?;
            let flags: Vec<char> = line[offset + 5..offset + 8].chars().collect();
            let Some(date) = NaiveDate::from_ymd_opt(year, month, day) else {
                continue; // calendar-invalid slot
            };
            days.push(DayRecord {
                date,
                tenths: if value == MISSING { None } else { Some(value) },
                measurement_flag: flags[0],
                quality_flag: flags[1],
                source_flag: flags[2],
            });
        }
    }
    let id = id.ok_or_else(|| HmevError::Parse { line: 0, message: "empty station file".into() })?;
    StationRecord::new(id, days)
}

pub fn parse_station_path(path: &std::path::Path) -> Result<StationRecord> {
    let f = std::fs::File::open(path)?;
    parse_station_file(std::io::BufReader::new(f))
}

/// Serialize a record back to the archive layout: one `PRCP` line per
/// (year, month) present, missing or calendar-invalid slots as `-9999`
/// with blank flags. Values are right-justified in 5 characters, matching
/// the canonical archive form, so parse → write round-trips bit-exactly.
pub fn write_station_file<W: Write>(record: &StationRecord, mut w: W) -> Result<()> {
    use chrono::Datelike;
    let mut months: Vec<(i32, u32)> = Vec::new();
    for d in &record.days {
        let key = (d.date.year(), d.date.month());
        if months.last() != Some(&key) {
            months.push(key);
        }
    }
    for (year, month) in months {
        write!(w, "{:<11.11}{:04}{:02}{}", record.id, year, month, PRECIP_ELEMENT)?;
        for day in 1..=31u32 {
            let entry = NaiveDate::from_ymd_opt(year, month, day)
                .and_then(|date| record.days.iter().find(|d| d.date == date));
            match entry {
                Some(d) => write!(
                    w,
                    "{:5}{}{}{}",
                    d.tenths.unwrap_or(MISSING),
                    d.measurement_flag,
                    d.quality_flag,
                    d.source_flag
                )?,
                None => write!(w, "{MISSING:5}   ")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
