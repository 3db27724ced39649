//! Serial-dependence declustering.
//!
//! The sample autocorrelation of the daily series (missing days as zero)
//! fixes a window half-width `τ_c`: the smallest lag at which the ACF drops
//! below the cutoff. A wet day then survives as an event only if it is
//! strictly larger than every other value within `±τ_c` days of the same
//! year (ties: the earliest day wins). Windows never cross year boundaries,
//! which guarantees each year's maximum survives declustering.

use super::{QcConfig, StationRecord};
use crate::data::{BlockData, Dataset};
use crate::error::HmevError;
use crate::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeclusterConfig {
    /// ACF cutoff `c`.
    pub acf_cutoff: f64,
    /// Largest lag searched for the cutoff crossing (days).
    pub max_lag: usize,
}

impl Default for DeclusterConfig {
    fn default() -> Self {
        DeclusterConfig { acf_cutoff: 0.1, max_lag: 30 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeclusterReport {
    pub station: String,
    /// Selected window half-width (days).
    pub tau: usize,
    /// True when no lag under `max_lag` fell below the cutoff and `τ_c`
    /// capped at `max_lag`.
    pub tau_capped: bool,
    /// ACF at lags 1..=max_lag.
    pub acf: Vec<f64>,
    pub years: Vec<i32>,
    pub events_per_year: Vec<usize>,
}

/// Biased-normalization sample autocorrelation at lags 1..=max_lag.
/// Missing values enter as zero; lag 0 is excluded from the cutoff search.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    (1..=max_lag)
        .map(|lag| {
            if lag >= n || denom == 0.0 {
                return 0.0;
            }
            let mut num = 0.0;
            for i in 0..n - lag {
                num += (series[i] - mean) * (series[i + lag] - mean);
            }
            num / denom
        })
        .collect()
}

/// Per-year daily value arrays (missing as zero), in retained-year order.
fn yearly_series(record: &StationRecord) -> Vec<(i32, Vec<f64>)> {
    record
        .years()
        .into_iter()
        .map(|year| {
            let series: Vec<f64> =
                record.days_of_year(year).map(|d| d.mm().unwrap_or(0.0)).collect();
            (year, series)
        })
        .collect()
}

/// Keep, within one year's series, the wet days that dominate their
/// `±tau` neighborhood (strict dominance, earliest-wins ties).
pub(crate) fn window_events(series: &[f64], tau: usize, wet_threshold: f64) -> Vec<f64> {
    let n = series.len();
    let mut events = Vec::new();
    'day: for t in 0..n {
        let v = series[t];
        if v <= wet_threshold {
            continue;
        }
        let lo = t.saturating_sub(tau);
        let hi = (t + tau).min(n - 1);
        for s in lo..=hi {
            if s == t {
                continue;
            }
            if series[s] > v || (series[s] == v && s < t) {
                continue 'day;
            }
        }
        events.push(v);
    }
    events
}

/// Decluster a quality-controlled record into per-year event blocks.
pub fn decluster(
    record: &StationRecord,
    config: &DeclusterConfig,
    qc: &QcConfig,
) -> Result<(Dataset, DeclusterReport)> {
    if record.days.is_empty() {
        return Err(HmevError::InvalidData("cannot decluster an empty record".into()));
    }
    if !(config.acf_cutoff > 0.0 && config.acf_cutoff < 1.0) {
        return Err(HmevError::InvalidParameter {
            name: "acf cutoff",
            value: config.acf_cutoff,
            reason: "must lie in (0,1)",
        });
    }
    let per_year = yearly_series(record);
    let full: Vec<f64> = per_year.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let acf = autocorrelation(&full, config.max_lag);
    let (tau, tau_capped) = match acf.iter().position(|&r| r < config.acf_cutoff) {
        Some(idx) => (idx + 1, false),
        None => (config.max_lag, true),
    };

    let mut blocks = Vec::with_capacity(per_year.len());
    let mut events_per_year = Vec::with_capacity(per_year.len());
    let mut years = Vec::with_capacity(per_year.len());
    for (year, series) in &per_year {
        let events = window_events(series, tau, qc.wet_threshold_mm);
        events_per_year.push(events.len());
        years.push(*year);
        blocks.push(BlockData::new(events)?);
    }
    let report = DeclusterReport {
        station: record.id.clone(),
        tau,
        tau_capped,
        acf,
        years,
        events_per_year,
    };
    Ok((Dataset::new(blocks, crate::DEFAULT_BLOCK_SIZE)?, report))
}
