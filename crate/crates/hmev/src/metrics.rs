//! Model-comparison metrics computed from posterior draws against observed
//! block maxima: fractional square error, quantile bias, credible-interval
//! width, in/out-of-sample log pointwise predictive density, log
//! pseudo-marginal likelihood, and the effective number of parameters.
//!
//! Quantile-based metrics share one per-draw quantile matrix per
//! (model, dataset) so they stay mutually consistent; density-based metrics
//! share one log-density matrix. Only maxima with empirical return time
//! above the cutoff `T̃` (default 2 blocks) enter the quantile metrics.

use crate::error::HmevError;
use crate::predictive::BlockMaxPredictive;
use crate::sampler::empirical_quantile_sorted;
use crate::Result;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default empirical-return-time cutoff (blocks).
pub const DEFAULT_T_TILDE: f64 = 2.0;

/// Block maxima with their plotting positions `p_j = rank/(M+1)` and
/// empirical return times `T_j = 1/(1-p_j)`. Ranks run 1..M over ascending
/// value; ties keep distinct ranks by stable sort on input order.
#[derive(Debug, Clone)]
pub struct MaximaSample {
    values: Vec<f64>,
    ranks: Vec<usize>,
}

impl MaximaSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(HmevError::InvalidData("need at least one block maximum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HmevError::InvalidData("block maxima must be finite".into()));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0; values.len()];
        for (r, &idx) in order.iter().enumerate() {
            ranks[idx] = r + 1;
        }
        Ok(MaximaSample { values, ranks })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Plotting position of maximum `j`.
    pub fn plotting_position(&self, j: usize) -> f64 {
        self.ranks[j] as f64 / (self.len() as f64 + 1.0)
    }

    /// Empirical return time of maximum `j`.
    pub fn return_time(&self, j: usize) -> f64 {
        1.0 / (1.0 - self.plotting_position(j))
    }

    /// Indices with `T_j > t_tilde`, ascending in plotting position.
    pub fn qualifying(&self, t_tilde: f64) -> Vec<usize> {
        let mut idx: Vec<usize> =
            (0..self.len()).filter(|&j| self.return_time(j) > t_tilde).collect();
        idx.sort_by(|&a, &b| self.ranks[a].cmp(&self.ranks[b]));
        idx
    }
}

/// Per-draw model quantiles at the qualifying plotting positions: one row
/// per posterior draw, one column per qualifying maximum.
#[derive(Debug, Clone)]
pub struct QuantileMatrix {
    values: Array2<f64>,
    /// Index into the `MaximaSample` for each column.
    columns: Vec<usize>,
}

impl QuantileMatrix {
    pub fn new(values: Array2<f64>, columns: Vec<usize>) -> Self {
        assert_eq!(values.ncols(), columns.len(), "one column per qualifying maximum");
        QuantileMatrix { values, columns }
    }

    pub fn n_draws(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Invert each draw's block-maxima cdf at every qualifying plotting
/// position. Computed once per (model, dataset) and shared by the quantile
/// metrics.
pub fn quantile_matrix<P: BlockMaxPredictive + ?Sized>(
    pred: &P,
    sample: &MaximaSample,
    t_tilde: f64,
) -> QuantileMatrix {
    let columns = sample.qualifying(t_tilde);
    let ps: Vec<f64> = columns.iter().map(|&j| sample.plotting_position(j)).collect();
    let b = pred.n_draws();
    let rows: Vec<Vec<f64>> =
        (0..b).into_par_iter().map(|i| pred.quantiles_sorted(i, &ps)).collect();
    let mut values = Array2::zeros((b, columns.len()));
    for (i, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            values[[i, c]] = v;
        }
    }
    QuantileMatrix::new(values, columns)
}

/// Log density of every maximum under every draw (all maxima, no cutoff).
pub fn log_density_matrix<P: BlockMaxPredictive + ?Sized>(
    pred: &P,
    sample: &MaximaSample,
) -> Array2<f64> {
    let b = pred.n_draws();
    let m = sample.len();
    let rows: Vec<Vec<f64>> = (0..b)
        .into_par_iter()
        .map(|i| sample.values().iter().map(|&y| pred.pdf_draw(i, y).ln()).collect())
        .collect();
    let mut out = Array2::zeros((b, m));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Fractional square error over maxima with `T_j > T̃`:
/// `(1/m_T) Σ_j sqrt{ (1/B) Σ_b ((q_bj - y_j)/y_j)² }`.
pub fn fse(qm: &QuantileMatrix, sample: &MaximaSample) -> Result<f64> {
    if qm.n_columns() == 0 {
        return Err(HmevError::MetricUndefined(
            "no maxima exceed the return-time cutoff; FSE is undefined".into(),
        ));
    }
    let b = qm.n_draws() as f64;
    let mut acc = 0.0;
    for (c, &j) in qm.columns.iter().enumerate() {
        let y = sample.values()[j];
        let mut sq = 0.0;
        for i in 0..qm.n_draws() {
            let rel = (qm.values[[i, c]] - y) / y;
            sq += rel * rel;
        }
        acc += (sq / b).sqrt();
    }
    Ok(acc / qm.n_columns() as f64)
}

/// Mean signed relative error and mean width of the central credible
/// interval of the per-draw quantiles, over qualifying maxima.
pub fn bias_and_width(
    qm: &QuantileMatrix,
    sample: &MaximaSample,
    band: (f64, f64),
) -> Result<(f64, f64)> {
    if qm.n_columns() == 0 {
        return Err(HmevError::MetricUndefined(
            "no maxima exceed the return-time cutoff; bias/width are undefined".into(),
        ));
    }
    let b = qm.n_draws() as f64;
    let mut bias = 0.0;
    let mut width = 0.0;
    let mut col = Vec::with_capacity(qm.n_draws());
    for (c, &j) in qm.columns.iter().enumerate() {
        let y = sample.values()[j];
        let mut rel_sum = 0.0;
        col.clear();
        for i in 0..qm.n_draws() {
            let q = qm.values[[i, c]];
            rel_sum += (q - y) / y;
            col.push(q);
        }
        bias += rel_sum / b;
        col.sort_by(f64::total_cmp);
        width += empirical_quantile_sorted(&col, band.1) - empirical_quantile_sorted(&col, band.0);
    }
    let m = qm.n_columns() as f64;
    Ok((bias / m, width / m))
}

/// `Σ_j log((1/B) Σ_b p(y_j | b))` from a log-density matrix, with the
/// count of maxima whose density vanished under every draw.
pub fn lppd(log_dens: &Array2<f64>) -> (f64, usize) {
    let b = log_dens.nrows() as f64;
    let mut total = 0.0;
    let mut zero_points = 0;
    for j in 0..log_dens.ncols() {
        let col = log_dens.column(j);
        let maxv = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if maxv == f64::NEG_INFINITY {
            zero_points += 1;
            total = f64::NEG_INFINITY;
            continue;
        }
        let sum: f64 = col.iter().map(|&l| (l - maxv).exp()).sum();
        total += maxv + sum.ln() - b.ln();
    }
    (total, zero_points)
}

/// `Σ_j log CPO_j` with `CPO_j` the harmonic mean of per-draw densities,
/// computed in log space with max-shift stabilization.
pub fn lpml(log_dens: &Array2<f64>) -> (f64, usize) {
    let b = log_dens.nrows() as f64;
    let mut total = 0.0;
    let mut zero_points = 0;
    for j in 0..log_dens.ncols() {
        let col = log_dens.column(j);
        // log Σ_b exp(-l_b), shifted by the largest term
        let max_neg = col.iter().map(|&l| -l).fold(f64::NEG_INFINITY, f64::max);
        if max_neg == f64::INFINITY {
            // some draw has zero density: CPO_j collapses to zero
            zero_points += 1;
            total = f64::NEG_INFINITY;
            continue;
        }
        let sum: f64 = col.iter().map(|&l| (-l - max_neg).exp()).sum();
        total -= max_neg + sum.ln() - b.ln();
    }
    (total, zero_points)
}

/// Effective number of parameters `lppd_in - lpml`, both on training maxima.
pub fn effective_params(lppd_in: f64, lpml_train: f64) -> f64 {
    lppd_in - lpml_train
}

/// JSON codec for scores that can legitimately be infinite (a maximum with
/// zero predictive density drives lppd to -inf); plain JSON numbers cannot
/// carry non-finite values.
mod score {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            v.to_string().serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// All metrics of one fitted model on one train/test pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub dataset: String,
    pub m_train: usize,
    pub m_test: usize,
    pub seed: u64,
    pub t_tilde: f64,
    #[serde(with = "score")]
    pub fse_in: f64,
    #[serde(with = "score")]
    pub fse_out: f64,
    #[serde(with = "score")]
    pub bias_in: f64,
    #[serde(with = "score")]
    pub bias_out: f64,
    #[serde(with = "score")]
    pub width_in: f64,
    #[serde(with = "score")]
    pub width_out: f64,
    #[serde(with = "score")]
    pub lppd_in: f64,
    #[serde(with = "score")]
    pub lppd_out: f64,
    #[serde(with = "score")]
    pub lpml_train: f64,
    #[serde(with = "score")]
    pub p_eff: f64,
    /// Maxima with zero predictive density under every draw (they push the
    /// affected log scores to -inf).
    pub zero_density_points: usize,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "model,dataset,m_train,m_test,seed,t_tilde,fse_in,fse_out,bias_in,bias_out,width_in,width_out,lppd_in,lppd_out,lpml_train,p_eff,zero_density_points";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.dataset,
            self.m_train,
            self.m_test,
            self.seed,
            self.t_tilde,
            self.fse_in,
            self.fse_out,
            self.bias_in,
            self.bias_out,
            self.width_in,
            self.width_out,
            self.lppd_in,
            self.lppd_out,
            self.lpml_train,
            self.p_eff,
            self.zero_density_points
        )
    }

    /// Append to a CSV ledger, writing the header when the file is new.
    pub fn append_to_ledger(&self, path: &std::path::Path) -> Result<()> {
        let new = !path.exists();
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        if new {
            writeln!(f, "{}", Self::CSV_HEADER)?;
        }
        writeln!(f, "{}", self.csv_row())?;
        Ok(())
    }
}

/// Evaluate one fitted model against training and held-out maxima. The
/// per-draw quantile and log-density matrices are computed once here and
/// feed every metric.
pub fn evaluate_model<P: BlockMaxPredictive + ?Sized>(
    pred: &P,
    model: &str,
    dataset: &str,
    seed: u64,
    train: &MaximaSample,
    test: &MaximaSample,
    t_tilde: f64,
    band: (f64, f64),
) -> Result<MetricsReport> {
    let qm_in = quantile_matrix(pred, train, t_tilde);
    let qm_out = quantile_matrix(pred, test, t_tilde);
    let fse_in = fse(&qm_in, train)?;
    let fse_out = fse(&qm_out, test)?;
    let (bias_in, width_in) = bias_and_width(&qm_in, train, band)?;
    let (bias_out, width_out) = bias_and_width(&qm_out, test, band)?;

    let ld_train = log_density_matrix(pred, train);
    let ld_test = log_density_matrix(pred, test);
    let (lppd_in, warn_in) = lppd(&ld_train);
    let (lppd_out, warn_out) = lppd(&ld_test);
    let (lpml_train, warn_lpml) = lpml(&ld_train);

    Ok(MetricsReport {
        model: model.to_string(),
        dataset: dataset.to_string(),
        m_train: train.len(),
        m_test: test.len(),
        seed,
        t_tilde,
        fse_in,
        fse_out,
        bias_in,
        bias_out,
        width_in,
        width_out,
        lppd_in,
        lppd_out,
        lpml_train,
        p_eff: effective_params(lppd_in, lpml_train),
        zero_density_points: warn_in + warn_out + warn_lpml,
    })
}
