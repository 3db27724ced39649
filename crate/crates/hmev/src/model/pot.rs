//! Bayesian peaks-over-threshold model: Poisson exceedance counts per block
//! and generalized Pareto excesses over a fixed threshold.

use super::priors::PotPriors;
use super::{z_in_range, PosteriorModel};
use crate::data::Dataset;
use crate::dist::GpdParams;
use crate::error::HmevError;
use crate::transform::{Bijection, Transform};
use crate::Result;
use statrs::function::gamma::ln_gamma;

/// Select the POT threshold as the empirical `q`-quantile (type-7, linear
/// interpolation) of all positive declustered magnitudes. Fixed before
/// inference and never re-estimated.
pub fn threshold_select(data: &Dataset, quantile_level: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&quantile_level) || !quantile_level.is_finite() {
        return Err(HmevError::InvalidParameter {
            name: "threshold quantile level",
            value: quantile_level,
            reason: "must lie in [0,1]",
        });
    }
    let mut mags = data.all_magnitudes();
    if mags.len() < 30 {
        return Err(HmevError::InvalidData(format!(
            "threshold selection needs at least 30 events, got {}; use a longer record or a lower quantile",
            mags.len()
        )));
    }
    mags.sort_by(f64::total_cmp);
    let h = (mags.len() - 1) as f64 * quantile_level;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    Ok(if lo + 1 < mags.len() { mags[lo] + frac * (mags[lo + 1] - mags[lo]) } else { mags[lo] })
}

/// Poisson–GPD log-posterior with state `[λ_p, σ_u, ξ]` (per-block
/// exceedance rate, excess scale, shape) at a fixed threshold.
#[derive(Debug, Clone)]
pub struct PotModel {
    threshold: f64,
    counts: Vec<u32>,
    excesses: Vec<f64>,
    priors: PotPriors,
    transform: Transform,
    /// Σ_j ln(k_j!) of the Poisson mass, fixed by the data.
    ln_count_factorials: f64,
}

impl PotModel {
    /// Extract exceedances of `threshold` from the dataset.
    pub fn from_dataset(data: &Dataset, threshold: f64) -> Result<Self> {
        let mut counts = Vec::with_capacity(data.n_blocks());
        let mut excesses = Vec::new();
        for block in data.blocks() {
            let mut k = 0;
            for &x in block.magnitudes() {
                if x > threshold {
                    k += 1;
                    excesses.push(x - threshold);
                }
            }
            counts.push(k);
        }
        if excesses.is_empty() {
            return Err(HmevError::InvalidData(format!(
                "no events exceed the threshold {threshold}; lower the threshold quantile"
            )));
        }
        let mean_count = excesses.len() as f64 / data.n_blocks() as f64;
        let priors = PotPriors::from_exceedances(mean_count, &excesses)?;
        Self::new(threshold, counts, excesses, priors)
    }

    pub fn new(threshold: f64, counts: Vec<u32>, excesses: Vec<f64>, priors: PotPriors) -> Result<Self> {
        if counts.is_empty() {
            return Err(HmevError::InvalidData("POT needs at least one block".into()));
        }
        let total: u32 = counts.iter().sum();
        if total as usize != excesses.len() {
            return Err(HmevError::InvalidData(format!(
                "exceedance counts sum to {total} but {} excesses were supplied",
                excesses.len()
            )));
        }
        if excesses.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(HmevError::InvalidData("excesses must be finite and positive".into()));
        }
        let ln_count_factorials =
            counts.iter().map(|&k| ln_gamma(f64::from(k) + 1.0)).sum();
        Ok(PotModel {
            threshold,
            counts,
            excesses,
            priors,
            transform: Transform::new(vec![Bijection::Log, Bijection::Log, Bijection::Identity]),
            ln_count_factorials,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn priors(&self) -> &PotPriors {
        &self.priors
    }

    pub fn mean_exceedance_count(&self) -> f64 {
        self.excesses.len() as f64 / self.counts.len() as f64
    }
}

impl PosteriorModel for PotModel {
    fn dim(&self) -> usize {
        3
    }

    fn param_names(&self) -> Vec<String> {
        vec!["lambda_p".into(), "sigma_u".into(), "xi".into()]
    }

    fn transform(&self) -> &Transform {
        &self.transform
    }

    fn log_posterior_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(z.len(), 3, "state dimension mismatch");
        if !z_in_range(z) {
            return f64::NEG_INFINITY;
        }
        let c = self.transform.constrained_vec(z);
        let (rate, scale, shape) = (c[0], c[1], c[2]);
        let excess_law = match GpdParams::new(0.0, scale, shape) {
            Ok(law) => law,
            Err(_) => return f64::NEG_INFINITY,
        };

        let mut lp = 0.0;
        let mut gc = [0.0; 3];

        // Poisson counts: Σ_j k_j ln λ_p - J λ_p - Σ_j ln k_j!
        let total: f64 = self.counts.iter().map(|&k| f64::from(k)).sum();
        let j = self.counts.len() as f64;
        lp += total * rate.ln() - j * rate - self.ln_count_factorials;
        gc[0] += total / rate - j;

        // GPD excesses
        for &e in &self.excesses {
            let ll = excess_law.log_pdf(e);
            if ll == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            lp += ll;
            let g = excess_law.grad_log_pdf(e);
            gc[1] += g.scale;
            gc[2] += g.shape;
        }

        // priors
        lp += self.priors.rate.log_pdf(rate);
        gc[0] += self.priors.rate.grad_log_pdf(rate).x;
        lp += self.priors.scale.log_pdf(scale);
        gc[1] += self.priors.scale.grad(scale);
        lp += self.priors.shape.log_pdf(shape);
        gc[2] += self.priors.shape.grad(shape);

        lp += self.transform.log_jacobian(z);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.transform.chain_gradient(z, &gc, grad);
        lp
    }

    fn initial_state(&self) -> Result<Vec<f64>> {
        let mean_excess = self.excesses.iter().sum::<f64>() / self.excesses.len() as f64;
        let rate0 = self.mean_exceedance_count().max(1e-3);
        Ok(self
            .transform
            .unconstrained_vec(&[rate0, mean_excess.max(1e-8), super::priors::XI_PRIOR_MEAN]))
    }
}
