//! The hierarchical compound model for intermittent event records.
//!
//! Per block j: an event count `n_j ~ Binomial(λ, N_t)`, latent Weibull
//! parameters `(γ_j, δ_j)` drawn from Gumbel laws truncated to positive
//! support, and `n_j` Weibull magnitudes. Hyperpriors: independent inverse
//! gammas on `(μ_δ, σ_δ, μ_γ, σ_γ)` and a beta prior on `λ`.
//!
//! State layout (constrained): `[μ_δ, σ_δ, μ_γ, σ_γ, λ, γ_1..γ_J, δ_1..δ_J]`,
//! dimension `5 + 2J`. All coordinates are positive except `λ ∈ (0,1)`, so
//! the unconstrained map is log everywhere and logit for `λ`.

use super::priors::HmevPriors;
use super::{z_in_range, PosteriorModel};
use crate::data::{BlockData, Dataset};
use crate::dist::{CountDist, TruncGumbel, WeibullParams};
use crate::error::HmevError;
use crate::numeric::bisect;
use crate::transform::{Bijection, Transform};
use crate::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

/// Hyperparameters of the two latent Gumbel laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmevHypers {
    pub mu_delta: f64,
    pub sigma_delta: f64,
    pub mu_gamma: f64,
    pub sigma_gamma: f64,
}

impl HmevHypers {
    pub fn latent_scale_law(&self) -> Result<TruncGumbel> {
        TruncGumbel::new(self.mu_delta, self.sigma_delta)
    }

    pub fn latent_shape_law(&self) -> Result<TruncGumbel> {
        TruncGumbel::new(self.mu_gamma, self.sigma_gamma)
    }
}

/// Log-posterior of the hierarchical model over one dataset.
#[derive(Debug, Clone)]
pub struct HmevModel {
    priors: HmevPriors,
    transform: Transform,
    counts: Vec<u32>,
    /// Per block: (log-magnitudes, sum of log-magnitudes).
    log_mags: Vec<(Vec<f64>, f64)>,
    block_size: u32,
    n_blocks: usize,
}

impl HmevModel {
    pub fn new(data: &Dataset, priors: HmevPriors) -> Result<Self> {
        let n_blocks = data.n_blocks();
        let mut bijections = vec![Bijection::Log, Bijection::Log, Bijection::Log, Bijection::Log, Bijection::Logit];
        bijections.extend(std::iter::repeat(Bijection::Log).take(2 * n_blocks));
        let log_mags = data
            .blocks()
            .iter()
            .map(|b| {
                let logs: Vec<f64> = b.magnitudes().iter().map(|x| x.ln()).collect();
                let sum = logs.iter().sum();
                (logs, sum)
            })
            .collect();
        Ok(HmevModel {
            priors,
            transform: Transform::new(bijections),
            counts: data.blocks().iter().map(|b| b.n() as u32).collect(),
            log_mags,
            block_size: data.block_size(),
            n_blocks,
        })
    }

    pub fn priors(&self) -> &HmevPriors {
        &self.priors
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    /// Indices of the five hyperparameters in the state vector.
    pub const HYPER_NAMES: [&'static str; 5] =
        ["mu_delta", "sigma_delta", "mu_gamma", "sigma_gamma", "lambda"];

    fn lambda_log_lik_grad(&self, lambda: f64) -> (f64, f64) {
        // binomial occurrence terms share λ across blocks
        let occurrence = CountDist::Binomial { rate: lambda, trials: self.block_size };
        let mut lp = 0.0;
        let mut grad = 0.0;
        for &n in &self.counts {
            lp += occurrence.log_pmf(n);
            grad += occurrence.grad_log_pmf(n)[0];
        }
        (lp, grad)
    }
}

impl PosteriorModel for HmevModel {
    fn dim(&self) -> usize {
        5 + 2 * self.n_blocks
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Self::HYPER_NAMES.iter().map(|s| s.to_string()).collect();
        names.extend((1..=self.n_blocks).map(|j| format!("gamma_{j}")));
        names.extend((1..=self.n_blocks).map(|j| format!("delta_{j}")));
        names
    }

    fn transform(&self) -> &Transform {
        &self.transform
    }

    fn log_posterior_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(z.len(), self.dim(), "state dimension mismatch");
        if !z_in_range(z) {
            return f64::NEG_INFINITY;
        }
        let j = self.n_blocks;
        let c = self.transform.constrained_vec(z);
        let (mu_d, sg_d, mu_g, sg_g, lambda) = (c[0], c[1], c[2], c[3], c[4]);

        let latent_scale = match TruncGumbel::new(mu_d, sg_d) {
            Ok(d) => d,
            Err(_) => return f64::NEG_INFINITY,
        };
        let latent_shape = match TruncGumbel::new(mu_g, sg_g) {
            Ok(d) => d,
            Err(_) => return f64::NEG_INFINITY,
        };

        let mut lp = 0.0;
        let mut gc = vec![0.0; self.dim()]; // constrained-space gradient

        // hyperpriors
        lp += self.priors.mu_delta.log_pdf(mu_d);
        gc[0] += self.priors.mu_delta.grad_log_pdf(mu_d).x;
        lp += self.priors.sigma_delta.log_pdf(sg_d);
        gc[1] += self.priors.sigma_delta.grad_log_pdf(sg_d).x;
        lp += self.priors.mu_gamma.log_pdf(mu_g);
        gc[2] += self.priors.mu_gamma.grad_log_pdf(mu_g).x;
        lp += self.priors.sigma_gamma.log_pdf(sg_g);
        gc[3] += self.priors.sigma_gamma.grad_log_pdf(sg_g).x;
        lp += self.priors.lambda.log_pdf(lambda);
        gc[4] += self.priors.lambda.grad_log_pdf(lambda).x;

        // occurrence likelihood
        let (occ_lp, occ_grad) = self.lambda_log_lik_grad(lambda);
        lp += occ_lp;
        gc[4] += occ_grad;

        // latent priors and magnitude likelihood, block by block
        for b in 0..j {
            let shape = c[5 + b];
            let scale = c[5 + j + b];

            let gs = latent_shape.grad_log_pdf(shape);
            lp += latent_shape.log_pdf(shape);
            gc[2] += gs.loc;
            gc[3] += gs.scale;
            gc[5 + b] += gs.x;

            let gd = latent_scale.grad_log_pdf(scale);
            lp += latent_scale.log_pdf(scale);
            gc[0] += gd.loc;
            gc[1] += gd.scale;
            gc[5 + j + b] += gd.x;

            let (logs, sum_logs) = &self.log_mags[b];
            let n = logs.len();
            if n > 0 {
                let ln_scale = scale.ln();
                let nf = n as f64;
                // sum over events of (x/δ)^γ and (x/δ)^γ ln(x/δ)
                let mut sum_t = 0.0;
                let mut sum_tl = 0.0;
                for &lx in logs {
                    let l = lx - ln_scale;
                    let t = (shape * l).exp();
                    sum_t += t;
                    sum_tl += t * l;
                }
                lp += nf * (shape.ln() - ln_scale) + (shape - 1.0) * (sum_logs - nf * ln_scale)
                    - sum_t;
                gc[5 + b] += nf / shape + (sum_logs - nf * ln_scale) - sum_tl;
                gc[5 + j + b] += (shape / scale) * (sum_t - nf);
            }
        }

        lp += self.transform.log_jacobian(z);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.transform.chain_gradient(z, &gc, grad);
        lp
    }

    fn initial_state(&self) -> Result<Vec<f64>> {
        if self.counts.iter().all(|&n| n == 0) {
            return Err(HmevError::InvalidData(
                "cannot initialize: every block is empty".into(),
            ));
        }
        let means = self.priors.means();
        let mut state = vec![0.0; self.dim()];
        state[..4].copy_from_slice(&means[..4]);
        let mean_count =
            self.counts.iter().map(|&n| f64::from(n)).sum::<f64>() / self.n_blocks as f64;
        state[4] = (mean_count / f64::from(self.block_size)).clamp(1e-4, 1.0 - 1e-4);
        for b in 0..self.n_blocks {
            let (logs, _) = &self.log_mags[b];
            let fit = if logs.len() >= 3 {
                let mags: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
                weibull_moment_fit(&mags)
            } else {
                None
            };
            let (shape, scale) = fit.unwrap_or((means[2], means[0]));
            state[5 + b] = shape;
            state[5 + self.n_blocks + b] = scale;
        }
        Ok(self.transform.unconstrained_vec(&state))
    }
}

/// Method-of-moments Weibull fit: match the coefficient of variation to
/// `Γ(1+2/γ)/Γ(1+1/γ)² - 1`, then read the scale off the mean. Returns
/// `None` for degenerate samples.
pub fn weibull_moment_fit(magnitudes: &[f64]) -> Option<(f64, f64)> {
    if magnitudes.len() < 2 {
        return None;
    }
    let (mean, sd) = super::priors::mean_sd(magnitudes);
    if !(mean > 0.0) || !(sd > 0.0) {
        return None;
    }
    let target = (sd / mean).powi(2);
    let cv2 = |shape: f64| {
        let g1 = gamma(1.0 + 1.0 / shape);
        gamma(1.0 + 2.0 / shape) / (g1 * g1) - 1.0
    };
    // cv² is decreasing in the shape; bracket it over a generous range
    let (lo, hi) = (0.08, 50.0);
    if target >= cv2(lo) || target <= cv2(hi) {
        return None;
    }
    let shape = bisect(|s| cv2(s) - target, lo, hi, 1e-10, 200)?;
    let scale = mean / gamma(1.0 + 1.0 / shape);
    Some((shape, scale))
}

/// Forward-simulate a dataset from the hierarchy: per block draw latent
/// Weibull parameters from the truncated Gumbel laws, a binomial event
/// count, and the event magnitudes.
pub fn hmev_generate<R: Rng + ?Sized>(
    hypers: &HmevHypers,
    lambda: f64,
    block_size: u32,
    n_blocks: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if n_blocks == 0 {
        return Err(HmevError::InvalidData("need at least one block".into()));
    }
    let scale_law = hypers.latent_scale_law()?;
    let shape_law = hypers.latent_shape_law()?;
    if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
        return Err(HmevError::InvalidParameter {
            name: "occurrence rate",
            value: lambda,
            reason: "must lie in [0,1]",
        });
    }
    let count_law = if lambda > 0.0 && lambda < 1.0 {
        Some(CountDist::binomial(lambda, block_size)?)
    } else {
        None
    };
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let shape = shape_law.sample(rng);
        let scale = scale_law.sample(rng);
        let n = match &count_law {
            Some(law) => law.sample(rng),
            None => {
                if lambda == 0.0 {
                    0
                } else {
                    block_size
                }
            }
        };
        let magnitude_law = WeibullParams::new(shape, scale)?;
        let mags: Vec<f64> = (0..n).map(|_| magnitude_law.sample(rng)).collect();
        blocks.push(BlockData::new(mags)?);
    }
    Dataset::new(blocks, block_size)
}
