//! Posterior-predictive machinery: per-draw block-maxima laws, return
//! times and levels, quantile curves with credible bands, and posterior
//! predictive simulation.
//!
//! Each retained posterior draw `b` induces a cdf `ζ⁽ᵇ⁾(y)` for a future
//! block maximum. For the hierarchical model this is the average
//! `(1/M_g) Σ_j F(y; θ_j)^{n_j}` over `M_g` simulated future blocks drawn
//! from that draw's hyperparameters (empty blocks contribute `F⁰ ≡ 1`);
//! the baselines use their closed-form block-maxima cdfs. The posterior
//! mean cdf averages `ζ⁽ᵇ⁾` over draws.

pub mod compound;

use crate::dist::{CountDist, GevParams, GpdParams};
use crate::error::HmevError;
use crate::model::HmevHypers;
use crate::numeric::brent_newton;
use crate::sampler::{empirical_quantile_sorted, PosteriorDraws};
use crate::Result;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default number of simulated future blocks per posterior draw.
pub const DEFAULT_M_G: usize = 50;

/// Sentinel returned when a per-draw quantile cannot be bracketed.
pub const RETURN_LEVEL_UNBOUNDED: f64 = f64::INFINITY;

/// A family of per-draw block-maxima laws.
pub trait BlockMaxPredictive: Sync {
    fn n_draws(&self) -> usize;

    /// `ζ⁽ᵇ⁾(y)`: probability that a future block maximum is ≤ y.
    fn cdf_draw(&self, b: usize, y: f64) -> f64;

    /// Density of the future block maximum under draw `b`.
    fn pdf_draw(&self, b: usize, y: f64) -> f64;

    /// Generalized inverse of `cdf_draw` at probability `p`.
    fn quantile_draw(&self, b: usize, p: f64) -> f64 {
        invert_cdf(|y| self.cdf_draw(b, y), |y| self.pdf_draw(b, y), p, self.scale_hint(), 0.0)
    }

    /// Typical magnitude used to seed bracket growth.
    fn scale_hint(&self) -> f64;

    /// Quantiles below this level are not physically resolved by the model
    /// (the POT cdf is flat below its threshold); `None` elsewhere.
    fn min_reportable_level(&self) -> Option<f64> {
        None
    }

    /// Per-draw quantiles at an ascending probability grid, reusing each
    /// root to bracket the next.
    fn quantiles_sorted(&self, b: usize, ps: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(ps.len());
        let mut guess = 0.0;
        for &p in ps {
            let q = invert_cdf(|y| self.cdf_draw(b, y), |y| self.pdf_draw(b, y), p, self.scale_hint(), guess);
            if q.is_finite() {
                guess = q;
            }
            out.push(q);
        }
        out
    }
}

/// Bracketed Newton inversion of a monotone cdf. `lo_hint` must sit at or
/// below the root (0 is always safe).
fn invert_cdf<C: Fn(f64) -> f64, D: Fn(f64) -> f64>(
    cdf: C,
    pdf: D,
    p: f64,
    scale: f64,
    lo_hint: f64,
) -> f64 {
    if cdf(0.0) >= p {
        // the cdf already meets the target at the origin (all-empty or
        // flat-below-threshold draws): the generalized inverse is 0
        return 0.0;
    }
    let mut lo = if lo_hint > 0.0 && cdf(lo_hint) < p { lo_hint } else { 0.0 };
    let mut hi = (if lo > 0.0 { lo } else { scale.max(1e-6) }).max(1e-6);
    let mut bracketed = false;
    for _ in 0..400 {
        if cdf(hi) >= p {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !bracketed {
        return RETURN_LEVEL_UNBOUNDED;
    }
    let start = if lo > 0.0 { lo } else { 0.5 * (lo + hi) };
    brent_newton(|y| (cdf(y) - p, pdf(y)), lo, hi, start, 1e-9, 0.0, 200)
        .unwrap_or(RETURN_LEVEL_UNBOUNDED)
}

/// One simulated future block for one posterior draw.
#[derive(Debug, Clone, Copy)]
struct FutureBlock {
    shape: f64,
    scale: f64,
    n: u32,
}

/// Predictive law of the hierarchical model: per posterior draw, `M_g`
/// future blocks simulated from that draw's hyperparameters.
#[derive(Debug, Clone)]
pub struct HmevPredictive {
    blocks: Vec<FutureBlock>,
    m_g: usize,
    n_draws: usize,
    scale_hint: f64,
    /// (hypers, λ) per draw, kept for posterior predictive simulation.
    states: Vec<(HmevHypers, f64)>,
    block_size: u32,
}

impl HmevPredictive {
    /// Simulate the future-block ensemble from fitted draws. Column layout
    /// must contain the five hyperparameters by name.
    pub fn from_draws(
        draws: &PosteriorDraws,
        m_g: usize,
        block_size: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let idx: Vec<usize> = ["mu_delta", "sigma_delta", "mu_gamma", "sigma_gamma", "lambda"]
            .iter()
            .map(|n| {
                draws.col(n).ok_or_else(|| {
                    HmevError::InvalidData(format!("draws are missing the {n} column"))
                })
            })
            .collect::<Result<_>>()?;
        let states: Vec<(HmevHypers, f64)> = (0..draws.n_draws())
            .map(|b| {
                let row = draws.draw(b);
                (
                    HmevHypers {
                        mu_delta: row[idx[0]],
                        sigma_delta: row[idx[1]],
                        mu_gamma: row[idx[2]],
                        sigma_gamma: row[idx[3]],
                    },
                    row[idx[4]],
                )
            })
            .collect();
        Self::from_states(&states, m_g, block_size, rng)
    }

    /// Simulate the ensemble from explicit `(hypers, λ)` states, one per
    /// posterior draw.
    ///
    /// The future blocks of every draw share one uniform basis (common
    /// random numbers, inverted through each draw's latent and count laws):
    /// each `ζ⁽ᵇ⁾` keeps its correct marginal distribution, but the finite-
    /// ensemble sampling error becomes common to all draws and cancels from
    /// credible-band widths instead of inflating them.
    pub fn from_states(
        states: &[(HmevHypers, f64)],
        m_g: usize,
        block_size: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if states.is_empty() || m_g == 0 {
            return Err(HmevError::InvalidData("need at least one draw and one future block".into()));
        }
        let basis: Vec<[f64; 3]> = (0..m_g)
            .map(|_| {
                [
                    crate::dist::open_unit(rng),
                    crate::dist::open_unit(rng),
                    crate::dist::open_unit(rng),
                ]
            })
            .collect();
        let mut blocks = Vec::with_capacity(states.len() * m_g);
        let mut scale_sum = 0.0;
        for (hypers, lambda) in states {
            let shape_law = hypers.latent_shape_law()?;
            let scale_law = hypers.latent_scale_law()?;
            let count_law = CountDist::binomial(lambda.clamp(1e-12, 1.0 - 1e-12), block_size)?;
            for u in &basis {
                let fb = FutureBlock {
                    shape: shape_law.quantile(u[0])?,
                    scale: scale_law.quantile(u[1])?,
                    n: count_law.quantile(u[2]),
                };
                scale_sum += fb.scale;
                blocks.push(fb);
            }
        }
        Ok(HmevPredictive {
            m_g,
            n_draws: states.len(),
            scale_hint: scale_sum / blocks.len() as f64,
            blocks,
            states: states.to_vec(),
            block_size,
        })
    }

    pub fn m_g(&self) -> usize {
        self.m_g
    }

    fn draw_blocks(&self, b: usize) -> &[FutureBlock] {
        &self.blocks[b * self.m_g..(b + 1) * self.m_g]
    }

    /// Replicate datasets from the generative law of each draw, for
    /// posterior predictive checks. `n_blocks` replicated blocks per draw.
    pub fn simulate_replicates(
        &self,
        n_blocks: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<PredictiveReplicate>> {
        let mut out = Vec::with_capacity(self.states.len());
        for (b, (hypers, lambda)) in self.states.iter().enumerate() {
            let data =
                crate::model::hmev_generate(hypers, *lambda, self.block_size, n_blocks, rng)?;
            out.push(PredictiveReplicate {
                draw: b,
                counts: data.counts().iter().map(|&n| n as u32).collect(),
                maxima: data.observed_maxima(),
                magnitudes: data.all_magnitudes(),
            });
        }
        Ok(out)
    }
}

impl BlockMaxPredictive for HmevPredictive {
    fn n_draws(&self) -> usize {
        self.n_draws
    }

    fn cdf_draw(&self, b: usize, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for fb in self.draw_blocks(b) {
            if fb.n == 0 {
                acc += 1.0; // empty block: its "maximum" lies below any y
            } else {
                let f = 1.0 - (-(y / fb.scale).powf(fb.shape)).exp();
                acc += f.powi(fb.n as i32);
            }
        }
        acc / self.m_g as f64
    }

    fn pdf_draw(&self, b: usize, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for fb in self.draw_blocks(b) {
            if fb.n == 0 {
                continue;
            }
            let t = (y / fb.scale).powf(fb.shape);
            let sf = (-t).exp();
            let f = 1.0 - sf;
            let pdf = (fb.shape / fb.scale) * (y / fb.scale).powf(fb.shape - 1.0) * sf;
            acc += f64::from(fb.n) * f.powi(fb.n as i32 - 1) * pdf;
        }
        acc / self.m_g as f64
    }

    fn scale_hint(&self) -> f64 {
        self.scale_hint
    }
}

/// Closed-form GEV predictive: one parameter triple per draw.
#[derive(Debug, Clone)]
pub struct GevPredictive {
    draws: Vec<GevParams>,
    scale_hint: f64,
}

impl GevPredictive {
    pub fn from_draws(draws: &PosteriorDraws) -> Result<Self> {
        let (mu, sigma, xi) = match (draws.col("mu"), draws.col("sigma"), draws.col("xi")) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(HmevError::InvalidData(
                    "draws are missing the mu/sigma/xi columns".into(),
                ))
            }
        };
        let params: Result<Vec<GevParams>> = (0..draws.n_draws())
            .map(|b| {
                let row = draws.draw(b);
                GevParams::new(row[mu], row[sigma], row[xi])
            })
            .collect();
        Self::new(params?)
    }

    pub fn new(draws: Vec<GevParams>) -> Result<Self> {
        if draws.is_empty() {
            return Err(HmevError::InvalidData("need at least one draw".into()));
        }
        let scale_hint =
            draws.iter().map(|d| d.loc().abs().max(d.scale())).sum::<f64>() / draws.len() as f64;
        Ok(GevPredictive { draws, scale_hint })
    }

    /// Sample block maxima from each draw (posterior predictive check).
    pub fn simulate_replicates(
        &self,
        n_blocks: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<PredictiveReplicate> {
        self.draws
            .iter()
            .enumerate()
            .map(|(b, law)| {
                let maxima: Vec<f64> = (0..n_blocks).map(|_| law.sample(rng)).collect();
                PredictiveReplicate { draw: b, counts: Vec::new(), maxima, magnitudes: Vec::new() }
            })
            .collect()
    }
}

impl BlockMaxPredictive for GevPredictive {
    fn n_draws(&self) -> usize {
        self.draws.len()
    }

    fn cdf_draw(&self, b: usize, y: f64) -> f64 {
        self.draws[b].cdf(y)
    }

    fn pdf_draw(&self, b: usize, y: f64) -> f64 {
        let lp = self.draws[b].log_pdf(y);
        if lp.is_finite() {
            lp.exp()
        } else {
            0.0
        }
    }

    fn quantile_draw(&self, b: usize, p: f64) -> f64 {
        self.draws[b].quantile(p).unwrap_or(RETURN_LEVEL_UNBOUNDED)
    }

    fn quantiles_sorted(&self, b: usize, ps: &[f64]) -> Vec<f64> {
        ps.iter().map(|&p| self.quantile_draw(b, p)).collect()
    }

    fn scale_hint(&self) -> f64 {
        self.scale_hint
    }
}

/// Poisson–GPD predictive: `ζ(y) = exp{-λ_p [1 + ξ(y-u)/σ_u]^{-1/ξ}}` above
/// the threshold and the zero-exceedance mass `exp(-λ_p)` flat below it.
#[derive(Debug, Clone)]
pub struct PotPredictive {
    /// (rate, excess law) per draw; the excess law is anchored at zero.
    draws: Vec<(f64, GpdParams)>,
    threshold: f64,
    scale_hint: f64,
}

impl PotPredictive {
    pub fn from_draws(draws: &PosteriorDraws, threshold: f64) -> Result<Self> {
        let (rate, sigma, xi) =
            match (draws.col("lambda_p"), draws.col("sigma_u"), draws.col("xi")) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    return Err(HmevError::InvalidData(
                        "draws are missing the lambda_p/sigma_u/xi columns".into(),
                    ))
                }
            };
        let params: Result<Vec<(f64, GpdParams)>> = (0..draws.n_draws())
            .map(|b| {
                let row = draws.draw(b);
                Ok((row[rate], GpdParams::new(0.0, row[sigma], row[xi])?))
            })
            .collect();
        Self::new(params?, threshold)
    }

    pub fn new(draws: Vec<(f64, GpdParams)>, threshold: f64) -> Result<Self> {
        if draws.is_empty() {
            return Err(HmevError::InvalidData("need at least one draw".into()));
        }
        let scale_hint = threshold.abs().max(
            draws.iter().map(|(_, g)| g.scale()).sum::<f64>() / draws.len() as f64,
        );
        Ok(PotPredictive { draws, threshold, scale_hint })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Sample exceedance processes per draw: counts and block maxima (only
    /// blocks with at least one exceedance produce a maximum).
    pub fn simulate_replicates(
        &self,
        n_blocks: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<PredictiveReplicate> {
        self.draws
            .iter()
            .enumerate()
            .map(|(b, (rate, law))| {
                let poisson = rand_distr::Poisson::new(rate.max(1e-12)).expect("positive rate");
                let mut counts = Vec::with_capacity(n_blocks);
                let mut maxima = Vec::new();
                let mut magnitudes = Vec::new();
                for _ in 0..n_blocks {
                    let k = poisson.sample(rng) as u32;
                    counts.push(k);
                    let mut block_max = f64::NEG_INFINITY;
                    for _ in 0..k {
                        let x = self.threshold + law.sample(rng);
                        magnitudes.push(x);
                        block_max = block_max.max(x);
                    }
                    if k > 0 {
                        maxima.push(block_max);
                    }
                }
                PredictiveReplicate { draw: b, counts, maxima, magnitudes }
            })
            .collect()
    }
}

impl BlockMaxPredictive for PotPredictive {
    fn n_draws(&self) -> usize {
        self.draws.len()
    }

    fn cdf_draw(&self, b: usize, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let (rate, law) = &self.draws[b];
        let sf = if y < self.threshold { 1.0 } else { law.sf(y - self.threshold) };
        (-rate * sf).exp()
    }

    fn pdf_draw(&self, b: usize, y: f64) -> f64 {
        if y <= self.threshold {
            return 0.0;
        }
        let (rate, law) = &self.draws[b];
        let e = y - self.threshold;
        let lp = law.log_pdf(e);
        if !lp.is_finite() {
            return 0.0;
        }
        rate * lp.exp() * self.cdf_draw(b, y)
    }

    fn quantile_draw(&self, b: usize, p: f64) -> f64 {
        let (rate, law) = &self.draws[b];
        if p <= (-rate).exp() {
            // the cdf is flat at exp(-λ_p) below the threshold; the
            // generalized inverse collapses to the origin
            return 0.0;
        }
        let sf_target = -p.ln() / rate;
        law.quantile(1.0 - sf_target).map_or(RETURN_LEVEL_UNBOUNDED, |e| self.threshold + e)
    }

    fn quantiles_sorted(&self, b: usize, ps: &[f64]) -> Vec<f64> {
        ps.iter().map(|&p| self.quantile_draw(b, p)).collect()
    }

    fn scale_hint(&self) -> f64 {
        self.scale_hint
    }

    fn min_reportable_level(&self) -> Option<f64> {
        Some(self.threshold)
    }
}

/// Posterior mean cdf `ζ̂(y) = (1/B) Σ_b ζ⁽ᵇ⁾(y)`.
pub fn posterior_mean_cdf<P: BlockMaxPredictive + ?Sized>(pred: &P, y: f64) -> f64 {
    let b = pred.n_draws();
    (0..b).map(|i| pred.cdf_draw(i, y)).sum::<f64>() / b as f64
}

/// Average recurrence interval `T̂_r(y) = 1/(1 - ζ̂(y))`, `+inf` when the
/// mean cdf saturates.
pub fn return_time<P: BlockMaxPredictive + ?Sized>(pred: &P, y: f64) -> f64 {
    let zeta = posterior_mean_cdf(pred, y);
    if zeta >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - zeta)
    }
}

/// Return level by inverting the posterior-mean cdf at `p = 1 - 1/T_r`.
pub fn return_level_mean_cdf<P: BlockMaxPredictive + ?Sized>(pred: &P, t_r: f64) -> Result<f64> {
    if !(t_r > 1.0) {
        return Err(HmevError::InvalidData(format!("return time must exceed one block, got {t_r}")));
    }
    let p = 1.0 - 1.0 / t_r;
    Ok(invert_cdf(
        |y| posterior_mean_cdf(pred, y),
        |y| (0..pred.n_draws()).map(|b| pred.pdf_draw(b, y)).sum::<f64>() / pred.n_draws() as f64,
        p,
        pred.scale_hint(),
        0.0,
    ))
}

/// Aggregated per-draw return levels at one return time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnLevelSummary {
    pub return_time: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    /// Draws whose quantile could not be bracketed (reported as +inf and
    /// excluded from the mean).
    pub unbounded_draws: usize,
}

/// Per-draw return levels `ζ⁽ᵇ⁾⁻¹(1 - 1/T_r)` and their aggregation.
pub fn return_level_draws<P: BlockMaxPredictive + ?Sized>(
    pred: &P,
    t_r: f64,
    band: (f64, f64),
) -> Result<(Vec<f64>, ReturnLevelSummary)> {
    if !(t_r > 1.0) {
        return Err(HmevError::InvalidData(format!("return time must exceed one block, got {t_r}")));
    }
    let p = 1.0 - 1.0 / t_r;
    let per_draw: Vec<f64> =
        (0..pred.n_draws()).into_par_iter().map(|b| pred.quantile_draw(b, p)).collect();
    let summary = summarize_levels(&per_draw, t_r, band);
    Ok((per_draw, summary))
}

fn summarize_levels(per_draw: &[f64], t_r: f64, band: (f64, f64)) -> ReturnLevelSummary {
    let finite: Vec<f64> = per_draw.iter().copied().filter(|v| v.is_finite()).collect();
    let unbounded = per_draw.len() - finite.len();
    let mut sorted = finite.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let (lower, upper) = if sorted.is_empty() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (
            empirical_quantile_sorted(&sorted, band.0),
            empirical_quantile_sorted(&sorted, band.1),
        )
    };
    ReturnLevelSummary { return_time: t_r, mean, lower, upper, unbounded_draws: unbounded }
}

/// Return-time grid with posterior mean quantiles and credible bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub return_times: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub band: (f64, f64),
}

impl QuantileCurve {
    /// Log-spaced return-time grid, the default reporting grid.
    pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
        let (a, b) = (t_min.ln(), t_max.ln());
        (0..points)
            .map(|i| (a + (b - a) * i as f64 / (points.max(2) - 1) as f64).exp())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &[(String, String)]) -> Result<()> {
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "return_time,mean,lower,upper")?;
        for i in 0..self.return_times.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.return_times[i], self.mean[i], self.lower[i], self.upper[i]
            )?;
        }
        Ok(())
    }
}

/// Build the quantile curve over a return-time grid from per-draw
/// quantiles: the mean of per-draw quantiles and their empirical band.
/// Grid points whose mean level falls below the model's reportable floor
/// (the POT threshold) are dropped.
pub fn quantile_curve<P: BlockMaxPredictive + ?Sized>(
    pred: &P,
    t_grid: &[f64],
    band: (f64, f64),
) -> Result<QuantileCurve> {
    if t_grid.iter().any(|&t| !(t > 1.0)) {
        return Err(HmevError::InvalidData("return-time grid must exceed one block".into()));
    }
    if !(band.0 < band.1 && band.0 > 0.0 && band.1 < 1.0) {
        return Err(HmevError::InvalidData("credible band levels must satisfy 0 < lo < hi < 1".into()));
    }
    let ps: Vec<f64> = t_grid.iter().map(|&t| 1.0 - 1.0 / t).collect();
    let b = pred.n_draws();
    // per draw, invert over the whole ascending grid
    let per_draw: Vec<Vec<f64>> =
        (0..b).into_par_iter().map(|i| pred.quantiles_sorted(i, &ps)).collect();

    let mut curve = QuantileCurve {
        return_times: Vec::new(),
        mean: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        band,
    };
    let floor = pred.min_reportable_level();
    for (g, &t) in t_grid.iter().enumerate() {
        let col: Vec<f64> = per_draw.iter().map(|row| row[g]).collect();
        let summary = summarize_levels(&col, t, band);
        if let Some(floor) = floor {
            if summary.mean < floor {
                continue;
            }
        }
        curve.return_times.push(t);
        curve.mean.push(summary.mean);
        curve.lower.push(summary.lower);
        curve.upper.push(summary.upper);
    }
    Ok(curve)
}

/// One dataset replicated from the generative law of one posterior draw.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictiveReplicate {
    pub draw: usize,
    pub counts: Vec<u32>,
    pub maxima: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Write replicate summaries as CSV for external plotting: one row per
/// replicated block with the draw index, block index, count and maximum.
pub fn write_replicates_csv<W: Write>(
    replicates: &[PredictiveReplicate],
    mut w: W,
    metadata: &[(String, String)],
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "draw,block,n_events,block_max")?;
    for rep in replicates {
        let mut max_iter = rep.maxima.iter();
        if rep.counts.is_empty() {
            // maxima-only models: one pseudo-block per maximum
            for (j, m) in rep.maxima.iter().enumerate() {
                writeln!(w, "{},{},,{}", rep.draw, j + 1, m)?;
            }
            continue;
        }
        for (j, &n) in rep.counts.iter().enumerate() {
            if n > 0 {
                let m = max_iter.next().copied().unwrap_or(f64::NAN);
                writeln!(w, "{},{},{},{}", rep.draw, j + 1, n, m)?;
            } else {
                writeln!(w, "{},{},0,", rep.draw, j + 1)?;
            }
        }
    }
    Ok(())
}

/// Fit draws from one model wrapped with everything `predict`/`validate`
/// need to rebuild its predictive law.
pub enum ModelPredictive {
    Hmev(HmevPredictive),
    Gev(GevPredictive),
    Pot(PotPredictive),
}

impl ModelPredictive {
    pub fn as_block_max(&self) -> &dyn BlockMaxPredictive {
        match self {
            ModelPredictive::Hmev(p) => p,
            ModelPredictive::Gev(p) => p,
            ModelPredictive::Pot(p) => p,
        }
    }
}

/// Shorthand used by tests: predictive for a single fixed HMEV state.
pub fn hmev_point_predictive(
    hypers: &HmevHypers,
    lambda: f64,
    m_g: usize,
    block_size: u32,
    rng: &mut ChaCha8Rng,
) -> Result<HmevPredictive> {
    HmevPredictive::from_states(&[(*hypers, lambda)], m_g, block_size, rng)
}
