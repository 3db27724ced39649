//! Convergence diagnostics: split-chain potential scale reduction and bulk
//! effective sample size, following the split/rank-normalized formulation
//! used by modern MCMC toolchains.

use crate::numeric::norm_quantile;
use serde::{Deserialize, Serialize};

/// Per-parameter and aggregate diagnostics for one sampling run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub param_names: Vec<String>,
    /// Split R-hat per parameter.
    pub rhat: Vec<f64>,
    /// Bulk (rank-normalized) effective sample size per parameter.
    pub ess_bulk: Vec<f64>,
    /// Post-warmup divergent transitions summed over chains.
    pub divergences: usize,
    /// Adapted step size per chain.
    pub step_sizes: Vec<f64>,
    /// Mean post-warmup acceptance probability per chain.
    pub accept_rates: Vec<f64>,
    pub max_rhat: f64,
    pub min_ess_bulk: f64,
}

/// Split each chain in half; odd lengths drop the middle draw.
fn split_halves(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let n = chain.len();
        let half = n / 2;
        out.push(chain[..half].to_vec());
        out.push(chain[n - half..].to_vec());
    }
    out
}

/// Split-chain potential scale reduction factor for one parameter.
///
/// Chains with zero within-chain variance are flagged as `+inf`.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves = split_halves(chains);
    let m = halves.len();
    let n = halves.iter().map(Vec::len).min().unwrap_or(0);
    if m < 2 || n < 2 {
        return f64::NAN;
    }
    let mut means = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m);
    for half in &halves {
        let (mean, sd) = crate::model::priors::mean_sd(&half[..n]);
        means.push(mean);
        vars.push(sd * sd);
    }
    let w = vars.iter().sum::<f64>() / m as f64;
    let (_, sd_means) = crate::model::priors::mean_sd(&means);
    let b = n as f64 * sd_means * sd_means;
    if w <= 0.0 {
        return f64::INFINITY;
    }
    let var_hat = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    (var_hat / w).sqrt()
}

/// Effective sample size of split chains via Geyer's initial monotone
/// positive sequence on the combined autocorrelations.
fn ess_split(chains: &[Vec<f64>]) -> f64 {
    let halves = split_halves(chains);
    let m = halves.len();
    let n = halves.iter().map(Vec::len).min().unwrap_or(0);
    let total = (m * n) as f64;
    if n < 4 {
        return total;
    }

    // per-chain biased autocovariances
    let mut means = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m); // unbiased sample variance
    for half in &halves {
        let (mean, sd) = crate::model::priors::mean_sd(&half[..n]);
        means.push(mean);
        vars.push(sd * sd);
    }
    let mean_var = vars.iter().sum::<f64>() / m as f64;
    let (_, sd_means) = crate::model::priors::mean_sd(&means);
    let var_plus =
        mean_var * (n as f64 - 1.0) / n as f64 + if m > 1 { sd_means * sd_means } else { 0.0 };
    if var_plus <= 0.0 {
        return total;
    }

    let acov = |half: &[f64], mean: f64, t: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n - t {
            s += (half[i] - mean) * (half[i + t] - mean);
        }
        s / n as f64
    };

    let mean_acov = |t: usize| -> f64 {
        halves.iter().zip(&means).map(|(h, &mu)| acov(&h[..n], mu, t)).sum::<f64>() / m as f64
    };

    // Geyer paired sums with monotone correction
    let rho = |t: usize| 1.0 - (mean_var - mean_acov(t)) / var_plus;
    let max_pairs = (n - 3) / 2;
    let mut tau = 0.0;
    let mut prev_pair = f64::INFINITY;
    for k in 0..=max_pairs {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if !pair.is_finite() || pair <= 0.0 {
            break;
        }
        // initial monotone sequence: paired sums never increase
        prev_pair = pair.min(prev_pair);
        tau += prev_pair;
    }
    let tau = 2.0 * tau - 1.0; // ρ̂_0 is counted once, not twice
    if tau <= 0.0 {
        return total;
    }
    (total / tau).clamp(1e-9, total)
}

/// Bulk ESS: ESS of the rank-normalized draws.
pub fn ess_bulk(chains: &[Vec<f64>]) -> f64 {
    let normalized = rank_normalize(chains);
    ess_split(&normalized)
}

/// Pooled average ranks mapped through the normal quantile (offset 3/8).
fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = chains.iter().map(Vec::len).sum();
    let mut indexed: Vec<(f64, usize)> = Vec::with_capacity(total);
    let mut offsets = Vec::with_capacity(chains.len());
    let mut base = 0;
    for chain in chains {
        offsets.push(base);
        for (i, &v) in chain.iter().enumerate() {
            indexed.push((v, base + i));
        }
        base += chain.len();
    }
    indexed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; total];
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && indexed[j + 1].0 == indexed[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for item in &indexed[i..=j] {
            ranks[item.1] = avg_rank;
        }
        i = j + 1;
    }
    let nf = total as f64;
    chains
        .iter()
        .enumerate()
        .map(|(c, chain)| {
            (0..chain.len())
                .map(|i| norm_quantile((ranks[offsets[c] + i] - 0.375) / (nf + 0.25)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn iid_chains_have_unit_rhat() {
        let mut rng = derive_rng(1, &[]);
        let chains: Vec<Vec<f64>> =
            (0..4).map(|_| (0..500).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let r = split_rhat(&chains);
        assert!((r - 1.0).abs() < 0.01, "rhat {r}");
    }

    #[test]
    fn separated_constant_chains_explode_rhat() {
        let chains = vec![vec![0.0; 50], vec![5.0; 50]];
        assert!(split_rhat(&chains).is_infinite());
        // constant but noisy-separated chains: large finite rhat
        let mut rng = derive_rng(2, &[]);
        let chains: Vec<Vec<f64>> = (0..2)
            .map(|c| {
                (0..100).map(|_| c as f64 * 10.0 + rng.random::<f64>() * 0.01).collect()
            })
            .collect();
        assert!(split_rhat(&chains) > 10.0);
    }

    #[test]
    fn hand_fixture_matches_direct_formula() {
        // frozen 50-digit evaluation of the split formula on 2 chains x 8
        let c1 = vec![1.1, 2.3, 0.7, 1.9, 1.2, 2.8, 0.4, 1.6];
        let c2 = vec![0.9, 1.4, 2.2, 1.0, 2.5, 0.8, 1.7, 2.1];
        assert_relative_eq!(
            split_rhat(&[c1, c2]),
            0.892_938_588_446_426_489,
            epsilon = 1e-12
        );
    }

    #[test]
    fn iid_ess_near_sample_size() {
        let mut rng = derive_rng(3, &[]);
        let chains: Vec<Vec<f64>> =
            (0..4).map(|_| (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let ess = ess_bulk(&chains);
        assert!(ess > 2500.0, "iid ess {ess}");
        assert!(ess <= 4000.0 + 1e-9);
    }

    #[test]
    fn correlated_chain_has_reduced_ess() {
        let mut rng = derive_rng(4, &[]);
        let mut chains = Vec::new();
        for _ in 0..4 {
            let mut x = 0.0;
            let mut chain = Vec::with_capacity(1000);
            for _ in 0..1000 {
                let e: f64 = StandardNormal.sample(&mut rng);
                x = 0.9 * x + e; // AR(1) with ρ=0.9: ESS factor ≈ (1-ρ)/(1+ρ)
                chain.push(x);
            }
            chains.push(chain);
        }
        let ess = ess_bulk(&chains);
        assert!(ess < 1000.0, "AR(1) ess {ess}");
        assert!(ess > 50.0, "AR(1) ess {ess}");
    }
}
