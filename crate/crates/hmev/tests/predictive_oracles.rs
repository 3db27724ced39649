//! Predictive-path oracles: Monte Carlo vs analytic compound cdf, tail
//! linearization error, forward-simulation return levels, and small-scale
//! simulation-based calibration of the predictive simulator.

use hmev::model::{hmev_generate, HmevHypers, HmevModel, HmevPriors};
use hmev::predictive::compound::CompoundSpec;
use hmev::predictive::{
    hmev_point_predictive, posterior_mean_cdf, quantile_curve, return_level_mean_cdf, return_time,
    BlockMaxPredictive, QuantileCurve,
};
use hmev::rng::derive_rng;
use hmev::sampler::{run_hmc, SamplerConfig};

fn default_hypers() -> HmevHypers {
    HmevHypers { mu_delta: 9.0, sigma_delta: 2.25, mu_gamma: 0.7, sigma_gamma: 0.035 }
}

fn default_spec() -> CompoundSpec {
    CompoundSpec { hypers: default_hypers(), lambda: 100.0 / 366.0, block_size: 366 }
}

#[test]
fn monte_carlo_predictive_converges_to_analytic_compound_cdf() {
    // a single posterior point with many future blocks approximates the
    // exact latent-marginalized cdf within Monte Carlo error ~ 1/sqrt(M_g)
    let spec = default_spec();
    let m_g = 40_000;
    let mut rng = derive_rng(21, &[]);
    let pred = hmev_point_predictive(&spec.hypers, spec.lambda, m_g, 366, &mut rng).unwrap();
    for y in [60.0, 90.0, 130.0] {
        let exact = spec.cdf_exact(y).unwrap();
        let mc = pred.cdf_draw(0, y);
        let mc_sd = (exact * (1.0 - exact) / m_g as f64).sqrt();
        assert!(
            (mc - exact).abs() < 5.0 * mc_sd.max(1e-5),
            "y={y}: mc {mc} vs exact {exact} (sd {mc_sd:.2e})"
        );
    }
}

#[test]
fn linearization_error_small_and_decreasing_toward_tail() {
    let spec = default_spec();
    let mut errors = Vec::new();
    for p in [0.99, 0.999, 0.9999] {
        let y = spec.quantile_exact(p).unwrap();
        let exact = spec.cdf_exact(y).unwrap();
        let (lin, clamped) = spec.cdf_linearized(y).unwrap();
        assert!(!clamped, "linearization clamped at the {p} quantile");
        errors.push((exact - lin).abs());
    }
    assert!(errors[1] < 5e-3, "error at the 0.999 quantile: {}", errors[1]);
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "not decreasing: {errors:?}");
}

#[test]
fn return_level_matches_forward_simulation() {
    // T = 50 return level of the posterior-point predictive versus the
    // empirical quantile of one million simulated block maxima
    let hypers = default_hypers();
    let lambda = 100.0 / 366.0;
    let mut rng = derive_rng(22, &[]);
    let pred = hmev_point_predictive(&hypers, lambda, 20_000, 366, &mut rng).unwrap();
    let t = 50.0;
    let level = return_level_mean_cdf(&pred, t).unwrap();

    let mut sim_rng = derive_rng(23, &[]);
    let n_sim = 1_000_000usize;
    let mut exceed = 0usize;
    let mut sims = 0usize;
    // simulate in batches of blocks and count exceedances of the level
    while sims < n_sim {
        let batch = 2_000.min(n_sim - sims);
        let data = hmev_generate(&hypers, lambda, 366, batch, &mut sim_rng).unwrap();
        for block in data.blocks() {
            if let Some(max) = block.max() {
                if max > level {
                    exceed += 1;
                }
            }
            sims += 1;
        }
    }
    let p_exceed = exceed as f64 / n_sim as f64;
    // target exceedance 1/T = 0.02; binomial sd ≈ 1.4e-4. Allow for the
    // finite-M_g bias of the predictive ensemble as well.
    assert!(
        (p_exceed - 1.0 / t).abs() < 0.002,
        "simulated exceedance {p_exceed} vs target {}",
        1.0 / t
    );
}

#[test]
fn return_time_round_trip_on_grid() {
    let mut rng = derive_rng(24, &[]);
    let pred = hmev_point_predictive(&default_hypers(), 0.27, 5_000, 366, &mut rng).unwrap();
    for t in [5.0, 20.0, 100.0] {
        let y = return_level_mean_cdf(&pred, t).unwrap();
        let t_back = return_time(&pred, y);
        assert!((t_back - t).abs() / t < 1e-4, "t {t} -> y {y} -> t {t_back}");
    }
}

#[test]
fn curve_bands_tighten_with_posterior_concentration() {
    // wider hyperparameter spread across draws must widen the bands
    let spread_states: Vec<(HmevHypers, f64)> = (0..40)
        .map(|i| {
            let f = 0.8 + 0.01 * i as f64;
            (
                HmevHypers {
                    mu_delta: 9.0 * f,
                    sigma_delta: 2.25,
                    mu_gamma: 0.7,
                    sigma_gamma: 0.035,
                },
                0.27,
            )
        })
        .collect();
    let tight_states: Vec<(HmevHypers, f64)> =
        (0..40).map(|_| (default_hypers(), 0.27)).collect();
    let mut rng = derive_rng(25, &[]);
    let spread =
        hmev::predictive::HmevPredictive::from_states(&spread_states, 200, 366, &mut rng).unwrap();
    let tight =
        hmev::predictive::HmevPredictive::from_states(&tight_states, 200, 366, &mut rng).unwrap();
    let grid = [10.0, 50.0, 100.0];
    let c_spread = quantile_curve(&spread, &grid, (0.05, 0.95)).unwrap();
    let c_tight = quantile_curve(&tight, &grid, (0.05, 0.95)).unwrap();
    for i in 0..grid.len() {
        let w_spread = c_spread.upper[i] - c_spread.lower[i];
        let w_tight = c_tight.upper[i] - c_tight.lower[i];
        assert!(
            w_spread > w_tight,
            "T={}: spread width {w_spread} vs tight {w_tight}",
            grid[i]
        );
    }
}

#[test]
fn posterior_mean_cdf_monotone_on_dense_grid() {
    let mut rng = derive_rng(26, &[]);
    let states: Vec<(HmevHypers, f64)> = (0..50)
        .map(|i| {
            (
                HmevHypers {
                    mu_delta: 8.0 + 0.04 * i as f64,
                    sigma_delta: 2.0,
                    mu_gamma: 0.68,
                    sigma_gamma: 0.03,
                },
                0.25,
            )
        })
        .collect();
    let pred =
        hmev::predictive::HmevPredictive::from_states(&states, 50, 366, &mut rng).unwrap();
    let mut prev = -1.0;
    for i in 0..=1000 {
        let y = 300.0 * i as f64 / 1000.0;
        let c = posterior_mean_cdf(&pred, y);
        assert!(c + 1e-12 >= prev, "not monotone at y={y}");
        prev = c;
    }
}

#[test]
fn log_grid_is_log_spaced() {
    let grid = QuantileCurve::log_grid(1.05, 500.0, 60);
    assert_eq!(grid.len(), 60);
    assert!((grid[0] - 1.05).abs() < 1e-12);
    assert!((grid[59] - 500.0).abs() < 1e-9);
    let r0 = grid[1] / grid[0];
    let r1 = grid[31] / grid[30];
    assert!((r0 - r1).abs() < 1e-9, "ratios {r0} vs {r1}");
}

/// Small-scale simulation-based calibration: fitting data generated from
/// the model and ranking the generating hyperparameters among posterior
/// draws should give roughly uniform ranks.
#[test]
fn simulation_based_calibration_ranks_are_not_degenerate() {
    let runs: u64 = 12;
    let mut low = 0usize;
    let mut high = 0usize;
    for run in 0..runs {
        let mut rng = derive_rng(9000 + run, &[]);
        // draw generating values around the prior centers
        let truth = HmevHypers {
            mu_delta: 8.0 + (run as f64 % 5.0) * 0.5,
            sigma_delta: 2.0,
            mu_gamma: 0.66 + (run as f64 % 3.0) * 0.02,
            sigma_gamma: 0.033,
        };
        let lambda = 0.25;
        let data = hmev_generate(&truth, lambda, 366, 10, &mut rng).unwrap();
        let model = HmevModel::new(&data, HmevPriors::from_data(&data).unwrap()).unwrap();
        let config = SamplerConfig {
            chains: 2,
            iterations: 500,
            seed: 700 + run,
            ..Default::default()
        };
        let (draws, _) = run_hmc(&model, &config).unwrap();
        let col = draws.col("mu_delta").unwrap();
        let rank = draws
            .values()
            .column(col)
            .iter()
            .filter(|&&v| v < truth.mu_delta)
            .count() as f64
            / draws.n_draws() as f64;
        if rank < 0.05 {
            low += 1;
        }
        if rank > 0.95 {
            high += 1;
        }
    }
    // uniform ranks put ~5% in each extreme bin; systematic mis-calibration
    // piles most runs into one of them
    assert!((low as u64) < runs / 2, "truth below almost all draws in {low}/{runs} runs");
    assert!((high as u64) < runs / 2, "truth above almost all draws in {high}/{runs} runs");
}
