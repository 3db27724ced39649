//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measurements. Tolerances are pinned in the
//! assertions. Run with `cargo test -p hmev-cli --test acceptance`.

use hmev::data::{BlockData, Dataset};
use hmev::dist::{CountDist, GevParams, GumbelParams, WeibullParams};
use hmev::ingest::{
    apply_qc, decluster, parse_station_file, split_train_test, write_station_file, DayRecord,
    DeclusterConfig, QcConfig, SplitMode, StationRecord,
};
use hmev::metrics::{bias_and_width, fse, lpml, lppd, MaximaSample, QuantileMatrix};
use hmev::model::{
    hmev_generate, GevModel, HmevHypers, HmevModel, HmevPriors, PosteriorModel, PotModel,
};
use hmev::predictive::compound::CompoundSpec;
use hmev::rng::derive_rng;
use hmev::sampler::{run_hmc, SamplerConfig};
use hmev::synth::betabinom_from_moments;
use rand::Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hmev")
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn assert_ok(out: &std::process::Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed (status {:?}):\n{}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Accept success or the documented convergence exit code (4): short test
/// fits trip the R-hat gate by design, and the draws are written either way.
fn assert_ok_or_convergence(out: &std::process::Output, what: &str) {
    let code = out.status.code();
    assert!(
        out.status.success() || code == Some(4),
        "{what} failed (status {code:?}):\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("hmev-acceptance").join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clear scratch dir");
    }
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

// ── criterion 1: gradient correctness ───────────────────────────────────

/// `Some(true/false)` when the state is checkable; `None` for states the
/// oracle cannot resolve: rejected ones, and log densities so large that a
/// central difference of f64 evaluations is pure cancellation noise (the
/// sampler rejects those regions too).
fn fd_matches<M: PosteriorModel>(model: &M, z: &[f64]) -> Option<bool> {
    let mut grad = vec![0.0; model.dim()];
    let lp = model.log_posterior_grad(z, &mut grad);
    if !lp.is_finite() || lp.abs() > 1e5 {
        return None;
    }
    for k in 0..model.dim() {
        let scale = z[k].abs().max(1.0);
        let mut fds = Vec::new();
        let mut best = f64::INFINITY;
        for h_factor in [1e-7, 1e-6, 1e-5, 1e-4] {
            let h = h_factor * scale;
            let mut hi = z.to_vec();
            let mut lo = z.to_vec();
            hi[k] += h;
            lo[k] -= h;
            let numeric = (model.log_posterior(&hi) - model.log_posterior(&lo)) / (2.0 * h);
            let denom = numeric.abs().max(grad[k].abs()).max(1e-7);
            best = best.min((grad[k] - numeric).abs() / denom);
            fds.push(numeric);
        }
        if best < 1e-6 {
            continue;
        }
        // before declaring a mismatch, the difference quotient must agree
        // with itself across steps: if it does not, truncation or round-off
        // dominates (support-boundary curvature) and the oracle cannot
        // resolve this coordinate at all
        let mut self_consistency = f64::INFINITY;
        for pair in fds.windows(2) {
            let denom = pair[0].abs().max(pair[1].abs()).max(1e-7);
            self_consistency = self_consistency.min((pair[0] - pair[1]).abs() / denom);
        }
        if self_consistency <= 1e-6 {
            return Some(false);
        }
    }
    Some(true)
}

#[test]
fn criterion_1_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut rng = derive_rng(101, &[]);
    let truth = HmevHypers { mu_delta: 9.0, sigma_delta: 2.25, mu_gamma: 0.7, sigma_gamma: 0.035 };
    let data = hmev_generate(&truth, 0.15, 366, 5, &mut rng).unwrap();
    let hmev_model = HmevModel::new(&data, HmevPriors::from_data(&data).unwrap()).unwrap();
    let maxima = data.observed_maxima();
    let gev_model = GevModel::from_maxima(maxima).unwrap();
    let threshold = hmev::model::threshold_select(&data, 0.8).unwrap();
    let pot_model = PotModel::from_dataset(&data, threshold).unwrap();

    let mut checked = [0usize; 3];
    let mut attempts = 0;
    while checked.iter().any(|&c| c < 100) {
        attempts += 1;
        assert!(attempts < 3000, "could not find enough checkable states: {checked:?}");
        let jitter = |base: &[f64], rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            base.iter().map(|v| v + rng.random_range(-0.35..0.35)).collect()
        };
        let z = jitter(&hmev_model.initial_state().unwrap(), &mut rng);
        if checked[0] < 100 {
            if let Some(ok) = fd_matches(&hmev_model, &z) {
                assert!(ok, "hmev gradient attempt {attempts}");
                checked[0] += 1;
            }
        }
        let z = jitter(&gev_model.initial_state().unwrap(), &mut rng);
        if checked[1] < 100 {
            if let Some(ok) = fd_matches(&gev_model, &z) {
                assert!(ok, "gev gradient attempt {attempts}");
                checked[1] += 1;
            }
        }
        let z = jitter(&pot_model.initial_state().unwrap(), &mut rng);
        if checked[2] < 100 {
            if let Some(ok) = fd_matches(&pot_model, &z) {
                assert!(ok, "pot gradient attempt {attempts}");
                checked[2] += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "gradient check took {elapsed:?}");
    println!(
        "acceptance criterion 1 (gradient correctness, {}+{}+{} points in {elapsed:?}): PASS",
        checked[0], checked[1], checked[2]
    );
}

// ── criterion 2: distribution kernel ────────────────────────────────────

#[test]
fn criterion_2_distribution_kernel() {
    use hmev::numeric::{integrate, integrate_to_inf};
    // quantile/cdf round trips at 1e-8
    let weibull = WeibullParams::new(0.7, 9.0).unwrap();
    let gev = GevParams::new(30.0, 8.0, 0.114).unwrap();
    for i in 1..500 {
        let p = i as f64 / 500.0;
        let q = weibull.quantile(p).unwrap();
        assert!((weibull.cdf(q) - p).abs() < 1e-8, "weibull p={p}");
        let q = gev.quantile(p).unwrap();
        assert!((gev.cdf(q) - p).abs() < 1e-8, "gev p={p}");
    }
    // unit mass at 1e-5
    let (w_mass, _) = integrate_to_inf(|x| weibull.log_pdf(x).exp(), 0.0, 1e-9, 1e-12);
    assert!((w_mass - 1.0).abs() < 1e-5, "weibull mass {w_mass}");
    let mid = gev.quantile(0.5).unwrap();
    let (a, _) = integrate(|x| gev.log_pdf(x).exp(), gev.support().0.max(-1e4), mid, 1e-9, 1e-12);
    let (b, _) = integrate_to_inf(|x| gev.log_pdf(x).exp(), mid, 1e-9, 1e-12);
    assert!((a + b - 1.0).abs() < 1e-5, "gev mass {}", a + b);
    // shape-limit agreement at 1e-6
    let gumbel = GumbelParams::new(30.0, 8.0).unwrap();
    let near_zero = GevParams::new(30.0, 8.0, 5e-9).unwrap();
    for i in 0..400 {
        let y = -10.0 + 120.0 * i as f64 / 400.0;
        assert!(
            (near_zero.log_pdf(y) - gumbel.log_pdf(y)).abs()
                < 1e-6 * gumbel.log_pdf(y).abs().max(1.0),
            "limit mismatch at y={y}"
        );
    }
    println!("acceptance criterion 2 (distribution kernel round trips, mass, shape limit): PASS");
}

// ── criterion 3: tail linearization oracle ──────────────────────────────

#[test]
fn criterion_3_linearization_oracle() {
    let spec = CompoundSpec {
        hypers: HmevHypers { mu_delta: 9.0, sigma_delta: 2.25, mu_gamma: 0.7, sigma_gamma: 0.035 },
        lambda: 100.0 / 366.0,
        block_size: 366,
    };
    let mut errors = Vec::new();
    for p in [0.99, 0.999, 0.9999] {
        let y = spec.quantile_exact(p).unwrap();
        let exact = spec.cdf_exact(y).unwrap();
        let (lin, clamped) = spec.cdf_linearized(y).unwrap();
        assert!(!clamped, "clamped at quantile {p}");
        errors.push((exact - lin).abs());
    }
    assert!(errors[1] < 5e-3, "error at 0.999 quantile: {:.3e}", errors[1]);
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "tail error not decreasing: {errors:?}"
    );
    println!(
        "acceptance criterion 3 (linearization: {:.2e} > {:.2e} > {:.2e}, mid < 5e-3): PASS",
        errors[0], errors[1], errors[2]
    );
}

// ── criterion 4: posterior recovery at defaults ─────────────────────────

#[test]
fn criterion_4_posterior_recovery() {
    let start = Instant::now();
    let truth = HmevHypers { mu_delta: 9.0, sigma_delta: 2.25, mu_gamma: 0.7, sigma_gamma: 0.035 };
    let lambda = 0.25;
    let names = ["mu_delta", "sigma_delta", "mu_gamma", "sigma_gamma", "lambda"];
    let targets = [truth.mu_delta, truth.sigma_delta, truth.mu_gamma, truth.sigma_gamma, lambda];
    let n_fits = 20;

    let mut covered = [0usize; 5];
    let mut worst_rhat: f64 = 0.0;
    let mut total_divergences = 0usize;
    for rep in 0..n_fits {
        let mut rng = derive_rng(4000 + rep, &[]);
        let data = hmev_generate(&truth, lambda, 366, 50, &mut rng).unwrap();
        let model = HmevModel::new(&data, HmevPriors::from_data(&data).unwrap()).unwrap();
        let config = SamplerConfig { seed: 4100 + rep, ..Default::default() };
        let (draws, diag) = run_hmc(&model, &config).unwrap();
        worst_rhat = worst_rhat.max(diag.max_rhat);
        total_divergences += diag.divergences;
        for (k, name) in names.iter().enumerate() {
            let col = draws.col(name).unwrap();
            let lo = draws.quantile_of(col, 0.05);
            let hi = draws.quantile_of(col, 0.95);
            if targets[k] >= lo && targets[k] <= hi {
                covered[k] += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst_rhat < 1.05, "max split R-hat over all fits: {worst_rhat}");
    assert_eq!(total_divergences, 0, "divergent transitions at default settings");
    for (k, name) in names.iter().enumerate() {
        assert!(
            covered[k] * 100 >= 80 * n_fits as usize,
            "{name} covered in only {}/{} fits",
            covered[k],
            n_fits
        );
    }
    assert!(elapsed.as_secs() < 1800, "recovery study took {elapsed:?}");
    println!(
        "acceptance criterion 4 (recovery: coverage {covered:?}/20 each, max rhat {worst_rhat:.4}, \
         0 divergences, {elapsed:?}): PASS"
    );
}

// ── criterion 5: metric oracles ─────────────────────────────────────────

#[test]
fn criterion_5_metric_oracles() {
    let mut rng = derive_rng(505, &[]);
    for trial in 0..30 {
        let m = 3 + trial % 20;
        let b = 2 + trial % 15;
        let maxima: Vec<f64> = (0..m).map(|_| rng.random_range(10.0..120.0)).collect();
        let quantiles: Vec<Vec<f64>> = (0..b)
            .map(|_| maxima.iter().map(|&y| y * rng.random_range(0.7..1.4)).collect())
            .collect();
        let densities: Vec<Vec<f64>> =
            (0..b).map(|_| (0..m).map(|_| rng.random_range(1e-5..0.3)).collect()).collect();

        let sample = MaximaSample::new(maxima.clone()).unwrap();
        let columns = sample.qualifying(2.0);
        if columns.is_empty() {
            continue;
        }
        let mut qm = ndarray::Array2::zeros((b, columns.len()));
        for (i, row) in quantiles.iter().enumerate() {
            for (c, &j) in columns.iter().enumerate() {
                qm[[i, c]] = row[j];
            }
        }
        let qm = QuantileMatrix::new(qm, columns.clone());

        // brute-force double loops, written flat
        let mut positions = vec![0.0; m];
        {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| maxima[x].partial_cmp(&maxima[y]).unwrap());
            for (r, &j) in order.iter().enumerate() {
                positions[j] = (r + 1) as f64 / (m as f64 + 1.0);
            }
        }
        let mut exp_fse = 0.0;
        let mut exp_bias = 0.0;
        let mut exp_width = 0.0;
        for &j in &columns {
            let y = maxima[j];
            let mut sq = 0.0;
            let mut rel = 0.0;
            let mut col: Vec<f64> = Vec::new();
            for row in &quantiles {
                sq += ((row[j] - y) / y).powi(2);
                rel += (row[j] - y) / y;
                col.push(row[j]);
            }
            exp_fse += (sq / b as f64).sqrt();
            exp_bias += rel / b as f64;
            col.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let q = |p: f64| {
                let h = (col.len() - 1) as f64 * p;
                let k = h.floor() as usize;
                if k + 1 < col.len() {
                    col[k] + (h - k as f64) * (col[k + 1] - col[k])
                } else {
                    col[col.len() - 1]
                }
            };
            exp_width += q(0.95) - q(0.05);
        }
        let m_t = columns.len() as f64;
        let got_fse = fse(&qm, &sample).unwrap();
        let (got_bias, got_width) = bias_and_width(&qm, &sample, (0.05, 0.95)).unwrap();
        assert!((got_fse - exp_fse / m_t).abs() < 1e-12 * (exp_fse / m_t).max(1.0));
        assert!((got_bias - exp_bias / m_t).abs() < 1e-12 * (exp_bias / m_t).abs().max(1.0));
        assert!((got_width - exp_width / m_t).abs() < 1e-12 * (exp_width / m_t).max(1.0));

        let mut ld = ndarray::Array2::zeros((b, m));
        let mut exp_lppd = 0.0;
        let mut exp_lpml = 0.0;
        for j in 0..m {
            let mut mean = 0.0;
            let mut inv = 0.0;
            for (i, row) in densities.iter().enumerate() {
                ld[[i, j]] = row[j].ln();
                mean += row[j];
                inv += 1.0 / row[j];
            }
            exp_lppd += (mean / b as f64).ln();
            exp_lpml += (b as f64 / inv).ln();
        }
        let (got_lppd, _) = lppd(&ld);
        let (got_lpml, _) = lpml(&ld);
        assert!((got_lppd - exp_lppd).abs() < 1e-12 * exp_lppd.abs().max(1.0));
        assert!((got_lpml - exp_lpml).abs() < 1e-12 * exp_lpml.abs().max(1.0));
        assert!(got_lpml <= got_lppd + 1e-12, "Jensen violated on trial {trial}");
    }
    println!("acceptance criterion 5 (metric oracles to 1e-12, lpml <= lppd): PASS");
}

// ── criterion 6: desk-scale simulation study ────────────────────────────

#[derive(Debug, Clone, Default)]
struct LedgerRow {
    model: String,
    dataset: String,
    fse_out: f64,
    width_out: f64,
    lppd_in: f64,
    lpml_train: f64,
    p_eff: f64,
}

fn read_ledger(path: &Path) -> Vec<LedgerRow> {
    let text = std::fs::read_to_string(path).expect("ledger exists");
    let mut rows = Vec::new();
    let mut header: Vec<String> = Vec::new();
    for line in text.lines() {
        if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |name: &str| -> &str {
            let idx = header.iter().position(|h| h == name).expect("column exists");
            fields[idx]
        };
        rows.push(LedgerRow {
            model: get("model").to_string(),
            dataset: get("dataset").to_string(),
            fse_out: get("fse_out").parse().unwrap(),
            width_out: get("width_out").parse().unwrap(),
            lppd_in: get("lppd_in").parse().unwrap(),
            lpml_train: get("lpml_train").parse().unwrap(),
            p_eff: get("p_eff").parse().unwrap(),
        });
    }
    rows
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    hmev::sampler::empirical_quantile_sorted(values, 0.5)
}

#[test]
fn criterion_6_desk_scale_simulation_study() {
    let start = Instant::now();
    let dir = scratch("bench");
    let out = run_bin(&[
        "benchmark",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "2026",
        "--replicates",
        "10",
        "--m-train",
        "50",
        "--m-test",
        "500",
    ]);
    assert_ok(&out, "benchmark");
    let rows = read_ledger(&dir.join("ledger.csv"));
    assert_eq!(rows.len(), 4 * 10 * 3, "expected a full ledger");

    // every fitted dataset satisfies the Jensen inequality
    for row in &rows {
        assert!(
            row.lpml_train <= row.lppd_in + 1e-9,
            "lpml > lppd_in for {} on {}",
            row.model,
            row.dataset
        );
    }

    let by_cell = |family: &str, model: &str| -> BTreeMap<String, LedgerRow> {
        rows.iter()
            .filter(|r| r.dataset.starts_with(&format!("{family}_")) && r.model == model)
            .map(|r| (r.dataset.clone(), r.clone()))
            .collect()
    };

    // HMEV out-of-sample interval width beats both baselines in >= 8/10
    // replicates of the wei, gam and wei_g scenarios
    for family in ["wei", "gam", "wei_g"] {
        let hmev_rows = by_cell(family, "hmev");
        let gev_rows = by_cell(family, "gev");
        let pot_rows = by_cell(family, "pot");
        let mut wins = 0;
        let mut total = 0;
        for (cell, h) in &hmev_rows {
            let (Some(g), Some(p)) = (gev_rows.get(cell), pot_rows.get(cell)) else { continue };
            total += 1;
            if h.width_out < g.width_out && h.width_out < p.width_out {
                wins += 1;
            }
        }
        assert_eq!(total, 10, "{family}: missing cells");
        assert!(wins >= 8, "{family}: narrowest band in only {wins}/10 replicates");
        println!("  {family}: hmev narrowest out-of-sample band in {wins}/10 replicates");
    }

    // effective parameter count: HMEV below both baselines' medians in wei
    // and gam
    for family in ["wei", "gam"] {
        let mut med = |model: &str| {
            let mut v: Vec<f64> = by_cell(family, model).values().map(|r| r.p_eff).collect();
            median(&mut v)
        };
        let (h, g, p) = (med("hmev"), med("gev"), med("pot"));
        assert!(h < g && h < p, "{family}: p_eff medians hmev {h}, gev {g}, pot {p}");
        println!("  {family}: median p_eff hmev {h:.2} < gev {g:.2}, pot {p:.2}");
    }

    // POT keeps the lowest out-of-sample FSE under the heavy-tailed GP parent
    {
        let mut med = |model: &str| {
            let mut v: Vec<f64> = by_cell("gp", model).values().map(|r| r.fse_out).collect();
            median(&mut v)
        };
        let (h, g, p) = (med("hmev"), med("gev"), med("pot"));
        assert!(p < h && p < g, "gp: fse_out medians pot {p}, gev {g}, hmev {h}");
        println!("  gp: median fse_out pot {p:.3} < gev {g:.3}, hmev {h:.3}");
    }
    println!(
        "acceptance criterion 6 (desk-scale study, 120 fits in {:?}): PASS",
        start.elapsed()
    );
}

// ── criterion 7: beta-binomial moments ──────────────────────────────────

#[test]
fn criterion_7_beta_binomial_moments() {
    let (alpha, beta) = betabinom_from_moments(100.0, 150.0, 366).unwrap();
    let law = CountDist::beta_binomial(alpha, beta, 366).unwrap();
    let mut rng = derive_rng(707, &[]);
    let n = 1_000_000usize;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut sum4 = 0.0;
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let x = f64::from(law.sample(&mut rng));
        sum += x;
        draws.push(x);
    }
    let mean = sum / n as f64;
    for &x in &draws {
        let d = x - mean;
        sum2 += d * d;
        sum4 += d * d * d * d;
    }
    let var = sum2 / (n as f64 - 1.0);
    let m4 = sum4 / n as f64;

    // 3 standard errors of each sample moment
    let se_mean = (150.0_f64 / n as f64).sqrt();
    let se_var = ((m4 - var * var) / n as f64).sqrt();
    assert!(
        (mean - 100.0).abs() < 3.0 * se_mean,
        "sample mean {mean} vs 100 (se {se_mean:.4})"
    );
    assert!((var - 150.0).abs() < 3.0 * se_var, "sample variance {var} vs 150 (se {se_var:.4})");
    println!(
        "acceptance criterion 7 (beta-binomial: mean {mean:.3} (se {se_mean:.3}), \
         variance {var:.2} (se {se_var:.2})): PASS"
    );
}

// ── criterion 8: ingestion ──────────────────────────────────────────────

fn synthetic_station(seed: u64, years: i32) -> StationRecord {
    let mut rng = derive_rng(seed, &[808]);
    let mut days = Vec::new();
    let start = chrono::NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
    let end = chrono::NaiveDate::from_ymd_opt(1900 + years - 1, 12, 31).unwrap();
    let mut date = start;
    while date <= end {
        let tenths = if rng.random::<f64>() < 0.3 {
            Some((rng.random::<f64>() * 800.0).round() as i32 + 3)
        } else {
            Some(0)
        };
        days.push(DayRecord {
            date,
            tenths,
            measurement_flag: ' ',
            quality_flag: ' ',
            source_flag: ' ',
        });
        date = date.succ_opt().unwrap();
    }
    StationRecord::new("SYNTH000001".into(), days).unwrap()
}

#[test]
fn criterion_8_ingestion() {
    // bit-exact archive round trip
    let record = synthetic_station(1, 4);
    let mut bytes = Vec::new();
    write_station_file(&record, &mut bytes).unwrap();
    let reparsed = parse_station_file(std::io::Cursor::new(&bytes)).unwrap();
    let mut bytes2 = Vec::new();
    write_station_file(&reparsed, &mut bytes2).unwrap();
    assert_eq!(bytes, bytes2, "archive round trip changed bytes");
    assert_eq!(record, reparsed);

    // QC drops exactly the years with more than 30 missing days
    let mut days = Vec::new();
    for (k, missing) in [0u32, 10, 30, 31, 45, 0].iter().enumerate() {
        let year = 1950 + k as i32;
        let mut date = chrono::NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        let mut left = *missing;
        while chrono::Datelike::year(&date) == year {
            let tenths = if left > 0 {
                left -= 1;
                None
            } else {
                Some(25)
            };
            days.push(DayRecord {
                date,
                tenths,
                measurement_flag: ' ',
                quality_flag: ' ',
                source_flag: ' ',
            });
            date = date.succ_opt().unwrap();
        }
    }
    let staged = StationRecord::new("QCCASE00001".into(), days).unwrap();
    let outcome = apply_qc(&staged, &QcConfig { min_years: 1, ..QcConfig::default() });
    let (_, report) = outcome.accepted().unwrap();
    assert_eq!(report.retained_years, vec![1950, 1951, 1952, 1955]);
    let dropped: Vec<i32> = report.dropped_years.iter().map(|&(y, _)| y).collect();
    assert_eq!(dropped, vec![1953, 1954]);

    // declustering: brute-force window oracle on 1000 random series and
    // annual-maximum preservation
    let mut rng = derive_rng(88, &[]);
    let qc = QcConfig::default();
    for trial in 0..1000 {
        let len = rng.random_range(20..366);
        let series: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random::<f64>() < 0.45 {
                    (rng.random::<f64>() * 500.0).round() / 10.0
                } else {
                    0.0
                }
            })
            .collect();
        let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let days: Vec<DayRecord> = series
            .iter()
            .enumerate()
            .map(|(i, &mm)| DayRecord {
                date: start + chrono::Duration::days(i as i64),
                tenths: Some((mm * 10.0).round() as i32),
                measurement_flag: ' ',
                quality_flag: ' ',
                source_flag: ' ',
            })
            .collect();
        let rec = StationRecord::new("W".into(), days).unwrap();
        let config = DeclusterConfig { acf_cutoff: 0.1, max_lag: rng.random_range(1..10) };
        let (data, report) = decluster(&rec, &config, &qc).unwrap();

        // oracle: quadratic scan over all in-window pairs
        let mut expected = Vec::new();
        for t in 0..len {
            if series[t] <= qc.wet_threshold_mm {
                continue;
            }
            let mut keep = true;
            for s in 0..len {
                if s != t && s.abs_diff(t) <= report.tau {
                    if series[s] > series[t] || (series[s] == series[t] && s < t) {
                        keep = false;
                        break;
                    }
                }
            }
            if keep {
                expected.push(series[t]);
            }
        }
        assert_eq!(data.blocks()[0].magnitudes(), expected.as_slice(), "trial {trial}");

        let raw_max = series.iter().copied().fold(0.0_f64, f64::max);
        if raw_max > qc.wet_threshold_mm {
            assert_eq!(data.blocks()[0].max().unwrap(), raw_max, "trial {trial} lost the maximum");
        }
    }
    println!("acceptance criterion 8 (archive round trip, QC year drops, 1000-series oracle): PASS");
}

// ── criterion 9: end-to-end first-20 / first-50 station study ───────────

/// Build a 150-year synthetic daily archive from the hierarchy, spread the
/// events over each year's calendar, and return the file path.
fn synthesize_archive(dir: &Path) -> PathBuf {
    let truth = HmevHypers { mu_delta: 9.5, sigma_delta: 2.4, mu_gamma: 0.72, sigma_gamma: 0.036 };
    let mut rng = derive_rng(909, &[]);
    let data = hmev_generate(&truth, 0.25, 366, 150, &mut rng).unwrap();
    let mut days = Vec::new();
    for (j, block) in data.blocks().iter().enumerate() {
        let year = 1860 + j as i32;
        let year_len = if chrono::NaiveDate::from_ymd_opt(year, 2, 29).is_some() { 366 } else { 365 };
        let n = block.n().min(year_len);
        // spread events evenly through the year; everything else is dry
        let mut event_days = vec![false; year_len];
        for i in 0..n {
            event_days[i * year_len / n.max(1)] = true;
        }
        let mut next_event = 0usize;
        let start = chrono::NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        for d in 0..year_len {
            let date = start + chrono::Duration::days(d as i64);
            let tenths = if event_days[d] && next_event < n {
                let mm = block.magnitudes()[next_event];
                next_event += 1;
                Some(((mm * 10.0).round() as i32).max(4))
            } else {
                Some(0)
            };
            days.push(DayRecord {
                date,
                tenths,
                measurement_flag: ' ',
                quality_flag: ' ',
                source_flag: ' ',
            });
        }
    }
    let record = StationRecord::new("SYNTH150YRS".into(), days).unwrap();
    let path = dir.join("station.dly");
    let file = std::fs::File::create(&path).unwrap();
    write_station_file(&record, std::io::BufWriter::new(file)).unwrap();
    path
}

fn band_width_at(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).expect("quantiles file");
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("return_time") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let lower: f64 = fields[2].parse().unwrap();
        let upper: f64 = fields[3].parse().unwrap();
        return upper - lower;
    }
    panic!("no data rows in {}", path.display());
}

#[test]
fn criterion_9_station_study_band_widths() {
    let start = Instant::now();
    let dir = scratch("station");
    let archive = synthesize_archive(&dir);

    // ingest through the binary
    let out_dir = dir.join("ingest");
    let out = run_bin(&[
        "ingest",
        "--input",
        archive.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out, "ingest");
    let dataset_path = out_dir.join("SYNTH150YRS_dataset.csv");
    assert!(dataset_path.exists());

    // split off the first 20 and first 50 years as training records
    let full = Dataset::read_csv_path(&dataset_path, 366).unwrap();
    assert!(full.n_blocks() >= 100, "stand-in record has {} years", full.n_blocks());
    for (label, m_train) in [("y20", 20usize), ("y50", 50usize)] {
        let (train, _) = split_train_test(&full, SplitMode::FirstYears { m_train }, 0).unwrap();
        train
            .write_csv_path(&dir.join(format!("train_{label}.csv")), &[("n_t".into(), "366".into())])
            .unwrap();
    }

    let mut widths: BTreeMap<(String, String), f64> = BTreeMap::new();
    for label in ["y20", "y50"] {
        for model in ["hmev", "gev", "pot"] {
            let fit_dir = dir.join(format!("fit_{label}_{model}"));
            let out = run_bin(&[
                "fit",
                "--data",
                dir.join(format!("train_{label}.csv")).to_str().unwrap(),
                "--model",
                model,
                "--out",
                fit_dir.to_str().unwrap(),
                "--seed",
                "1234",
            ]);
            assert_ok(&out, &format!("fit {model} {label}"));
            let pred_dir = dir.join(format!("pred_{label}_{model}"));
            let out = run_bin(&[
                "predict",
                "--draws",
                fit_dir.join("draws.csv").to_str().unwrap(),
                "--out",
                pred_dir.to_str().unwrap(),
                "--seed",
                "77",
                "--t-min",
                "50",
                "--t-max",
                "50",
                "--points",
                "1",
            ]);
            assert_ok(&out, &format!("predict {model} {label}"));
            let width = band_width_at(&pred_dir.join("quantiles.csv"));
            widths.insert((label.to_string(), model.to_string()), width);
        }
    }
    for label in ["y20", "y50"] {
        let w = |m: &str| widths[&(label.to_string(), m.to_string())];
        assert!(
            w("hmev") < w("gev") && w("hmev") < w("pot"),
            "{label}: T=50 band widths hmev {:.2}, gev {:.2}, pot {:.2}",
            w("hmev"),
            w("gev"),
            w("pot")
        );
        println!(
            "  {label}: T=50 band width hmev {:.2} < gev {:.2}, pot {:.2}",
            w("hmev"),
            w("gev"),
            w("pot")
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1800, "station study took {elapsed:?}");
    println!("acceptance criterion 9 (station study, first 20/50 years, {elapsed:?}): PASS");
}

// ── criterion 10: determinism ───────────────────────────────────────────

fn file_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let dir = scratch("determinism");

    // simulate twice
    for run in ["a", "b"] {
        let out = run_bin(&[
            "simulate",
            "--scenario",
            "wei_g",
            "--out",
            dir.join(format!("sim_{run}")).to_str().unwrap(),
            "--seed",
            "5",
            "--replicates",
            "2",
            "--m-train",
            "8",
            "--m-test",
            "12",
        ]);
        assert_ok(&out, "simulate");
    }
    for name in ["scenario.json", "train_r000.csv", "test_r001.csv"] {
        assert_eq!(
            file_bytes(&dir.join("sim_a").join(name)),
            file_bytes(&dir.join("sim_b").join(name)),
            "simulate output {name} differs between reruns"
        );
    }

    // fit twice on the same data and seed
    for run in ["a", "b"] {
        let out = run_bin(&[
            "fit",
            "--data",
            dir.join("sim_a/train_r000.csv").to_str().unwrap(),
            "--model",
            "hmev",
            "--out",
            dir.join(format!("fit_{run}")).to_str().unwrap(),
            "--seed",
            "17",
            "--chains",
            "2",
            "--iterations",
            "200",
        ]);
        assert_ok_or_convergence(&out, "fit");
    }
    assert_eq!(
        file_bytes(&dir.join("fit_a/draws.csv")),
        file_bytes(&dir.join("fit_b/draws.csv")),
        "draws differ between reruns"
    );

    // benchmark under different worker counts
    for (run, workers) in [("w1", "1"), ("w2", "2")] {
        let out = run_bin(&[
            "benchmark",
            "--out",
            dir.join(format!("bench_{run}")).to_str().unwrap(),
            "--seed",
            "23",
            "--scenarios",
            "wei",
            "--replicates",
            "2",
            "--m-train",
            "10",
            "--m-test",
            "40",
            "--chains",
            "2",
            "--iterations",
            "200",
            "--workers",
            workers,
        ]);
        assert_ok(&out, "benchmark");
    }
    for name in ["ledger.csv", "summary.csv", "best_model.csv"] {
        assert_eq!(
            file_bytes(&dir.join("bench_w1").join(name)),
            file_bytes(&dir.join("bench_w2").join(name)),
            "benchmark output {name} differs across worker counts"
        );
    }

    // resumed benchmark is idempotent
    let out = run_bin(&[
        "benchmark",
        "--out",
        dir.join("bench_w1").to_str().unwrap(),
        "--seed",
        "23",
        "--scenarios",
        "wei",
        "--replicates",
        "2",
        "--m-train",
        "10",
        "--m-test",
        "40",
        "--chains",
        "2",
        "--iterations",
        "200",
    ]);
    assert_ok(&out, "benchmark resume");
    assert_eq!(
        file_bytes(&dir.join("bench_w1/ledger.csv")),
        file_bytes(&dir.join("bench_w2/ledger.csv")),
        "resume changed the ledger"
    );
    println!("acceptance criterion 10 (byte-identical reruns, worker counts, resume): PASS");
}
