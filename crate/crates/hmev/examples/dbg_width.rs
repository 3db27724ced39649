use hmev::metrics::{bias_and_width, quantile_matrix, MaximaSample};
use hmev::model::{HmevModel, HmevPriors, PosteriorModel};
use hmev::predictive::HmevPredictive;
use hmev::rng::derive_rng;
use hmev::sampler::{run_hmc, SamplerConfig};
use hmev::synth::{generate_scenario, ScenarioSpec};

fn main() {
    // reproduce the benchmark's wei_g r000 cell
    let scenario_seed = hmev::rng::derive_seed(2026, &[0x10, 3]);
    let mut spec = ScenarioSpec::wei_g(scenario_seed);
    spec.m_train = 50; spec.m_test = 500;
    let (train, test) = generate_scenario(&spec, 0).unwrap();
    let model = HmevModel::new(&train, HmevPriors::from_data(&train).unwrap()).unwrap();
    let config = SamplerConfig { chains: 2, iterations: 1000, seed: 777, ..Default::default() };
    let (draws, diag) = run_hmc(&model, &config).unwrap();
    println!("rhat {:.4}", diag.max_rhat);
    let test_sample = MaximaSample::new(test.observed_maxima()).unwrap();
    for m_g in [50usize, 200, 1000] {
        let mut rng = derive_rng(5, &[]);
        let pred = HmevPredictive::from_draws(&draws, m_g, 366, &mut rng).unwrap();
        let qm = quantile_matrix(&pred, &test_sample, 2.0);
        let (_b, w) = bias_and_width(&qm, &test_sample, (0.05, 0.95)).unwrap();
        println!("m_g {m_g}: width_out {w:.2}");
    }
}
