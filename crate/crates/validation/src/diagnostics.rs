//! Cross-checks of the limit harness against the classical iid limit of the
//! product-limit and hazard processes, where C(t) = ∫₀ᵗ dF*/H̄² is known in
//! closed form for exponential lifetimes and censoring.

use crate::time_changed_brownian_sups;
use censmix::datagen::{generate_sample, true_model, MarginalSpec, MixingModel};
use censmix::estimators::nelson_aalen;
use censmix::experiments::{ks_distance, run_experiment, ExperimentConfig, Statistic};
use censmix::limit::{b_cov, GammaKernel};
use censmix::rng::RandomStream;

const LAMBDA: f64 = 1.0;
const MU: f64 = 3.0 / 7.0;

fn iid_model() -> MixingModel {
    MixingModel::iid(MarginalSpec::Exponential { rate: LAMBDA }, MarginalSpec::Exponential { rate: MU })
}

fn classical_variance(t: f64) -> f64 {
    let c = LAMBDA + MU;
    LAMBDA * (c * t).exp_m1() / c
}

#[test]
fn sup_pl_matches_classical_limit() {
    let model = iid_model();
    let (n, reps) = (2000, 1000);
    let cfg = ExperimentConfig::new("iid", model, vec![n], reps, 424242, vec![Statistic::SupPl, Statistic::Ksdist]);
    let result = run_experiment(&cfg).unwrap();
    let data: Vec<f64> = result.values("sup_pl", n).into_iter().map(|v| v.unwrap() * (n as f64).sqrt()).collect();

    let truth = true_model(&model).unwrap();
    let tau = truth.tau(cfg.tau_epsilon).unwrap();
    // W is rough, so its sup needs a much finer grid than the smooth B paths
    let grid: Vec<f64> = (0..8193).map(|i| tau * i as f64 / 8192.0).collect();
    let limit = time_changed_brownian_sups(&grid, classical_variance, |t| truth.sf(t), reps as u64, 99);
    let ks_classical = ks_distance(&data, &limit).unwrap();
    let ks_b = result.summary_row("ksdist", n).unwrap().median.unwrap();
    println!("iid n={n}: KS vs (1-F)W(C) = {ks_classical:.4}; KS vs (1-F)B(.,n) = {ks_b:.4}");
    assert!(ks_classical <= 0.12, "{ks_classical}");
}

#[test]
fn hazard_variance_against_b() {
    let model = iid_model();
    let truth = true_model(&model).unwrap();
    let (n, reps, t) = (4000, 2000, 1.0);
    let values: Vec<f64> = (0..reps)
        .map(|r| {
            let sample = generate_sample(&model, n, &RandomStream::new(8080, r)).unwrap();
            (n as f64).sqrt() * (nelson_aalen(&sample).unwrap().eval(t) - truth.cum_hazard(t))
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let mc = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let classical = classical_variance(t);
    let kernel = GammaKernel::new(&model).unwrap();
    let var_b = b_cov(t, n as u64, t, n as u64, &kernel, &truth).unwrap();
    println!("iid t={t}: MC Var = {mc:.4}; classical = {classical:.4}; Var B = {var_b:.4}; ratio B/MC = {:.3}", var_b / mc);
    // the Monte Carlo variance is the well-established anchor here
    assert!((mc / classical - 1.0).abs() < 0.10, "{mc} vs {classical}");
}
