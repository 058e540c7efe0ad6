//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Reference workload: Exponential(1) lifetimes, Exponential(3/7) censoring,
//! rho_x = rho_y = 0.5 unless stated. The Monte Carlo criteria read their
//! ladders from `configs/acceptance.toml`.

use censmix::config::Config;
use censmix::datagen::{true_model, CensoredSample, MarginalSpec, MixingModel};
use censmix::estimators::{km, nelson_aalen, survival_at_observations};
use censmix::experiments::{fit_rate, ks_distance, run_experiment, ExperimentResult};
use censmix::limit::{b_cov, BDirectSampler, BIntegrator, GammaKernel, KieferSampler};
use censmix::rng::RandomStream;
use censmix_validation::{acceptance_config, batch_means_gamma};
use rand::Rng;
use std::sync::OnceLock;

// written straight to stdout so the line shows without --nocapture
fn report(id: u32, pass: bool, detail: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn reference_model(rho: f64) -> MixingModel {
    MixingModel::iid(MarginalSpec::Exponential { rate: 1.0 }, MarginalSpec::Exponential { rate: 3.0 / 7.0 }).with_rho(rho, rho)
}

fn run_suite() -> Vec<ExperimentResult> {
    let cfg = Config::load(&acceptance_config()).expect("acceptance config");
    cfg.experiment_configs().unwrap().iter().map(|e| run_experiment(e).unwrap()).collect()
}

fn suite() -> &'static [ExperimentResult] {
    static SUITE: OnceLock<Vec<ExperimentResult>> = OnceLock::new();
    SUITE.get_or_init(run_suite)
}

fn experiment(name: &str) -> &'static ExperimentResult {
    suite().iter().find(|r| r.name == name).unwrap_or_else(|| panic!("experiment {name} missing from config"))
}

fn medians(r: &ExperimentResult, stat: &str) -> Vec<(usize, f64)> {
    r.medians(stat).into_iter().map(|(n, m)| (n, m.unwrap_or_else(|| panic!("{stat} at n={n} invalid")))).collect()
}

#[test]
fn criterion_01_km_matches_edf_without_censoring() {
    let mut worst = 0.0f64;
    for rep in 0..200u64 {
        let mut rng = RandomStream::new(1001, rep).rng(0);
        let n = rng.random_range(1..=500);
        let z: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sample = CensoredSample::new(z.clone(), vec![true; n]).unwrap();
        let fhat = km(&sample).unwrap();
        for &t in fhat.jump_times() {
            let edf = z.iter().filter(|&&v| v <= t).count() as f64 / n as f64;
            worst = worst.max((fhat.eval(t) - edf).abs());
        }
    }
    let pass = worst <= 1e-12;
    report(1, pass, &format!("max |F̂ₙ − edf| = {worst:e} (≤ 1e-12)"));
    assert!(pass);
}

#[test]
fn criterion_02_hand_example() {
    let sample = CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true, false, true]).unwrap();
    let fhat = km(&sample).unwrap();
    let lhat = nelson_aalen(&sample).unwrap();
    let s: Vec<f64> = survival_at_observations(&sample, &fhat).into_iter().map(|(_, v)| v).collect();
    let l: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&t| lhat.eval(t)).collect();
    let pass = s == [2.0 / 3.0, 2.0 / 3.0, 0.0] && l == [1.0 / 3.0, 1.0 / 3.0, 4.0 / 3.0];
    report(2, pass, &format!("Ŝ = {s:?}, Λ̂ = {l:?}"));
    assert!(pass);
}

#[test]
fn criterion_03_consistency_rate() {
    let r = experiment("consistency");
    let m = medians(r, "sup_pl");
    assert_eq!(m.iter().map(|p| p.0).collect::<Vec<_>>(), [250, 1000, 4000]);
    assert_eq!(r.summary_row("sup_pl", 250).unwrap().reps, 200);
    let sizes: Vec<f64> = m.iter().map(|p| p.0 as f64).collect();
    let meds: Vec<f64> = m.iter().map(|p| p.1).collect();
    let fit = fit_rate(&sizes, &meds).unwrap();
    let pass = (-0.60..=-0.40).contains(&fit.slope);
    report(3, pass, &format!("slope {:.4} ± {:.4} (in [−0.60, −0.40]), medians {meds:?}", fit.slope, fit.stderr));
    assert!(pass);
}

#[test]
fn criterion_04_lil_boundedness() {
    let r = experiment("lil");
    let m = medians(r, "lil");
    assert_eq!(m.iter().map(|p| p.0).collect::<Vec<_>>(), [500, 2000, 8000]);
    assert_eq!(r.summary_row("lil", 500).unwrap().reps, 300);
    let hi = m.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let lo = m.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let pass = hi / lo <= 1.6;
    report(4, pass, &format!("max/min median = {:.4} (≤ 1.6), medians {m:?}", hi / lo));
    assert!(pass);
}

#[test]
fn criterion_05_gamma_kernel() {
    let iid = reference_model(0.0);
    let truth = true_model(&iid).unwrap();
    let tau = truth.tau(0.05).unwrap();
    let kernel = GammaKernel::new(&iid).unwrap();
    let grid: Vec<f64> = (0..32).map(|i| tau * i as f64 / 31.0).collect();
    let mut worst = 0.0f64;
    for &s in &grid {
        for &t in &grid {
            let want = truth.h(s.min(t)) - truth.h(s) * truth.h(t);
            worst = worst.max((kernel.gamma(s, t) - want).abs());
        }
    }
    let closed_ok = worst <= 1e-8;

    let mixing = reference_model(0.5);
    let kernel = GammaKernel::new(&mixing).unwrap();
    let points = [0.25, 0.5, 1.0, 1.5, 2.0];
    let oracle = batch_means_gamma(&mixing, &points, 200, 10_000, 100, 5005);
    let rel: Vec<f64> = points.iter().zip(&oracle).map(|(&s, o)| (kernel.gamma(s, s) - o).abs() / o).collect();
    let mc_ok = rel.iter().all(|&r| r <= 0.05);
    let pass = closed_ok && mc_ok;
    report(5, pass, &format!("rho=0 max error {worst:e} (≤ 1e-8); rho=0.5 relative gaps {rel:.4?} (≤ 0.05)"));
    assert!(pass);
}

#[test]
fn criterion_06_b_sampler_cross_validation() {
    let model = reference_model(0.5);
    let truth = true_model(&model).unwrap();
    let kernel = GammaKernel::new(&model).unwrap();
    let tau = truth.tau(0.05).unwrap();
    let level = 100u64;
    let grid: Vec<f64> = (0..257).map(|i| tau * i as f64 / 256.0).collect();
    let kiefer = KieferSampler::new(&grid, &kernel).unwrap();
    let integrator = BIntegrator::new(&grid, &truth).unwrap();
    let draws = 3000;
    let paths: Vec<Vec<f64>> = (0..draws)
        .map(|d| integrator.integrate(&kiefer.sample(level, &mut RandomStream::new(6006, d).rng(2))).unwrap().values)
        .collect();
    let idx = [32, 96, 160, 224];
    let mut pairs = Vec::new();
    for a in 0..idx.len() {
        for b in a..idx.len() {
            pairs.push((idx[a], idx[b]));
        }
    }
    assert_eq!(pairs.len(), 10);
    let mean = |i: usize| paths.iter().map(|p| p[i]).sum::<f64>() / draws as f64;
    let mut worst_z = 0.0f64;
    for &(i, j) in &pairs {
        let (mi, mj) = (mean(i), mean(j));
        let emp = paths.iter().map(|p| (p[i] - mi) * (p[j] - mj)).sum::<f64>() / (draws - 1) as f64;
        let target = b_cov(grid[i], level, grid[j], level, &kernel, &truth).unwrap();
        let vi = b_cov(grid[i], level, grid[i], level, &kernel, &truth).unwrap();
        let vj = b_cov(grid[j], level, grid[j], level, &kernel, &truth).unwrap();
        let se = ((vi * vj + target * target) / (draws - 1) as f64).sqrt();
        worst_z = worst_z.max((emp - target).abs() / se);
    }
    let cov_ok = worst_z <= 5.0;

    // both methods on the same points: the direct grid is every other integral grid point
    let coarse: Vec<f64> = grid.iter().step_by(2).copied().collect();
    let direct = BDirectSampler::new(&coarse, &kernel, &truth).unwrap();
    let sup_integral: Vec<f64> =
        paths.iter().take(2000).map(|p| p.iter().step_by(2).fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let sup_direct: Vec<f64> = (0..2000)
        .map(|d| {
            let p = direct.sample(level, &mut RandomStream::new(6007, d).rng(2));
            p.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect();
    let ks = ks_distance(&sup_integral, &sup_direct).unwrap();
    let pass = cov_ok && ks < 0.05;
    report(6, pass, &format!("max covariance z-score {worst_z:.3} (≤ 5); KS integral vs direct {ks:.4} (< 0.05)"));
    assert!(pass);
}

fn surrogate_check(id: u32, stat: &str, bound: f64) {
    let r = experiment("surrogate");
    assert_eq!(r.summary_row(stat, 2000).unwrap().reps, 1000);
    let m = medians(r, stat);
    let at = |n: usize| m.iter().find(|p| p.0 == n).unwrap().1;
    let (first, last) = (at(250), at(2000));
    let pass = last < first && last <= bound;
    report(id, pass, &format!("KS at n=250: {first:.4}, n=2000: {last:.4} (decreasing, ≤ {bound}); ladder {m:?}"));
    assert!(pass, "criterion {id} fails; the Gaussian approximation lacks the martingale part of the variance");
}

#[test]
fn criterion_07_pl_process_surrogate() {
    surrogate_check(7, "ksdist", 0.12);
}

#[test]
fn criterion_08_quantile_process_surrogate() {
    surrogate_check(8, "ksdist_quantile", 0.15);
}

#[test]
fn criterion_09_bahadur_structural_bound() {
    let r = experiment("quantile");
    let sizes = [250, 1000, 4000];
    let mut violations = 0;
    let mut checked = 0;
    for &n in &sizes {
        let stat = r.values("bahadur", n);
        let bound = r.values("bahadur_jump", n);
        for (s, b) in stat.iter().zip(&bound) {
            match (s, b) {
                (Some(s), Some(b)) => {
                    checked += 1;
                    if s > b {
                        violations += 1;
                    }
                }
                _ => violations += 1,
            }
        }
    }
    let m = medians(r, "bahadur");
    let fit = fit_rate(&m.iter().map(|p| p.0 as f64).collect::<Vec<_>>(), &m.iter().map(|p| p.1).collect::<Vec<_>>()).unwrap();
    let decreasing = m.windows(2).all(|w| w[1].1 < w[0].1);
    let pass = violations == 0 && decreasing && fit.slope <= -0.8;
    report(
        9,
        pass,
        &format!("{checked} replications, {violations} violations; median slope {:.4} (≤ −0.8), medians {m:?}", fit.slope),
    );
    assert!(pass);
}

#[test]
fn criterion_10_quantile_coupling() {
    let r = experiment("quantile");
    let c = medians(r, "coupling");
    let s = medians(r, "sup_quantile");
    assert_eq!(c.iter().map(|p| p.0).collect::<Vec<_>>(), [250, 1000, 4000]);
    let ratio: Vec<f64> = c.iter().zip(&s).map(|(a, b)| a.1 / b.1).collect();
    let pass = ratio.iter().all(|&q| q < 1.0) && ratio.windows(2).all(|w| w[1] <= w[0]);
    report(10, pass, &format!("median ratios {ratio:.4?} (< 1, nonincreasing)"));
    assert!(pass);
}

#[test]
fn criterion_11_determinism() {
    let summaries = |results: &[ExperimentResult]| -> Vec<Vec<u8>> {
        results
            .iter()
            .map(|r| {
                let mut buf = Vec::new();
                r.write_summary_csv(&mut buf).unwrap();
                buf
            })
            .collect()
    };
    let first = summaries(suite());
    let second = summaries(&run_suite());
    let pass = first == second && !first.is_empty();
    report(11, pass, &format!("{} summary files compared byte for byte", first.len()));
    assert!(pass);
}
