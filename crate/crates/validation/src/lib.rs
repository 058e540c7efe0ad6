//! Independent oracles used by the acceptance suite.

use censmix::datagen::{generate_sample, true_model, MixingModel};
use censmix::rng::RandomStream;
use rand::Rng;
use rand_distr::StandardNormal;
use std::path::PathBuf;

/// The acceptance configuration shipped with the repository.
pub fn acceptance_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.toml")
}

/// Long-run variance of I(Z_k ≤ s) − H(s) at each point, from pooled
/// non-overlapping batch means over independent series.
pub fn batch_means_gamma(model: &MixingModel, points: &[f64], series: u64, len: usize, batch: usize, seed: u64) -> Vec<f64> {
    let truth = true_model(model).unwrap();
    let h: Vec<f64> = points.iter().map(|&s| truth.h(s)).collect();
    let mut sum_sq = vec![0.0; points.len()];
    let mut batches = 0usize;
    for i in 0..series {
        let sample = generate_sample(model, len, &RandomStream::new(seed, i)).unwrap();
        for chunk in sample.z().chunks_exact(batch) {
            batches += 1;
            for (k, &s) in points.iter().enumerate() {
                let mean = chunk.iter().filter(|&&v| v <= s).count() as f64 / batch as f64 - h[k];
                sum_sq[k] += mean * mean;
            }
        }
    }
    sum_sq.iter().map(|v| v / batches as f64 * batch as f64).collect()
}

/// sup_t |w(t)·W(C(t))| for a Brownian motion W on `grid`, one value per draw.
pub fn time_changed_brownian_sups(
    grid: &[f64],
    variance: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
    draws: u64,
    seed: u64,
) -> Vec<f64> {
    (0..draws)
        .map(|d| {
            let mut rng = RandomStream::new(seed, d).rng(0);
            let (mut w, mut best) = (0.0f64, 0.0f64);
            for k in 1..grid.len() {
                let step = variance(grid[k]) - variance(grid[k - 1]);
                w += step.sqrt() * rng.sample::<f64, _>(StandardNormal);
                best = best.max((weight(grid[k]) * w).abs());
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod diagnostics;
