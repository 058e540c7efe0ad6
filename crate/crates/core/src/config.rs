//! TOML run configuration.
//!
//! ```toml
//! seed = 12345
//!
//! [model]
//! rho_x = 0.5
//! rho_y = 0.5
//! lifetime = { family = "exponential", rate = 1.0 }
//! censoring = { family = "exponential", rate = 0.42857142857142855 }
//!
//! [[experiment]]
//! name = "consistency"
//! sizes = [250, 1000, 4000]
//! reps = 200
//! statistics = ["sup_pl", "sup_hazard"]
//! ```
//!
//! Every key outside the schema is rejected.

use crate::datagen::MixingModel;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, Statistic};
use crate::limit::PathMethod;
use serde::Deserialize;
use std::path::Path;

fn default_epsilon() -> f64 {
    0.05
}
fn default_p0() -> f64 {
    0.1
}
fn default_p1() -> f64 {
    0.9
}
fn default_grid() -> usize {
    512
}
fn default_limit_grid() -> usize {
    257
}
fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub model: MixingModel,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentSection>,
    #[serde(default)]
    pub limit: LimitSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub statistics: Vec<Statistic>,
    #[serde(default = "default_epsilon")]
    pub tau_epsilon: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "default_p1")]
    pub p1: f64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_limit_grid")]
    pub limit_grid_size: usize,
    /// λ in bₙ = n^{-1/2}(log n)^{-λ}
    #[serde(default = "default_one")]
    pub lambda: f64,
    /// constant in the oscillation window λₙ = const·bₙ
    #[serde(default = "default_one")]
    pub window_const: f64,
    pub model: Option<MixingModel>,
}

/// Settings for `gp-sample`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    #[serde(default = "default_epsilon")]
    pub tau_epsilon: f64,
    #[serde(default = "default_limit_grid")]
    pub grid_size: usize,
    #[serde(default = "default_method")]
    pub method: PathMethod,
}

fn default_method() -> PathMethod {
    PathMethod::Integral
}

impl Default for LimitSection {
    fn default() -> Self {
        Self { tau_epsilon: default_epsilon(), grid_size: default_limit_grid(), method: default_method() }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.model.validate()?;
        for e in &cfg.experiments {
            e.to_experiment(&cfg.model, cfg.seed)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn experiment_configs(&self) -> Result<Vec<ExperimentConfig>> {
        self.experiments.iter().map(|e| e.to_experiment(&self.model, self.seed)).collect()
    }
}

impl ExperimentSection {
    pub fn to_experiment(&self, model: &MixingModel, seed: u64) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            name: self.name.clone(),
            model: self.model.unwrap_or(*model),
            sizes: self.sizes.clone(),
            reps: self.reps,
            seed,
            tau_epsilon: self.tau_epsilon,
            p0: self.p0,
            p1: self.p1,
            grid_size: self.grid_size,
            limit_grid_size: self.limit_grid_size,
            statistics: self.statistics.clone(),
            lambda: self.lambda,
            window_const: self.window_const,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
