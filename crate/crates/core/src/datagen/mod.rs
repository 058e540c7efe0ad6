//! Stationary strong-mixing lifetime/censoring generators.
//!
//! Each chain is a Gaussian AR(1) pushed through Φ and then through the
//! target quantile function (a Gaussian copula). Gaussian AR(1) chains are
//! geometrically α-mixing and coordinatewise measurable maps do not enlarge
//! the generated σ-fields, so the transformed chains inherit the mixing rate.
//! This concrete generator is a modelling choice of this crate.

mod marginal;
mod sample;
mod truth;

pub use marginal::MarginalSpec;
pub use sample::{CensoredSample, Latent};
pub use truth::{true_model, AdmissibleRange, TrueModel};

use crate::error::{Error, Result};
use crate::normal;
use crate::rng::{RandomStream, LANE_CENSORING, LANE_LIFETIME};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingModel {
    /// AR(1) correlation of the lifetime chain on the Gaussian scale.
    #[serde(default)]
    pub rho_x: f64,
    /// AR(1) correlation of the censoring chain on the Gaussian scale.
    #[serde(default)]
    pub rho_y: f64,
    pub lifetime: MarginalSpec,
    pub censoring: MarginalSpec,
}

impl MixingModel {
    pub fn iid(lifetime: MarginalSpec, censoring: MarginalSpec) -> Self {
        Self { rho_x: 0.0, rho_y: 0.0, lifetime, censoring }
    }

    pub fn with_rho(mut self, rho_x: f64, rho_y: f64) -> Self {
        self.rho_x = rho_x;
        self.rho_y = rho_y;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho_x)?;
        check_rho(self.rho_y)?;
        self.lifetime.validate()?;
        self.censoring.validate()
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Stationarity(rho.abs()))
    }
}

/// Stationary Gaussian AR(1): e₀ ~ N(0,1), eᵢ = ρ eᵢ₋₁ + √(1−ρ²) ξᵢ.
pub fn ar1_gaussian<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_rho(rho)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let innovation_sd = (1.0 - rho * rho).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut prev: f64 = rng.sample(StandardNormal);
    out.push(prev);
    for _ in 1..n {
        let xi: f64 = rng.sample(StandardNormal);
        prev = rho * prev + innovation_sd * xi;
        out.push(prev);
    }
    Ok(out)
}

/// Maps standard-normal values onto `marginal` through Φ and the quantile
/// function (evaluated from the survival side for tail accuracy).
pub fn to_marginal(gauss: &[f64], marginal: &MarginalSpec) -> Vec<f64> {
    // Φ(−g) underflows past g ≈ 38; the floor keeps the far tail finite
    gauss.iter().map(|&g| marginal.inverse_sf(normal::sf(g).max(f64::MIN_POSITIVE))).collect()
}

/// Draws n censored observations. The lifetime and censoring chains come
/// from independent lanes of `stream`.
pub fn generate_sample(model: &MixingModel, n: usize, stream: &RandomStream) -> Result<CensoredSample> {
    model.validate()?;
    let gx = ar1_gaussian(n, model.rho_x, &mut stream.rng(LANE_LIFETIME))?;
    let gy = ar1_gaussian(n, model.rho_y, &mut stream.rng(LANE_CENSORING))?;
    let x = to_marginal(&gx, &model.lifetime);
    let y = to_marginal(&gy, &model.censoring);
    let sample = CensoredSample::from_latent(x, y)?;
    warn_on_ties(sample.z());
    Ok(sample)
}

fn warn_on_ties(z: &[f64]) {
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ties = sorted.windows(2).filter(|w| w[0] == w[1]).count();
    if ties > 0 {
        log::warn!("{ties} tied observation(s) in a continuous-marginal sample; estimators aggregate them in index order");
    }
}
