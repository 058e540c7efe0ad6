use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Continuous marginal law of a lifetime or censoring time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MarginalSpec {
    Exponential {
        rate: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Uniform on `[0, upper]`.
    Uniform {
        upper: f64,
    },
}

impl MarginalSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            MarginalSpec::Exponential { rate } => ok(rate),
            MarginalSpec::Weibull { shape, scale } => ok(shape) && ok(scale),
            MarginalSpec::Uniform { upper } => ok(upper),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("marginal parameters must be finite and > 0: {self:?}")))
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.sf(t)
    }

    /// Survival function 1 − F(t).
    pub fn sf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            MarginalSpec::Exponential { rate } => (-rate * t).exp(),
            MarginalSpec::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
            MarginalSpec::Uniform { upper } => (1.0 - t / upper).max(0.0),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            MarginalSpec::Exponential { rate } => rate * (-rate * t).exp(),
            MarginalSpec::Weibull { shape, scale } => {
                let u = t / scale;
                shape / scale * u.powf(shape - 1.0) * (-u.powf(shape)).exp()
            }
            MarginalSpec::Uniform { upper } => {
                if t <= upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
        }
    }

    /// Q(p) = inf{t : F(t) ≥ p}.
    pub fn quantile(&self, p: f64) -> f64 {
        self.inverse_sf(1.0 - p)
    }

    /// The t with 1 − F(t) = s; exact in the far upper tail where
    /// `quantile(1 − s)` would lose digits.
    pub fn inverse_sf(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        match *self {
            MarginalSpec::Exponential { rate } => -s.ln() / rate,
            MarginalSpec::Weibull { shape, scale } => scale * (-s.ln()).powf(1.0 / shape),
            MarginalSpec::Uniform { upper } => upper * (1.0 - s.max(0.0)),
        }
    }

    /// Right end of the support (may be infinite).
    pub fn upper_support(&self) -> f64 {
        match *self {
            MarginalSpec::Uniform { upper } => upper,
            _ => f64::INFINITY,
        }
    }
}
