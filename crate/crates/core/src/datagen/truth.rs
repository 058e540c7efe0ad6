use super::{MarginalSpec, MixingModel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

const FSTAR_RTOL: f64 = 1e-9;

/// Closed-form (or quadrature-backed) population quantities of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueModel {
    lifetime: MarginalSpec,
    censoring: MarginalSpec,
}

pub fn true_model(model: &MixingModel) -> Result<TrueModel> {
    model.validate()?;
    let truth = TrueModel { lifetime: model.lifetime, censoring: model.censoring };
    // probe the quadrature path so a non-convergent model fails up front
    for i in 1..=16 {
        let t = truth.h_quantile(i as f64 / 17.0);
        truth.try_fstar(t)?;
        truth.try_gstar(t)?;
    }
    Ok(truth)
}

impl TrueModel {
    pub fn lifetime(&self) -> &MarginalSpec {
        &self.lifetime
    }

    pub fn censoring(&self) -> &MarginalSpec {
        &self.censoring
    }

    /// F(t).
    pub fn cdf(&self, t: f64) -> f64 {
        self.lifetime.cdf(t)
    }

    /// 1 − F(t).
    pub fn sf(&self, t: f64) -> f64 {
        self.lifetime.sf(t)
    }

    /// G(t).
    pub fn censoring_cdf(&self, t: f64) -> f64 {
        self.censoring.cdf(t)
    }

    /// f(t).
    pub fn density(&self, t: f64) -> f64 {
        self.lifetime.pdf(t)
    }

    /// H̄(t) = (1 − F(t))(1 − G(t)).
    pub fn hbar(&self, t: f64) -> f64 {
        self.lifetime.sf(t) * self.censoring.sf(t)
    }

    /// H(t) = P(Z ≤ t).
    pub fn h(&self, t: f64) -> f64 {
        1.0 - self.hbar(t)
    }

    /// Λ(t) = −log(1 − F(t)).
    pub fn cum_hazard(&self, t: f64) -> f64 {
        -self.lifetime.sf(t).ln()
    }

    pub fn hazard(&self, t: f64) -> f64 {
        self.lifetime.pdf(t) / self.lifetime.sf(t)
    }

    /// Q(p) = inf{t : F(t) ≥ p}.
    pub fn quantile(&self, p: f64) -> f64 {
        self.lifetime.quantile(p)
    }

    /// F*(t) = P(Z ≤ t, δ = 1) = ∫₀ᵗ (1 − G) dF.
    pub fn fstar(&self, t: f64) -> f64 {
        self.try_fstar(t).unwrap_or_else(|e| match e {
            Error::Quadrature { estimate, .. } => estimate,
            _ => f64::NAN,
        })
    }

    pub fn try_fstar(&self, t: f64) -> Result<f64> {
        sub_distribution(&self.lifetime, &self.censoring, t)
    }

    /// G*(t) = P(Z ≤ t, δ = 0) = ∫₀ᵗ (1 − F) dG.
    pub fn gstar(&self, t: f64) -> f64 {
        self.try_gstar(t).unwrap_or_else(|e| match e {
            Error::Quadrature { estimate, .. } => estimate,
            _ => f64::NAN,
        })
    }

    pub fn try_gstar(&self, t: f64) -> Result<f64> {
        sub_distribution(&self.censoring, &self.lifetime, t)
    }

    /// inf{t : H(t) ≥ p}.
    pub fn h_quantile(&self, p: f64) -> f64 {
        self.hbar_crossing(1.0 - p)
    }

    /// τ = inf{t : H̄(t) ≤ ε}, the right end of the range on which sup
    /// norms and process paths are taken.
    pub fn tau(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        Ok(self.hbar_crossing(epsilon))
    }

    pub fn admissible_range(&self, epsilon: f64) -> Result<AdmissibleRange> {
        Ok(AdmissibleRange { tau: self.tau(epsilon)?, epsilon })
    }

    fn hbar_crossing(&self, level: f64) -> f64 {
        if level >= 1.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        let limit = self.lifetime.upper_support().min(self.censoring.upper_support());
        while self.hbar(hi) > level {
            if hi >= limit {
                break;
            }
            hi = (2.0 * hi).min(limit);
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.hbar(mid) <= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// The range [0, τ] with H̄(τ) = ε.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdmissibleRange {
    pub tau: f64,
    pub epsilon: f64,
}

impl AdmissibleRange {
    pub fn check(&self, t: f64) -> Result<()> {
        if (0.0..=self.tau).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, tau: self.tau })
        }
    }
}

/// ∫₀ᵗ (1 − B) dA, integrated in u = A(s) so the integrand stays bounded
/// even where A has an unbounded density.
fn sub_distribution(a: &MarginalSpec, b: &MarginalSpec, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    if let (MarginalSpec::Exponential { rate: la }, MarginalSpec::Exponential { rate: lb }) = (a, b) {
        let s = la + lb;
        return Ok(la / s * -(-s * t).exp_m1());
    }
    // nothing accrues once B has left its support
    let upper = a.cdf(t.min(b.upper_support()));
    let tol = Tolerance::relative(FSTAR_RTOL).with_abs(1e-15);
    integrate(|u| b.sf(a.quantile(u)), 0.0, upper, tol).map(|e| e.value)
}
