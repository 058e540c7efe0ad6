//! Counting processes and the product-limit, Nelson–Aalen and PL-quantile
//! estimators, plus the normalized empirical processes built from them.

mod process;
mod step;

pub(crate) use process::uniform_grid;
pub use process::{hazard_process, pl_process, quantile_grid, quantile_process, sup_grid, ProcessKind, ProcessPath};
pub use step::{Continuity, StepFunction};

use crate::datagen::CensoredSample;
use crate::error::{Error, Result};

/// Slack used when deciding whether a step value reaches a probability
/// level; absorbs rounding in the accumulated product.
pub const ATTAIN_TOL: f64 = 1e-12;

/// Distinct observation times with their event and at-risk counts.
#[derive(Debug, Clone)]
struct RiskTable {
    n: usize,
    times: Vec<f64>,
    events: Vec<usize>,
    /// #{i : zᵢ ≥ time}
    at_risk: Vec<usize>,
}

fn risk_table(sample: &CensoredSample) -> Result<RiskTable> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len();
    let z = sample.z();
    let delta = sample.delta();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut at_risk = Vec::new();
    let mut i = 0;
    while i < n {
        let t = z[order[i]];
        let start = i;
        let mut d = 0;
        while i < n && z[order[i]] == t {
            d += usize::from(delta[order[i]]);
            i += 1;
        }
        times.push(t);
        events.push(d);
        at_risk.push(n - start);
    }
    Ok(RiskTable { n, times, events, at_risk })
}

/// Ȳₙ(t) = n⁻¹#{zᵢ ≥ t} (left-continuous) and N̄ₙ(t) = n⁻¹#{zᵢ ≤ t, δᵢ = 1}.
pub fn counting(sample: &CensoredSample) -> Result<(StepFunction, StepFunction)> {
    let table = risk_table(sample)?;
    let n = table.n as f64;
    let mut y_values = Vec::with_capacity(table.times.len());
    for (k, _) in table.times.iter().enumerate() {
        let beyond = table.at_risk.get(k + 1).copied().unwrap_or(0);
        y_values.push(beyond as f64 / n);
    }
    let ybar = StepFunction::new(table.times.clone(), y_values, 1.0, Continuity::Left)?;

    let mut n_times = Vec::new();
    let mut n_values = Vec::new();
    let mut cum = 0usize;
    for (t, d) in table.times.iter().zip(&table.events) {
        if *d > 0 {
            cum += d;
            n_times.push(*t);
            n_values.push(cum as f64 / n);
        }
    }
    let nbar = StepFunction::right_continuous(n_times, n_values, 0.0)?;
    Ok((ybar, nbar))
}

/// Kaplan–Meier estimate F̂ₙ of the lifetime cdf:
/// 1 − F̂ₙ(t) = Π_{s ≤ t} (1 − dNₙ(s)/Yₙ(s)).
///
/// Past the largest observation F̂ₙ keeps its last value, so it stays below
/// one when that observation is censored.
pub fn km(sample: &CensoredSample) -> Result<StepFunction> {
    let table = risk_table(sample)?;
    let mut surv = 1.0;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for k in 0..table.times.len() {
        let d = table.events[k];
        if d == 0 {
            continue;
        }
        let y = table.at_risk[k];
        surv *= (y - d) as f64 / y as f64;
        times.push(table.times[k]);
        values.push(1.0 - surv);
    }
    StepFunction::right_continuous(times, values, 0.0)
}

/// Nelson–Aalen estimate Λ̂ₙ(t) = Σ_{s ≤ t} dNₙ(s)/Yₙ(s).
pub fn nelson_aalen(sample: &CensoredSample) -> Result<StepFunction> {
    let table = risk_table(sample)?;
    let mut cum = 0.0;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for k in 0..table.times.len() {
        let d = table.events[k];
        if d == 0 {
            continue;
        }
        cum += d as f64 / table.at_risk[k] as f64;
        times.push(table.times[k]);
        values.push(cum);
    }
    StepFunction::right_continuous(times, values, 0.0)
}

/// Qₙ(p) = inf{t : F̂ₙ(t) ≥ p}.
pub fn pl_quantile(fhat: &StepFunction, p: f64) -> Result<f64> {
    check_probability(p)?;
    let k = fhat.values().partition_point(|&v| v < p - ATTAIN_TOL);
    fhat.jump_times().get(k).copied().ok_or(Error::QuantileNotAttained { p, sup: fhat.last_value() })
}

/// Qₙ(p+) = inf{t : F̂ₙ(t) > p}, the right limit of the left-continuous Qₙ.
pub fn pl_quantile_right(fhat: &StepFunction, p: f64) -> Result<f64> {
    check_probability(p)?;
    let k = fhat.values().partition_point(|&v| v <= p + ATTAIN_TOL);
    fhat.jump_times().get(k).copied().ok_or(Error::QuantileNotAttained { p, sup: fhat.last_value() })
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")))
    }
}

/// Survival estimate 1 − F̂ₙ evaluated at every distinct observed time.
pub fn survival_at_observations(sample: &CensoredSample, fhat: &StepFunction) -> Vec<(f64, f64)> {
    let mut z = sample.z().to_vec();
    z.sort_by(f64::total_cmp);
    z.dedup();
    z.into_iter().map(|t| (t, 1.0 - fhat.eval(t))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> CensoredSample {
        CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true, false, true]).unwrap()
    }

    fn uncensored(z: &[f64]) -> CensoredSample {
        CensoredSample::new(z.to_vec(), vec![true; z.len()]).unwrap()
    }

    #[test]
    fn counting_toy() {
        let (ybar, nbar) = counting(&toy()).unwrap();
        assert_eq!(ybar.eval(2.0), 2.0 / 3.0);
        assert_eq!(nbar.eval(2.0), 1.0 / 3.0);
        assert_eq!(ybar.eval(0.0), 1.0);
        assert_eq!(ybar.eval(3.5), 0.0);
        assert_eq!(nbar.eval(f64::INFINITY), 2.0 / 3.0);
    }

    #[test]
    fn km_toy() {
        let f = km(&toy()).unwrap();
        assert_eq!(1.0 - f.eval(1.0), 2.0 / 3.0);
        assert_eq!(1.0 - f.eval(2.5), 2.0 / 3.0);
        assert_eq!(1.0 - f.eval(3.0), 0.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.jump_times(), &[1.0, 3.0]);
    }

    #[test]
    fn nelson_aalen_toy() {
        let l = nelson_aalen(&toy()).unwrap();
        assert_eq!(l.eval(1.0), 1.0 / 3.0);
        assert_eq!(l.eval(2.0), 1.0 / 3.0);
        assert_eq!(l.eval(3.0), 1.0 / 3.0 + 1.0);
        assert_eq!(l.eval(0.9), 0.0);
    }

    #[test]
    fn km_uncensored_is_edf() {
        let f = km(&uncensored(&[1.0, 2.0, 3.0])).unwrap();
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn km_holds_last_value_after_censored_tail() {
        let s = CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true, true, false]).unwrap();
        let f = km(&s).unwrap();
        assert!((f.eval(100.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_aggregate_into_one_factor() {
        let s = CensoredSample::new(vec![2.0, 1.0, 2.0, 2.0], vec![true, true, false, true]).unwrap();
        let f = km(&s).unwrap();
        let l = nelson_aalen(&s).unwrap();
        // at t=2: Y=3, d=2
        assert!((1.0 - f.eval(2.0) - 0.75 * (1.0 / 3.0)).abs() < 1e-15);
        assert!((l.eval(2.0) - (0.25 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn quantiles_toy() {
        let f = km(&uncensored(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(pl_quantile(&f, 0.5).unwrap(), 2.0);
        assert_eq!(pl_quantile(&f, 1.0 / 3.0).unwrap(), 1.0);
        assert_eq!(pl_quantile_right(&f, 1.0 / 3.0).unwrap(), 2.0);
        let capped = km(&CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true, true, false]).unwrap()).unwrap();
        assert!(matches!(pl_quantile(&capped, 0.99), Err(Error::QuantileNotAttained { .. })));
        assert!(pl_quantile(&f, 0.0).is_err());
    }

    #[test]
    fn empty_sample_errors() {
        assert!(CensoredSample::new(vec![], vec![]).is_err());
    }

    #[test]
    fn survival_at_observed_times() {
        let s = toy();
        let v = survival_at_observations(&s, &km(&s).unwrap());
        assert_eq!(v, vec![(1.0, 2.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 0.0)]);
    }

    fn arb_sample() -> impl Strategy<Value = CensoredSample> {
        prop::collection::vec((0.0f64..10.0, any::<bool>()), 1..200).prop_map(|v| {
            let (z, d): (Vec<f64>, Vec<bool>) = v.into_iter().unzip();
            CensoredSample::new(z, d).unwrap()
        })
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(s in arb_sample()) {
            let f = km(&s).unwrap();
            let l = nelson_aalen(&s).unwrap();
            let (ybar, nbar) = counting(&s).unwrap();
            prop_assert!(f.values().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(l.values().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(ybar.values().windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(nbar.values().windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(ybar.last_value(), 0.0);
        }

        #[test]
        fn km_dominates_nelson_aalen(s in arb_sample()) {
            // −log(1 − u) ≥ u factorwise
            let f = km(&s).unwrap();
            let l = nelson_aalen(&s).unwrap();
            for &t in f.jump_times() {
                let fv = f.eval(t);
                if fv < 1.0 {
                    prop_assert!(-(1.0 - fv).ln() >= l.eval(t) - 1e-12);
                }
            }
        }

        #[test]
        fn jump_identities(s in arb_sample()) {
            let f = km(&s).unwrap();
            let l = nelson_aalen(&s).unwrap();
            let (ybar, nbar) = counting(&s).unwrap();
            let n = s.len() as f64;
            for &t in l.jump_times() {
                let dn = (nbar.eval(t) - nbar.left_limit(t)) * n;
                let y = ybar.eval(t) * n;
                let ratio = dn / y;
                prop_assert!((l.eval(t) - l.left_limit(t) - ratio).abs() < 1e-9);
                let before = 1.0 - f.left_limit(t);
                if before > 1e-9 {
                    prop_assert!(((1.0 - f.eval(t)) / before - (1.0 - ratio)).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn generalized_inverse(s in arb_sample(), p in 0.01f64..0.99) {
            let f = km(&s).unwrap();
            match pl_quantile(&f, p) {
                Ok(q) => {
                    prop_assert!(f.eval(q) >= p - ATTAIN_TOL);
                    prop_assert!(f.left_limit(q) < p);
                }
                Err(Error::QuantileNotAttained { .. }) => prop_assert!(f.last_value() < p),
                Err(e) => prop_assert!(false, "{e}"),
            }
            for &t in f.jump_times() {
                let v = f.eval(t);
                if v > 0.0 && v < 1.0 {
                    prop_assert!(pl_quantile(&f, v).unwrap() <= t);
                }
            }
        }

        #[test]
        fn uncensored_km_equals_edf(z in prop::collection::vec(0.0f64..5.0, 1..500)) {
            let s = uncensored(&z);
            let f = km(&s).unwrap();
            let n = z.len() as f64;
            for &t in f.jump_times() {
                let edf = z.iter().filter(|v| **v <= t).count() as f64 / n;
                prop_assert!((f.eval(t) - edf).abs() <= 1e-12);
            }
        }
    }
}
