use super::rates::RateParams;
use crate::datagen::{AdmissibleRange, TrueModel};
use crate::error::{Error, Result};
use crate::estimators::{pl_quantile, pl_quantile_right, ProcessPath, StepFunction};
use std::collections::VecDeque;

/// sup |path|, including the left limits stored alongside step paths.
pub fn sup_norm(path: &ProcessPath) -> Result<f64> {
    sup_norm_weighted(path, |_| 1.0)
}

/// sup |w(t)·path(t)| over the grid and the stored one-sided limits.
pub fn sup_norm_weighted(path: &ProcessPath, w: impl Fn(f64) -> f64) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = 0.0f64;
    for (i, &t) in path.grid.iter().enumerate() {
        let wt = w(t).abs();
        best = best.max(wt * path.values[i].abs());
        if let Some(other) = &path.other_side {
            best = best.max(wt * other[i].abs());
        }
    }
    Ok(best)
}

fn loglog(n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InvalidParameter(format!("n = {n}: the log log n normalization needs n >= 10")));
    }
    Ok((n as f64).ln().ln())
}

fn a_n(n: usize) -> f64 {
    RateParams::a_n(n as f64)
}

/// Which estimator a LIL statistic is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LilTarget {
    Hazard,
    Pl,
}

/// sup |estimate − truth| over `grid` ⊂ [0, τ], counting left limits.
pub fn sup_deviation(est: &StepFunction, truth: impl Fn(f64) -> f64, grid: &[f64], range: &AdmissibleRange) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = 0.0f64;
    for &t in grid {
        range.check(t)?;
        let f = truth(t);
        best = best.max((est.eval(t) - f).abs()).max((est.left_limit(t) - f).abs());
    }
    Ok(best)
}

/// LIL normalization: sup_dev · (n / log log n)^{1/2}.
pub fn lil_normalize(sup_dev: f64, n: usize) -> Result<f64> {
    loglog(n)?;
    Ok(sup_dev / a_n(n))
}

/// T_n = sup_{[0,τ]} |est − truth| · (n / log log n)^{1/2}.
pub fn lil_stat(
    est: &StepFunction,
    truth: &TrueModel,
    which: LilTarget,
    grid: &[f64],
    n: usize,
    range: &AdmissibleRange,
) -> Result<f64> {
    loglog(n)?;
    let dev = match which {
        LilTarget::Hazard => sup_deviation(est, |t| truth.cum_hazard(t), grid, range)?,
        LilTarget::Pl => sup_deviation(est, |t| truth.cdf(t), grid, range)?,
    };
    lil_normalize(dev, n)
}

/// sup_p |F̂ₙ(Qₙ(p)) − p|.
pub fn bahadur_stat(fhat: &StepFunction, p_grid: &[f64]) -> Result<f64> {
    let mut best = 0.0f64;
    for &p in p_grid {
        let q = pl_quantile(fhat, p)?;
        best = best.max((fhat.eval(q) - p).abs());
    }
    Ok(best)
}

/// Largest jump of F̂ₙ at jump times in [Qₙ(p₀), Qₙ(p₁)], the structural
/// ceiling for [`bahadur_stat`] over a grid spanning [p₀, p₁].
pub fn bahadur_jump_bound(fhat: &StepFunction, p_grid: &[f64]) -> Result<f64> {
    let (Some(&lo), Some(&hi)) = (p_grid.first(), p_grid.last()) else {
        return Ok(0.0);
    };
    let (a, b) = (pl_quantile(fhat, lo)?, pl_quantile(fhat, hi)?);
    Ok(fhat.jump_times().iter().zip(fhat.jumps()).filter(|(t, _)| (a..=b).contains(*t)).map(|(_, j)| j).fold(0.0, f64::max))
}

/// sup_p √n |Qₙ(p) − Q(p)| / √(log log n), with both one-sided values of Qₙ.
pub fn qdev_stat(fhat: &StepFunction, truth: &TrueModel, p_grid: &[f64], n: usize) -> Result<f64> {
    let ll = loglog(n)?;
    let mut best = 0.0f64;
    for &p in p_grid {
        let q = truth.quantile(p);
        best = best.max((pl_quantile(fhat, p)? - q).abs());
        if let Ok(qr) = pl_quantile_right(fhat, p) {
            best = best.max((qr - q).abs());
        }
    }
    Ok(best * (n as f64).sqrt() / ll.sqrt())
}

/// Normalizes a synthetic quantile deviation the same way as [`qdev_stat`].
pub fn qdev_normalize(sup_dev: f64, n: usize) -> Result<f64> {
    Ok(sup_dev * (n as f64).sqrt() / loglog(n)?.sqrt())
}

/// sup over grid pairs with |s − t| ≤ width of |v(s) − v(t)|, by a sliding
/// window max/min.
pub fn oscillation_stat(grid: &[f64], values: &[f64], width: f64) -> Result<f64> {
    if grid.len() != values.len() {
        return Err(Error::InvalidParameter("grid and values differ in length".into()));
    }
    if !(width >= 0.0) {
        return Err(Error::InvalidParameter(format!("window width {width} must be nonnegative")));
    }
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut left = 0;
    let mut best = 0.0f64;
    for right in 0..grid.len() {
        while maxq.back().is_some_and(|&k| values[k] <= values[right]) {
            maxq.pop_back();
        }
        maxq.push_back(right);
        while minq.back().is_some_and(|&k| values[k] >= values[right]) {
            minq.pop_back();
        }
        minq.push_back(right);
        while grid[right] - grid[left] > width {
            left += 1;
        }
        while maxq.front().is_some_and(|&k| k < left) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&k| k < left) {
            minq.pop_front();
        }
        best = best.max(values[maxq[0]] - values[minq[0]]);
    }
    Ok(best)
}

/// sup_p |ρₙ(p) − Zₙ₂(Q(p))|, with `rho_path` from `quantile_process` on the
/// same p grid.
pub fn coupling_stat(rho_path: &ProcessPath, fhat: &StepFunction, truth: &TrueModel) -> Result<f64> {
    if rho_path.is_empty() {
        return Err(Error::EmptySample);
    }
    let root_n = (rho_path.n as f64).sqrt();
    let mut best = 0.0f64;
    for (i, &p) in rho_path.grid.iter().enumerate() {
        let z = root_n * (fhat.eval(truth.quantile(p)) - p);
        best = best.max((rho_path.values[i] - z).abs());
        if let Some(other) = &rho_path.other_side {
            best = best.max((other[i] - z).abs());
        }
    }
    Ok(best)
}

/// sup_{grid} |(F̂ₙ − F) − (1 − F)(Λ̂ₙ − Λ)|, both sides of each jump.
pub fn rel38_remainder(fhat: &StepFunction, lhat: &StepFunction, truth: &TrueModel, grid: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &t in grid {
        let (f, l) = (truth.cdf(t), truth.cum_hazard(t));
        let r = (fhat.eval(t) - f) - (1.0 - f) * (lhat.eval(t) - l);
        let rl = (fhat.left_limit(t) - f) - (1.0 - f) * (lhat.left_limit(t) - l);
        best = best.max(r.abs()).max(rl.abs());
    }
    best
}

/// [`rel38_remainder`] · n / log log n.
pub fn rel38_stat(
    fhat: &StepFunction,
    lhat: &StepFunction,
    truth: &TrueModel,
    grid: &[f64],
    n: usize,
    range: &AdmissibleRange,
) -> Result<f64> {
    let ll = loglog(n)?;
    for &t in grid {
        range.check(t)?;
    }
    Ok(rel38_remainder(fhat, lhat, truth, grid) * n as f64 / ll)
}

/// Exact two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}
