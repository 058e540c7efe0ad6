use serde::{Deserialize, Serialize};

/// Rate sequences used to normalize statistics, plus the exponents fitted
/// from a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// λ in bₙ = n^{-1/2}(log n)^{-λ}.
    pub lambda: f64,
    /// Constant in λₙ = const·bₙ.
    pub window_const: f64,
    pub lambda_exp: Option<f64>,
    pub beta_exp: Option<f64>,
}

impl Default for RateParams {
    fn default() -> Self {
        Self { lambda: 1.0, window_const: 1.0, lambda_exp: None, beta_exp: None }
    }
}

impl RateParams {
    /// (log log n / n)^{1/2}; decreasing only from n ≈ 5.9 on.
    pub fn a_n(n: f64) -> f64 {
        (n.ln().ln() / n).sqrt()
    }

    pub fn b_n(&self, n: f64) -> f64 {
        n.powf(-0.5) * n.ln().powf(-self.lambda)
    }

    pub fn lambda_n(&self, n: f64) -> f64 {
        self.window_const * self.b_n(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// OLS of log(median) on log(n). Non-positive medians are dropped with a
/// warning; `None` when fewer than three usable points remain.
pub fn fit_rate(sizes: &[f64], medians: &[f64]) -> Option<RateFit> {
    fit_loglog(sizes, medians, f64::ln)
}

/// OLS of log(median) on log(log n): the exponent of a (log n)^{-γ} rate.
pub fn fit_log_rate(sizes: &[f64], medians: &[f64]) -> Option<RateFit> {
    fit_loglog(sizes, medians, |n| n.ln().ln())
}

fn fit_loglog(sizes: &[f64], medians: &[f64], xmap: impl Fn(f64) -> f64) -> Option<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &m) in sizes.iter().zip(medians) {
        if m > 0.0 && m.is_finite() {
            xs.push(xmap(n));
            ys.push(m.ln());
        } else {
            log::warn!("fit_rate: dropping non-positive median {m} at n = {n}");
        }
    }
    let k = xs.len();
    if k < 3 {
        return None;
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (rss / (kf - 2.0) / sxx).sqrt();
    Some(RateFit { slope, stderr, intercept, points: k })
}

/// Sample quantile, linear interpolation between order statistics (type 7).
/// `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(quantile_sorted(&v, 0.5))
}
