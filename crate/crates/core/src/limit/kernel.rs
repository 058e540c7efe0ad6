use super::bvn::OrthantRule;
use crate::datagen::{MarginalSpec, MixingModel};
use crate::error::Result;
use crate::normal;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Target bound on the neglected tail of the lag series.
pub const TAIL_TARGET: f64 = 1e-8;

/// A time point with its Gaussian-scale thresholds under both copulas.
#[derive(Debug, Clone, Copy)]
pub struct KernelPoint {
    pub t: f64,
    /// X > t  ⇔  e > ax
    ax: f64,
    ay: f64,
    fbar: f64,
    gbar: f64,
}

impl KernelPoint {
    pub fn new(t: f64, lifetime: &MarginalSpec, censoring: &MarginalSpec) -> Self {
        let fbar = lifetime.sf(t);
        let gbar = censoring.sf(t);
        Self { t, ax: -normal::quantile(fbar), ay: -normal::quantile(gbar), fbar, gbar }
    }

    pub fn hbar(&self) -> f64 {
        self.fbar * self.gbar
    }
}

/// Long-run covariance kernel of the indicator process
/// gₖ(s) = I(Zₖ ≤ s) − H(s):
///
/// Γ(s, s′) = Cov(g₁(s), g₁(s′)) + Σ_{k≥2} [Cov(g₁(s), gₖ(s′)) + Cov(g₁(s′), gₖ(s))],
///
/// truncated at `k_max` with a certified bound on the neglected tail.
#[derive(Debug, Clone)]
pub struct GammaKernel {
    model: MixingModel,
    k_max: usize,
    tail_bound: f64,
    /// rules for lags k = 2..=k_max, correlations ρ^{k−1}
    rules_x: Vec<OrthantRule>,
    rules_y: Vec<OrthantRule>,
}

impl GammaKernel {
    pub fn new(model: &MixingModel) -> Result<Self> {
        model.validate()?;
        let (k_max, tail_bound) = truncation(model.rho_x, model.rho_y);
        Ok(Self::with_order(model, k_max, tail_bound))
    }

    /// Kernel truncated at an explicit order; the tail bound is recomputed
    /// for that order.
    pub fn with_k_max(model: &MixingModel, k_max: usize) -> Result<Self> {
        model.validate()?;
        let r = model.rho_x.abs().max(model.rho_y.abs());
        Ok(Self::with_order(model, k_max.max(1), tail_after(r, k_max.max(1))))
    }

    fn with_order(model: &MixingModel, k_max: usize, tail_bound: f64) -> Self {
        let rules = |rho: f64| (2..=k_max).map(|k| OrthantRule::new(rho.powi(k as i32 - 1))).collect();
        Self { model: *model, k_max, tail_bound, rules_x: rules(model.rho_x), rules_y: rules(model.rho_y) }
    }

    pub fn model(&self) -> &MixingModel {
        &self.model
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Bound on |Γ − Γ_{k_max}| valid for every (s, s′).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn point(&self, t: f64) -> KernelPoint {
        KernelPoint::new(t, &self.model.lifetime, &self.model.censoring)
    }

    pub fn gamma(&self, s: f64, s2: f64) -> f64 {
        self.gamma_points(&self.point(s), &self.point(s2))
    }

    /// Γ(s, s′) with the truncation bound that applies to it.
    pub fn gamma_with_bound(&self, s: f64, s2: f64) -> (f64, f64) {
        (self.gamma(s, s2), self.tail_bound)
    }

    /// Symmetric exactly: each lag contributes `c(p,q) + c(q,p)` and
    /// floating-point addition commutes.
    pub fn gamma_points(&self, p: &KernelPoint, q: &KernelPoint) -> f64 {
        let mut g = p.hbar().min(q.hbar()) - p.hbar() * q.hbar();
        for (rx, ry) in self.rules_x.iter().zip(&self.rules_y) {
            g += lag_cov(p, q, rx, ry) + lag_cov(q, p, rx, ry);
        }
        g
    }

    /// Γ on all pairs of `grid`.
    pub fn tabulate(&self, grid: &[f64]) -> GammaGrid {
        let points: Vec<KernelPoint> = grid.iter().map(|&t| self.point(t)).collect();
        let m = points.len();
        let rows: Vec<Vec<f64>> =
            (0..m).into_par_iter().map(|i| (0..=i).map(|j| self.gamma_points(&points[i], &points[j])).collect()).collect();
        let matrix = DMatrix::from_fn(m, m, |i, j| if j <= i { rows[i][j] } else { rows[j][i] });
        GammaGrid { grid: grid.to_vec(), matrix, tail_bound: self.tail_bound }
    }
}

/// Cov(I(Z₁ > p), I(Z_k > q)) given the lag's copula rules.
fn lag_cov(p: &KernelPoint, q: &KernelPoint, rx: &OrthantRule, ry: &OrthantRule) -> f64 {
    let cx = rx.excess(p.ax, q.ax);
    let cy = ry.excess(p.ay, q.ay);
    cx * p.gbar * q.gbar + cy * p.fbar * q.fbar + cx * cy
}

/// Cov(g₁(s), g_k(s′)) = P(Z₁ ≤ s, Z_k ≤ s′) − H(s)H(s′).
///
/// The two chains are independent, so the joint survival factorizes into
/// bivariate normal orthant probabilities with correlation ρ^{k−1}.
pub fn cov_g1gk(s: f64, s2: f64, k: usize, model: &MixingModel) -> f64 {
    assert!(k >= 1, "lag index starts at 1");
    let p = KernelPoint::new(s, &model.lifetime, &model.censoring);
    let q = KernelPoint::new(s2, &model.lifetime, &model.censoring);
    if k == 1 {
        return p.hbar().min(q.hbar()) - p.hbar() * q.hbar();
    }
    let lag = k as i32 - 1;
    let cx = OrthantRule::new(model.rho_x.powi(lag)).excess(p.ax, q.ax);
    let cy = OrthantRule::new(model.rho_y.powi(lag)).excess(p.ay, q.ay);
    (cx + p.fbar * q.fbar) * (cy + p.gbar * q.gbar) - p.hbar() * q.hbar()
}

/// For ρ ≤ r the copula excess satisfies |c(ρ)| ≤ asin(ρ)/(2π) ≤ c₀ρ with
/// c₀ = asin(r)/(2πr), since ∂P/∂ρ is the bivariate density, itself at most
/// 1/(2π√(1−ρ²)). Hence |Cov(g₁, g_k)| ≤ (2c₀ + c₀²) r^{k−1}.
fn lag_constant(r: f64) -> f64 {
    let c0 = r.asin() / (2.0 * PI * r);
    2.0 * c0 + c0 * c0
}

/// Σ_{k > k_max} 2C r^{k−1}.
fn tail_after(r: f64, k_max: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    2.0 * lag_constant(r) * r.powi(k_max as i32) / (1.0 - r)
}

fn truncation(rho_x: f64, rho_y: f64) -> (usize, f64) {
    let r = rho_x.abs().max(rho_y.abs());
    if r == 0.0 {
        return (1, 0.0);
    }
    let c = lag_constant(r);
    let k = ((TAIL_TARGET * (1.0 - r) / (2.0 * c)).ln() / r.ln()).ceil().max(1.0) as usize;
    let mut k_max = k;
    while tail_after(r, k_max) >= TAIL_TARGET {
        k_max += 1;
    }
    (k_max, tail_after(r, k_max))
}

/// Γ tabulated on a grid.
#[derive(Debug, Clone)]
pub struct GammaGrid {
    pub grid: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub tail_bound: f64,
}

/// Writes a square matrix as CSV: a header row of grid points, then the
/// rows in order.
pub fn write_matrix_csv<W: Write>(writer: W, grid: &[f64], matrix: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(grid.iter().map(|g| g.to_string()))?;
    for i in 0..matrix.nrows() {
        w.write_record(matrix.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

impl GammaGrid {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_matrix_csv(writer, &self.grid, &self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{ar1_gaussian, to_marginal, true_model};
    use crate::rng::RandomStream;

    fn exp(rate: f64) -> MarginalSpec {
        MarginalSpec::Exponential { rate }
    }

    #[test]
    fn lag_one_is_bernoulli_variance() {
        let m = MixingModel::iid(exp(1.0), exp(0.5)).with_rho(0.4, 0.2);
        let t = true_model(&m).unwrap();
        let h = t.h(0.8);
        assert!((cov_g1gk(0.8, 0.8, 1, &m) - h * (1.0 - h)).abs() < 1e-15);
    }

    #[test]
    fn iid_lags_vanish() {
        let m = MixingModel::iid(exp(1.0), exp(0.5));
        for k in 2..6 {
            assert!(cov_g1gk(0.3, 1.1, k, &m).abs() < 1e-15);
        }
    }

    #[test]
    fn iid_closed_form() {
        let m = MixingModel::iid(exp(1.0), exp(3.0 / 7.0));
        let t = true_model(&m).unwrap();
        let kernel = GammaKernel::new(&m).unwrap();
        assert_eq!(kernel.k_max(), 1);
        for s in [0.0f64, 0.2, 0.9, 1.7] {
            for s2 in [0.1, 0.9, 2.0] {
                let want = t.h(s.min(s2)) - t.h(s) * t.h(s2);
                assert!((kernel.gamma(s, s2) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_by_construction() {
        let m = MixingModel::iid(MarginalSpec::Weibull { shape: 1.5, scale: 1.0 }, exp(0.7)).with_rho(0.6, -0.3);
        let kernel = GammaKernel::new(&m).unwrap();
        for (a, b) in [(0.1, 1.4), (0.5, 0.6), (2.0, 0.05)] {
            assert_eq!(kernel.gamma(a, b), kernel.gamma(b, a));
        }
    }

    #[test]
    fn kernel_terms_match_public_covariance() {
        let m = MixingModel::iid(exp(1.0), exp(3.0 / 7.0)).with_rho(0.5, 0.3);
        let kernel = GammaKernel::with_k_max(&m, 4).unwrap();
        let (s, s2) = (0.4, 1.3);
        let mut want = cov_g1gk(s, s2, 1, &m);
        for k in 2..=4 {
            want += cov_g1gk(s, s2, k, &m) + cov_g1gk(s2, s, k, &m);
        }
        assert!((kernel.gamma(s, s2) - want).abs() < 1e-14);
    }

    #[test]
    fn truncation_is_sound() {
        let m = MixingModel::iid(exp(1.0), exp(3.0 / 7.0)).with_rho(0.5, 0.5);
        let kernel = GammaKernel::new(&m).unwrap();
        assert!(kernel.tail_bound() < TAIL_TARGET);
        let longer = GammaKernel::with_k_max(&m, kernel.k_max() + 10).unwrap();
        let grid: Vec<f64> = (0..12).map(|i| 0.2 * i as f64).collect();
        let a = kernel.tabulate(&grid);
        let b = longer.tabulate(&grid);
        let diff = (&a.matrix - &b.matrix).abs().max();
        assert!(diff < kernel.tail_bound(), "{diff} vs {}", kernel.tail_bound());
    }

    #[test]
    fn lag_two_covariance_monte_carlo() {
        let m = MixingModel::iid(exp(1.0), exp(1.0)).with_rho(0.5, 0.0);
        let t = true_model(&m).unwrap();
        let s = t.h_quantile(0.5);
        let n = 1_000_000;
        let mut rx = RandomStream::new(2024, 0).rng(0);
        let mut ry = RandomStream::new(2024, 0).rng(1);
        // n independent pairs (X₁, X₂) from the stationary chain, Y iid
        let mut prod = Vec::with_capacity(n);
        let mut e1 = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        for _ in 0..n {
            let g = ar1_gaussian(2, 0.5, &mut rx).unwrap();
            let x = to_marginal(&g, &m.lifetime);
            let y = to_marginal(&ar1_gaussian(2, 0.0, &mut ry).unwrap(), &m.censoring);
            let a = f64::from(u8::from(x[0].min(y[0]) <= s)) - t.h(s);
            let b = f64::from(u8::from(x[1].min(y[1]) <= s)) - t.h(s);
            e1.push(a);
            e2.push(b);
            prod.push(a * b);
        }
        let mean = prod.iter().sum::<f64>() / n as f64;
        let var = prod.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let want = cov_g1gk(s, s, 2, &m);
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
        assert!(want > 0.0);
    }

    #[test]
    fn matrix_csv_layout() {
        let g = GammaKernel::new(&MixingModel::iid(exp(1.0), exp(1.0))).unwrap().tabulate(&[0.5, 1.0]);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("0.5,1\n"));
    }
}
