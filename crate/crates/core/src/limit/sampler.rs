use super::bcov::b_cov_matrix;
use super::kernel::GammaKernel;
use crate::datagen::TrueModel;
use crate::error::{Error, Result};
use crate::rng::{RandomStream, LANE_LIMIT};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const MAX_KIEFER_GRID: usize = 2048;
pub const MAX_DIRECT_GRID: usize = 1024;
pub const MIN_INTEGRAL_GRID: usize = 256;
/// Nodes per grid gap when building the direct-method covariance.
pub const DIRECT_NODES_PER_CELL: usize = 6;
const RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMethod {
    /// A draw of K(·, n) itself.
    Kiefer,
    /// B(·, n) from a Kiefer draw by Stieltjes integration against dF*.
    Integral,
    /// B(·, n) drawn from its own covariance matrix.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_level: u64,
    pub method: PathMethod,
}

impl GaussianPath {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["grid", "value"])?;
        for (g, v) in self.grid.iter().zip(&self.values) {
            w.write_record([g.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Linear interpolation inside the grid, clamped at the ends.
    pub fn interpolate(&self, t: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g <= t);
        if k == 0 {
            return self.values[0];
        }
        if k == self.grid.len() {
            return self.values[k - 1];
        }
        let (g0, g1) = (self.grid[k - 1], self.grid[k]);
        let w = (t - g0) / (g1 - g0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }
}

/// Lower factor L with L Lᵀ equal to the repaired covariance.
#[derive(Debug, Clone)]
pub struct Factor {
    pub lower: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// max(0, −λ_min): the largest shift any eigenvalue received before the ridge.
    pub repair: f64,
}

/// Clips negative eigenvalues to zero, adds a 1e-10 ridge, then Cholesky.
pub fn psd_factor(cov: &DMatrix<f64>) -> Result<Factor> {
    let m = cov.nrows();
    if m == 0 {
        return Ok(Factor { lower: DMatrix::zeros(0, 0), min_eigenvalue: 0.0, repair: 0.0 });
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_eigenvalue.is_finite() {
        return Err(Error::Factorization { min_eigenvalue });
    }
    let repair = (-min_eigenvalue).max(0.0);
    if repair > 0.0 {
        log::debug!("PSD repair: clipped eigenvalues by up to {repair:e} (+{RIDGE:e} ridge)");
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let repaired =
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose() + DMatrix::identity(m, m) * RIDGE;
    let chol = repaired.cholesky().ok_or(Error::Factorization { min_eigenvalue })?;
    Ok(Factor { lower: chol.l(), min_eigenvalue, repair })
}

/// Draws L ξ for a standard normal ξ, placing it at the `active` indices.
fn correlated_draw<R: Rng + ?Sized>(factor: &Factor, active: &[usize], m: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    let xi = DVector::from_fn(active.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let v = &factor.lower * xi;
    let mut out = vec![0.0; m];
    for (k, &i) in active.iter().enumerate() {
        out[i] = scale * v[k];
    }
    out
}

fn check_grid(grid: &[f64], max: usize) -> Result<()> {
    if grid.is_empty() || grid.len() > max {
        return Err(Error::InvalidParameter(format!("grid size {} must be in 1..={max}", grid.len())));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("grid must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

/// Draws K(·, n) on a fixed grid: covariance Γ(sᵢ, sⱼ)·n.
#[derive(Debug, Clone)]
pub struct KieferSampler {
    grid: Vec<f64>,
    /// grid indices with Γ(s, s) > 0; the rest are identically zero
    active: Vec<usize>,
    factor: Factor,
}

impl KieferSampler {
    pub fn new(grid: &[f64], kernel: &GammaKernel) -> Result<Self> {
        check_grid(grid, MAX_KIEFER_GRID)?;
        let table = kernel.tabulate(grid);
        let active: Vec<usize> = (0..grid.len()).filter(|&i| table.matrix[(i, i)] > 0.0).collect();
        let sub = DMatrix::from_fn(active.len(), active.len(), |i, j| table.matrix[(active[i], active[j])]);
        let factor = psd_factor(&sub)?;
        Ok(Self { grid: grid.to_vec(), active, factor })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    pub fn sample<R: Rng + ?Sized>(&self, n_level: u64, rng: &mut R) -> GaussianPath {
        let values = if n_level == 0 {
            vec![0.0; self.grid.len()]
        } else {
            correlated_draw(&self.factor, &self.active, self.grid.len(), (n_level as f64).sqrt(), rng)
        };
        GaussianPath { grid: self.grid.clone(), values, n_level, method: PathMethod::Kiefer }
    }

    /// Jointly draws K(·, n₁), …, K(·, n_r) for increasing levels via
    /// independent Gaussian increments along the level axis.
    pub fn sample_levels<R: Rng + ?Sized>(&self, levels: &[u64], rng: &mut R) -> Result<Vec<GaussianPath>> {
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("levels must be nondecreasing".into()));
        }
        let m = self.grid.len();
        let mut current = vec![0.0; m];
        let mut prev = 0u64;
        let mut out = Vec::with_capacity(levels.len());
        for &level in levels {
            let step = level - prev;
            if step > 0 {
                let inc = correlated_draw(&self.factor, &self.active, m, (step as f64).sqrt(), rng);
                current.iter_mut().zip(inc).for_each(|(c, d)| *c += d);
            }
            prev = level;
            out.push(GaussianPath {
                grid: self.grid.clone(),
                values: current.clone(),
                n_level: level,
                method: PathMethod::Kiefer,
            });
        }
        Ok(out)
    }
}

pub fn sample_kiefer(grid: &[f64], n_level: u64, kernel: &GammaKernel, stream: &RandomStream) -> Result<GaussianPath> {
    let sampler = KieferSampler::new(grid, kernel)?;
    Ok(sampler.sample(n_level, &mut stream.rng(LANE_LIMIT)))
}

/// Trapezoidal Stieltjes weights for B(t, n) = ∫₀ᵗ K(x, n)/(√n H̄(x)²) dF*(x).
#[derive(Debug, Clone)]
pub struct BIntegrator {
    grid: Vec<f64>,
    inv_hbar2: Vec<f64>,
    dfstar: Vec<f64>,
}

impl BIntegrator {
    pub fn new(grid: &[f64], truth: &TrueModel) -> Result<Self> {
        if grid.len() < MIN_INTEGRAL_GRID {
            return Err(Error::InvalidParameter(format!(
                "integral method needs at least {MIN_INTEGRAL_GRID} grid points, got {}",
                grid.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidParameter("integral method grid must start at 0".into()));
        }
        let mut inv_hbar2 = Vec::with_capacity(grid.len());
        for &g in grid {
            let hb = truth.hbar(g);
            if hb <= 0.0 {
                return Err(Error::OutOfRange { t: g, tau: g });
            }
            inv_hbar2.push(1.0 / (hb * hb));
        }
        let fstar: Vec<f64> = grid.iter().map(|&g| truth.fstar(g)).collect();
        let dfstar = fstar.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { grid: grid.to_vec(), inv_hbar2, dfstar })
    }

    pub fn integrate(&self, kpath: &GaussianPath) -> Result<GaussianPath> {
        if kpath.grid != self.grid {
            return Err(Error::InvalidParameter("Kiefer path grid differs from the integration grid".into()));
        }
        let mut values = vec![0.0; self.grid.len()];
        if kpath.n_level > 0 {
            let inv_root = 1.0 / (kpath.n_level as f64).sqrt();
            let phi: Vec<f64> = kpath.values.iter().zip(&self.inv_hbar2).map(|(k, w)| k * inv_root * w).collect();
            let mut acc = 0.0;
            for i in 0..self.dfstar.len() {
                acc += 0.5 * (phi[i] + phi[i + 1]) * self.dfstar[i];
                values[i + 1] = acc;
            }
        }
        Ok(GaussianPath { grid: self.grid.clone(), values, n_level: kpath.n_level, method: PathMethod::Integral })
    }
}

/// B(·, n) from a Kiefer draw via the integral representation.
pub fn sample_b_integral(kpath: &GaussianPath, truth: &TrueModel) -> Result<GaussianPath> {
    BIntegrator::new(&kpath.grid, truth)?.integrate(kpath)
}

/// Draws B(·, n) from the same-level covariance matrix.
#[derive(Debug, Clone)]
pub struct BDirectSampler {
    grid: Vec<f64>,
    active: Vec<usize>,
    covariance: DMatrix<f64>,
    factor: Factor,
}

impl BDirectSampler {
    pub fn new(grid: &[f64], kernel: &GammaKernel, truth: &TrueModel) -> Result<Self> {
        check_grid(grid, MAX_DIRECT_GRID)?;
        let covariance = b_cov_matrix(grid, kernel, truth, DIRECT_NODES_PER_CELL)?;
        let active: Vec<usize> = (0..grid.len()).filter(|&i| covariance[(i, i)] > 0.0).collect();
        let sub = DMatrix::from_fn(active.len(), active.len(), |i, j| covariance[(active[i], active[j])]);
        let factor = psd_factor(&sub)?;
        Ok(Self { grid: grid.to_vec(), active, covariance, factor })
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    pub fn sample<R: Rng + ?Sized>(&self, n_level: u64, rng: &mut R) -> GaussianPath {
        let values = if n_level == 0 {
            vec![0.0; self.grid.len()]
        } else {
            correlated_draw(&self.factor, &self.active, self.grid.len(), 1.0, rng)
        };
        GaussianPath { grid: self.grid.clone(), values, n_level, method: PathMethod::Direct }
    }
}

pub fn sample_b_direct(
    grid: &[f64],
    n_level: u64,
    kernel: &GammaKernel,
    truth: &TrueModel,
    stream: &RandomStream,
) -> Result<GaussianPath> {
    let sampler = BDirectSampler::new(grid, kernel, truth)?;
    Ok(sampler.sample(n_level, &mut stream.rng(LANE_LIMIT)))
}
