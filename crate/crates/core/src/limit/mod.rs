//! The Gaussian limit: the Γ kernel of the Kiefer approximation, the
//! covariance of B(t, n), and samplers for K(·, n) and B(·, n).

mod bcov;
mod bvn;
mod kernel;
mod sampler;

pub use bcov::{b_cov, b_cov_matrix, level_factor};
pub use bvn::{bvn_survival, OrthantRule};
pub use kernel::{cov_g1gk, write_matrix_csv, GammaGrid, GammaKernel, KernelPoint, TAIL_TARGET};
pub use sampler::{
    psd_factor, sample_b_direct, sample_b_integral, sample_kiefer, BDirectSampler, BIntegrator, Factor, GaussianPath,
    KieferSampler, PathMethod, DIRECT_NODES_PER_CELL, MAX_DIRECT_GRID, MAX_KIEFER_GRID, MIN_INTEGRAL_GRID,
};
