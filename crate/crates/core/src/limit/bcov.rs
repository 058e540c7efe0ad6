use super::kernel::{GammaKernel, KernelPoint};
use crate::datagen::TrueModel;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate, Tolerance};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::cell::RefCell;

const OUTER_RTOL: f64 = 1e-6;
const INNER_RTOL: f64 = 1e-8;

/// Level prefactor min(m, n)/√(mn); equals √(m/n) when m ≤ n.
pub fn level_factor(m: u64, n: u64) -> f64 {
    if m == 0 || n == 0 {
        return 0.0;
    }
    m.min(n) as f64 / ((m as f64) * (n as f64)).sqrt()
}

/// Cov[B(s, m), B(t, n)] = min(m,n)/√(mn) ∫₀ᵗ∫₀ˢ Γ(x,y) / (H̄(x)²H̄(y)²) dF*(x) dF*(y).
///
/// dF*(x) = (1 − G(x)) dF(x), so the integral runs over v = F(x) with the
/// bounded weight (1 − G)/H̄². The inner integral is split on the diagonal
/// where Γ has its kink.
pub fn b_cov(s: f64, m: u64, t: f64, n: u64, kernel: &GammaKernel, truth: &TrueModel) -> Result<f64> {
    let factor = level_factor(m, n);
    if s <= 0.0 || t <= 0.0 || factor == 0.0 {
        return Ok(0.0);
    }
    let lifetime = *truth.lifetime();
    let weight = |p: &KernelPoint| truth.censoring().sf(p.t) / (p.hbar() * p.hbar());
    let at = |v: f64| kernel.point(lifetime.quantile(v));
    let (vs, vt) = (truth.cdf(s), truth.cdf(t));
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_tol = Tolerance::relative(INNER_RTOL).with_abs(1e-14);

    let outer = |v: f64| {
        let p = at(v);
        let g = |u: f64| {
            let q = at(u);
            kernel.gamma_points(&p, &q) * weight(&q)
        };
        let pieces = if v > 0.0 && v < vt { vec![(0.0, v), (v, vt)] } else { vec![(0.0, vt)] };
        let mut acc = 0.0;
        for (a, b) in pieces {
            match integrate(g, a, b, inner_tol) {
                Ok(e) => acc += e.value,
                Err(err) => {
                    if let Error::Quadrature { estimate, .. } = err {
                        acc += estimate;
                    }
                    failure.borrow_mut().get_or_insert(err);
                }
            }
        }
        acc * weight(&p)
    };
    let total = integrate(outer, 0.0, vs, Tolerance::relative(OUTER_RTOL).with_abs(1e-12))?;
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let value = factor * total.value;
    if s == t && m == n && value < 0.0 {
        if value > -1e-10 {
            return Ok(0.0);
        }
        return Err(Error::InvalidParameter(format!("negative variance {value:e} for B({s}, {m})")));
    }
    Ok(value)
}

/// Same-level covariance matrix of B on `grid` by composite Gauss–Legendre
/// quadrature: each gap between consecutive grid points (in v = F(x)) gets
/// `nodes_per_cell` nodes, and entries are cumulative sums of cell-pair
/// integrals.
pub fn b_cov_matrix(grid: &[f64], kernel: &GammaKernel, truth: &TrueModel, nodes_per_cell: usize) -> Result<DMatrix<f64>> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.first().is_some_and(|&g| g < 0.0) {
        return Err(Error::InvalidParameter("grid must be nonnegative and strictly increasing".into()));
    }
    let m = grid.len();
    let (x, w) = gauss_legendre(nodes_per_cell.max(1));
    let lifetime = *truth.lifetime();
    let mut points = Vec::with_capacity(m * x.len());
    let mut weights = Vec::with_capacity(m * x.len());
    let mut cell_of = Vec::with_capacity(m * x.len());
    let mut v_prev = 0.0;
    for (cell, &g) in grid.iter().enumerate() {
        let v = truth.cdf(g);
        let half = 0.5 * (v - v_prev);
        if half > 0.0 {
            for (xi, wi) in x.iter().zip(&w) {
                let p = kernel.point(lifetime.quantile(v_prev + half * (xi + 1.0)));
                let hb = p.hbar();
                if hb <= 0.0 {
                    return Err(Error::OutOfRange { t: g, tau: g });
                }
                weights.push(wi * half * truth.censoring().sf(p.t) / (hb * hb));
                points.push(p);
                cell_of.push(cell);
            }
        }
        v_prev = v;
    }
    let np = points.len();
    let rows: Vec<Vec<f64>> =
        (0..np).into_par_iter().map(|i| (0..=i).map(|j| kernel.gamma_points(&points[i], &points[j])).collect()).collect();
    // cell-pair integrals
    let mut cells = DMatrix::<f64>::zeros(m, m);
    for i in 0..np {
        for j in 0..=i {
            let v = weights[i] * weights[j] * rows[i][j];
            let (a, b) = (cell_of[i], cell_of[j]);
            cells[(a, b)] += v;
            if i != j {
                cells[(b, a)] += v;
            }
        }
    }
    // 2-D prefix sums
    let mut out = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut v = cells[(a, b)];
            if a > 0 {
                v += out[(a - 1, b)];
            }
            if b > 0 {
                v += out[(a, b - 1)];
            }
            if a > 0 && b > 0 {
                v -= out[(a - 1, b - 1)];
            }
            out[(a, b)] = v;
        }
    }
    for a in 0..m {
        for b in 0..a {
            out[(a, b)] = out[(b, a)];
        }
    }
    Ok(out)
}
