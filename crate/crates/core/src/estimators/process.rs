use super::{pl_quantile, pl_quantile_right, StepFunction};
use crate::datagen::{AdmissibleRange, TrueModel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// Zₙ₁(t) = √n(Λ̂ₙ(t) − Λ(t))
    Hazard,
    /// Zₙ₂(t) = √n(F̂ₙ(t) − F(t))
    Pl,
    /// ρₙ(p) = √n f(Q(p))(Q(p) − Qₙ(p))
    Quantile,
}

/// A process evaluated on a grid.
///
/// `other_side` optionally carries the opposite one-sided limit at each grid
/// point: the left limit for the time-indexed paths (right-continuous in t)
/// and the right limit for ρₙ (left-continuous in p). Sup functionals look
/// at both.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub other_side: Option<Vec<f64>>,
    pub n: usize,
    pub kind: ProcessKind,
}

#[derive(Debug, Serialize)]
struct Sidecar {
    n: usize,
    kind: ProcessKind,
    tau: f64,
    epsilon: f64,
}

impl ProcessPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, n: usize, kind: ProcessKind) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParameter("grid and values differ in length".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("process grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values, other_side: None, n, kind })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["grid", "value"])?;
        for (g, v) in self.grid.iter().zip(&self.values) {
            w.write_record([g.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar `{n, kind, tau, epsilon}`.
    pub fn write_sidecar<W: Write>(&self, writer: W, range: &AdmissibleRange) -> Result<()> {
        let side = Sidecar { n: self.n, kind: self.kind, tau: range.tau, epsilon: range.epsilon };
        serde_json::to_writer_pretty(writer, &side)?;
        Ok(())
    }
}

fn check_grid(grid: &[f64], range: &AdmissibleRange) -> Result<()> {
    grid.iter().try_for_each(|&t| range.check(t))
}

fn scaled_difference<F: Fn(f64) -> f64>(
    est: &StepFunction,
    truth: F,
    grid: &[f64],
    n: usize,
    range: &AdmissibleRange,
    kind: ProcessKind,
) -> Result<ProcessPath> {
    check_grid(grid, range)?;
    let root_n = (n as f64).sqrt();
    let values = grid.iter().map(|&t| root_n * (est.eval(t) - truth(t))).collect();
    let left = grid.iter().map(|&t| root_n * (est.left_limit(t) - truth(t))).collect();
    let mut path = ProcessPath::new(grid.to_vec(), values, n, kind)?;
    path.other_side = Some(left);
    Ok(path)
}

/// Zₙ₁ on `grid` ⊂ [0, τ].
pub fn hazard_process(
    lhat: &StepFunction,
    truth: &TrueModel,
    grid: &[f64],
    n: usize,
    range: &AdmissibleRange,
) -> Result<ProcessPath> {
    scaled_difference(lhat, |t| truth.cum_hazard(t), grid, n, range, ProcessKind::Hazard)
}

/// Zₙ₂ on `grid` ⊂ [0, τ].
pub fn pl_process(
    fhat: &StepFunction,
    truth: &TrueModel,
    grid: &[f64],
    n: usize,
    range: &AdmissibleRange,
) -> Result<ProcessPath> {
    scaled_difference(fhat, |t| truth.cdf(t), grid, n, range, ProcessKind::Pl)
}

/// ρₙ on a probability grid inside (0, 1).
pub fn quantile_process(fhat: &StepFunction, truth: &TrueModel, p_grid: &[f64], n: usize) -> Result<ProcessPath> {
    let root_n = (n as f64).sqrt();
    let mut values = Vec::with_capacity(p_grid.len());
    let mut right = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let q = truth.quantile(p);
        let scale = root_n * truth.density(q);
        values.push(scale * (q - pl_quantile(fhat, p)?));
        // at p = F̂ₙ(z₍last₎) the right limit does not exist; keep the value
        let qr = match pl_quantile_right(fhat, p) {
            Ok(v) => v,
            Err(Error::QuantileNotAttained { .. }) => pl_quantile(fhat, p)?,
            Err(e) => return Err(e),
        };
        right.push(scale * (q - qr));
    }
    let mut path = ProcessPath::new(p_grid.to_vec(), values, n, ProcessKind::Quantile)?;
    path.other_side = Some(right);
    Ok(path)
}

/// Union of the jump times in [0, τ] and a uniform `size`-point grid on
/// [0, τ]. Together with left limits this attains the sup of a step
/// function minus a continuous one.
pub fn sup_grid(jump_times: &[f64], tau: f64, size: usize) -> Vec<f64> {
    let mut grid = uniform_grid(0.0, tau, size);
    grid.extend(jump_times.iter().copied().filter(|t| (0.0..=tau).contains(t)));
    sorted_unique(grid)
}

/// Uniform grid on [p0, p1] plus the values of F̂ₙ falling inside it (where
/// Qₙ changes).
pub fn quantile_grid(fhat: &StepFunction, p0: f64, p1: f64, size: usize) -> Vec<f64> {
    let mut grid = uniform_grid(p0, p1, size);
    grid.extend(fhat.values().iter().copied().filter(|p| (p0..=p1).contains(p)));
    sorted_unique(grid)
}

pub(crate) fn uniform_grid(a: f64, b: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..size).map(|i| a + (b - a) * i as f64 / (size - 1) as f64).collect(),
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{true_model, CensoredSample, MarginalSpec, MixingModel};
    use crate::estimators::km;

    fn uniform_truth() -> TrueModel {
        true_model(&MixingModel::iid(MarginalSpec::Uniform { upper: 4.0 }, MarginalSpec::Uniform { upper: 1e6 })).unwrap()
    }

    #[test]
    fn pl_process_hand_value() {
        let truth = uniform_truth();
        let range = truth.admissible_range(0.05).unwrap();
        let s = CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true; 3]).unwrap();
        let p = pl_process(&km(&s).unwrap(), &truth, &[2.0], 3, &range).unwrap();
        assert!((p.values[0] - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exact_estimate_gives_zero_path() {
        let truth = uniform_truth();
        let range = truth.admissible_range(0.05).unwrap();
        let grid = uniform_grid(0.0, 3.0, 31);
        let exact = StepFunction::right_continuous(grid.clone(), grid.iter().map(|&t| truth.cdf(t)).collect(), 0.0).unwrap();
        let p = pl_process(&exact, &truth, &grid, 100, &range).unwrap();
        assert!(p.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn linear_in_the_deviation() {
        let truth = uniform_truth();
        let range = truth.admissible_range(0.05).unwrap();
        let grid = uniform_grid(0.0, 3.0, 13);
        let dev = |c: f64| {
            StepFunction::right_continuous(grid.clone(), grid.iter().map(|&t| truth.cdf(t) + c * (t * 0.01).sin()).collect(), 0.0)
                .unwrap()
        };
        let one = pl_process(&dev(1.0), &truth, &grid, 50, &range).unwrap();
        let two = pl_process(&dev(2.0), &truth, &grid, 50, &range).unwrap();
        for (a, b) in one.values.iter().zip(&two.values) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_beyond_tau_is_rejected() {
        let truth = uniform_truth();
        let range = truth.admissible_range(0.05).unwrap();
        let s = CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true; 3]).unwrap();
        let err = pl_process(&km(&s).unwrap(), &truth, &[range.tau + 0.1], 3, &range).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn quantile_process_hand_value_and_sign() {
        let truth = uniform_truth();
        let s = CensoredSample::new(vec![1.0, 2.0, 3.0], vec![true; 3]).unwrap();
        let f = km(&s).unwrap();
        let p = quantile_process(&f, &truth, &[0.5], 3).unwrap();
        assert_eq!(p.values[0], 0.0);
        // Qₙ(0.6) = 2 < Q(0.6) = 2.4 and Qₙ(0.7) = 3 > Q(0.7) = 2.8
        let p = quantile_process(&f, &truth, &[0.6, 0.7], 3).unwrap();
        assert!(p.values[0] > 0.0 && p.values[1] < 0.0);
    }

    #[test]
    fn quantile_process_zero_when_exact() {
        let truth = uniform_truth();
        let ps: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let times: Vec<f64> = ps.iter().map(|&p| truth.quantile(p)).collect();
        let f = StepFunction::right_continuous(times, ps.clone(), 0.0).unwrap();
        let path = quantile_process(&f, &truth, &ps, 10).unwrap();
        assert!(path.values.iter().all(|v| v.abs() < 1e-12));
    }
}
