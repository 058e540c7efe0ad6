//! Monte Carlo harness: per-replication statistics, aggregation over
//! replications and sample sizes, and empirical rate fits.

mod rates;
mod report;
mod stats;

pub use rates::{fit_log_rate, fit_rate, median, quantile_sorted, RateFit, RateParams};
pub use report::{plot_data, read_summary_csv, render_markdown, write_plot_csv};
pub use stats::{
    bahadur_jump_bound, bahadur_stat, coupling_stat, ks_distance, lil_normalize, lil_stat, oscillation_stat, qdev_normalize,
    qdev_stat, rel38_remainder, rel38_stat, sup_deviation, sup_norm, sup_norm_weighted, LilTarget,
};

use crate::datagen::{generate_sample, true_model, AdmissibleRange, MixingModel, TrueModel};
use crate::error::{Error, Result};
use crate::estimators::{km, nelson_aalen, quantile_grid, quantile_process, sup_grid, StepFunction};
use crate::limit::{BIntegrator, GammaKernel, KieferSampler};
use crate::rng::{RandomStream, LANE_LIMIT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Statistics selectable in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    SupPl,
    SupHazard,
    Lil,
    Bahadur,
    Qdev,
    Oscillation,
    Coupling,
    Rel38,
    Ksdist,
}

impl Statistic {
    pub const ALL: [Statistic; 9] = [
        Statistic::SupPl,
        Statistic::SupHazard,
        Statistic::Lil,
        Statistic::Bahadur,
        Statistic::Qdev,
        Statistic::Oscillation,
        Statistic::Coupling,
        Statistic::Rel38,
        Statistic::Ksdist,
    ];

    /// Output rows produced when this statistic is selected. Some statistics
    /// carry a companion that is needed to interpret them.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Statistic::SupPl => &["sup_pl"],
            Statistic::SupHazard => &["sup_hazard"],
            Statistic::Lil => &["lil", "lil_pl"],
            Statistic::Bahadur => &["bahadur", "bahadur_jump"],
            Statistic::Qdev => &["qdev"],
            Statistic::Oscillation => &["oscillation"],
            Statistic::Coupling => &["coupling", "sup_quantile"],
            Statistic::Rel38 => &["rel38"],
            Statistic::Ksdist => &["ksdist", "ksdist_quantile"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: MixingModel,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub tau_epsilon: f64,
    pub p0: f64,
    pub p1: f64,
    pub grid_size: usize,
    pub limit_grid_size: usize,
    pub statistics: Vec<Statistic>,
    pub lambda: f64,
    pub window_const: f64,
}

impl ExperimentConfig {
    pub fn new(name: &str, model: MixingModel, sizes: Vec<usize>, reps: usize, seed: u64, statistics: Vec<Statistic>) -> Self {
        Self {
            name: name.to_string(),
            model,
            sizes,
            reps,
            seed,
            tau_epsilon: 0.05,
            p0: 0.1,
            p1: 0.9,
            grid_size: 512,
            limit_grid_size: 257,
            statistics,
            lambda: 1.0,
            window_const: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("experiment '{}': {m}", self.name)));
        self.model.validate()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name must be a nonempty plain file name".into());
        }
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("sizes {:?} must be positive and strictly increasing", self.sizes));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if !(self.p0 > 0.0 && self.p0 <= self.p1 && self.p1 < 1.0) {
            return bad(format!("need 0 < p0 <= p1 < 1, got p0 = {}, p1 = {}", self.p0, self.p1));
        }
        if !(self.tau_epsilon > 0.0 && self.tau_epsilon < 1.0) {
            return bad(format!("tau_epsilon {} must lie in (0, 1)", self.tau_epsilon));
        }
        if self.grid_size < 2 {
            return bad("grid_size must be at least 2".into());
        }
        if !(crate::limit::MIN_INTEGRAL_GRID..crate::limit::MAX_KIEFER_GRID).contains(&self.limit_grid_size) {
            return bad(format!("limit_grid_size {} out of range", self.limit_grid_size));
        }
        if self.statistics.is_empty() {
            return bad("no statistics selected".into());
        }
        if !(self.lambda > 0.0 && self.window_const > 0.0) {
            return bad("lambda and window_const must be positive".into());
        }
        Ok(())
    }

    fn has(&self, s: Statistic) -> bool {
        self.statistics.contains(&s)
    }

    /// Output names in canonical order.
    pub fn output_names(&self) -> Vec<&'static str> {
        Statistic::ALL.iter().filter(|s| self.has(**s)).flat_map(|s| s.outputs().iter().copied()).collect()
    }

    fn rate_params(&self) -> RateParams {
        RateParams { lambda: self.lambda, window_const: self.window_const, ..RateParams::default() }
    }
}

/// One cell of the raw table. `rep` is `None` for statistics computed across
/// all replications (the KS distances).
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub statistic: String,
    pub n: usize,
    pub rep: Option<usize>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub statistic: String,
    pub n: usize,
    /// Aggregates over valid replications; `None` when the row is invalid.
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub q05: Option<f64>,
    pub q95: Option<f64>,
    pub reps_valid: usize,
    pub reps: usize,
}

/// Fraction of valid replications a summary row needs.
pub const MIN_VALID_FRACTION: f64 = 0.9;

impl SummaryRow {
    pub fn is_valid(&self) -> bool {
        self.median.is_some()
    }

    fn from_values(statistic: &str, n: usize, values: &[Option<f64>]) -> Self {
        let mut v: Vec<f64> = values.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        let reps = values.len();
        let ok = !v.is_empty() && v.len() as f64 >= MIN_VALID_FRACTION * reps as f64;
        let agg = |f: &dyn Fn(&[f64]) -> f64| if ok { Some(f(&v)) } else { None };
        Self {
            statistic: statistic.to_string(),
            n,
            median: agg(&|v| quantile_sorted(v, 0.5)),
            mean: agg(&|v| v.iter().sum::<f64>() / v.len() as f64),
            q05: agg(&|v| quantile_sorted(v, 0.05)),
            q95: agg(&|v| quantile_sorted(v, 0.95)),
            reps_valid: v.len(),
            reps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub statistic: String,
    pub slope: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub raw: Vec<RawRow>,
    pub summary: Vec<SummaryRow>,
    pub rates: Vec<RateRow>,
    pub exponents: RateParams,
}

impl ExperimentResult {
    pub fn summary_row(&self, statistic: &str, n: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.statistic == statistic && r.n == n)
    }

    /// Medians of `statistic` along the size ladder (`None` for invalid rows).
    pub fn medians(&self, statistic: &str) -> Vec<(usize, Option<f64>)> {
        self.summary.iter().filter(|r| r.statistic == statistic).map(|r| (r.n, r.median)).collect()
    }

    /// Per-replication values of `statistic` at size `n`.
    pub fn values(&self, statistic: &str, n: usize) -> Vec<Option<f64>> {
        self.raw.iter().filter(|r| r.statistic == statistic && r.n == n).map(|r| r.value).collect()
    }

    pub fn all_valid(&self) -> bool {
        self.summary.iter().all(SummaryRow::is_valid)
    }

    pub fn write_raw_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["statistic", "n", "rep", "value", "valid"])?;
        for r in &self.raw {
            let rep = r.rep.map_or_else(|| "all".to_string(), |k| k.to_string());
            let value = r.value.map_or_else(String::new, |v| v.to_string());
            let valid = if r.value.is_some() { "true" } else { "false" };
            w.write_record([r.statistic.as_str(), &r.n.to_string(), &rep, &value, valid])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["statistic", "n", "median", "mean", "q05", "q95", "reps_valid"])?;
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.summary {
            w.write_record([
                r.statistic.clone(),
                r.n.to_string(),
                cell(r.median),
                cell(r.mean),
                cell(r.q05),
                cell(r.q95),
                format!("{}/{}", r.reps_valid, r.reps),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_rates_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, &self.rates)?;
        writeln!(writer)?;
        Ok(())
    }

    /// Writes raw.csv, summary.csv, rates.json and summary.md into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_raw_csv(std::fs::File::create(dir.join("raw.csv"))?)?;
        self.write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_rates_json(std::fs::File::create(dir.join("rates.json"))?)?;
        std::fs::write(dir.join("summary.md"), render_markdown(&self.name, &self.summary, &self.rates, &self.exponents))?;
        Ok(())
    }
}

/// Per-size context shared by all replications.
struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    truth: TrueModel,
    range: AdmissibleRange,
    rates: RateParams,
    limit: Option<LimitDraws>,
}

/// Limit-process machinery for the distributional comparisons.
struct LimitDraws {
    sampler: KieferSampler,
    integrator: BIntegrator,
    /// indices of the limit grid inside [0, τ]
    inside: usize,
    /// (1 − p, t = Q(p)) on a uniform p grid
    quantile_points: Vec<(f64, f64)>,
}

impl LimitDraws {
    fn new(cfg: &ExperimentConfig, truth: &TrueModel, tau: f64) -> Result<Self> {
        let kernel = GammaKernel::new(&cfg.model)?;
        let top = tau.max(truth.quantile(cfg.p1));
        let mut grid: Vec<f64> = (0..cfg.limit_grid_size).map(|i| top * i as f64 / (cfg.limit_grid_size - 1) as f64).collect();
        grid.push(tau);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let inside = grid.partition_point(|&g| g <= tau);
        let quantile_points = crate::estimators::uniform_grid(cfg.p0, cfg.p1, cfg.grid_size)
            .into_iter()
            .map(|p| (1.0 - p, truth.quantile(p)))
            .collect();
        Ok(Self {
            sampler: KieferSampler::new(&grid, &kernel)?,
            integrator: BIntegrator::new(&grid, truth)?,
            inside,
            quantile_points,
        })
    }

    /// (sup_{[0,τ]} |(1 − F) B|, sup_p (1 − p)|B(Q(p))|) for one draw.
    fn draw(&self, n: usize, stream: &RandomStream, truth: &TrueModel) -> Result<(f64, f64)> {
        let k = self.sampler.sample(n as u64, &mut stream.rng(LANE_LIMIT));
        let b = self.integrator.integrate(&k)?;
        let sup_t = b.grid[..self.inside].iter().zip(&b.values).map(|(&t, v)| (truth.sf(t) * v).abs()).fold(0.0, f64::max);
        let sup_p = self.quantile_points.iter().map(|&(w, t)| (w * b.interpolate(t)).abs()).fold(0.0, f64::max);
        Ok((sup_t, sup_p))
    }
}

/// Values of every output statistic for one replication, in canonical order.
/// The trailing pair holds the four ksdist inputs when requested.
struct RepOutcome {
    values: Vec<Option<f64>>,
    ks_inputs: Option<[Option<f64>; 4]>,
}

fn keep(name: &str, n: usize, rep: usize, r: Result<f64>) -> Option<f64> {
    match r {
        Ok(v) if v.is_finite() => Some(v),
        Ok(v) => {
            log::debug!("{name} n={n} rep={rep}: non-finite value {v}");
            None
        }
        Err(e) => {
            log::debug!("{name} n={n} rep={rep}: {e}");
            None
        }
    }
}

fn run_rep(sh: &Shared, n: usize, rep: usize) -> RepOutcome {
    let cfg = sh.cfg;
    let stream = RandomStream::new(cfg.seed, rep as u64).derive(n as u64);
    let names = cfg.output_names();
    let fail = |e: &Error| {
        log::debug!("n={n} rep={rep}: {e}");
        RepOutcome { values: vec![None; names.len()], ks_inputs: cfg.has(Statistic::Ksdist).then_some([None; 4]) }
    };
    let sample = match generate_sample(&cfg.model, n, &stream) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let (fhat, lhat) = match (km(&sample), nelson_aalen(&sample)) {
        (Ok(f), Ok(l)) => (f, l),
        (Err(e), _) | (_, Err(e)) => return fail(&e),
    };
    let ctx = RepContext::new(sh, n, &fhat, &lhat);
    let mut values = Vec::with_capacity(names.len());
    for name in &names {
        values.push(keep(name, n, rep, ctx.statistic(name)));
    }
    let ks_inputs = cfg.has(Statistic::Ksdist).then(|| {
        let data_t = keep("ksdist", n, rep, ctx.statistic("sup_pl").map(|v| v * (n as f64).sqrt()));
        let data_p = keep("ksdist_quantile", n, rep, ctx.statistic("sup_quantile"));
        let (lim_t, lim_p) = match sh.limit.as_ref().map(|l| l.draw(n, &stream, &sh.truth)) {
            Some(Ok((a, b))) => (Some(a), Some(b)),
            Some(Err(e)) => {
                log::debug!("limit draw n={n} rep={rep}: {e}");
                (None, None)
            }
            None => (None, None),
        };
        [data_t, data_p, lim_t, lim_p]
    });
    RepOutcome { values, ks_inputs }
}

/// Estimators and lazily shared grids for one replication.
struct RepContext<'a> {
    sh: &'a Shared<'a>,
    n: usize,
    fhat: &'a StepFunction,
    lhat: &'a StepFunction,
    grid: Vec<f64>,
    p_grid: Result<Vec<f64>>,
}

impl<'a> RepContext<'a> {
    fn new(sh: &'a Shared<'a>, n: usize, fhat: &'a StepFunction, lhat: &'a StepFunction) -> Self {
        let grid = sup_grid(fhat.jump_times(), sh.range.tau, sh.cfg.grid_size);
        let p_grid =
            crate::estimators::pl_quantile(fhat, sh.cfg.p1).map(|_| quantile_grid(fhat, sh.cfg.p0, sh.cfg.p1, sh.cfg.grid_size));
        Self { sh, n, fhat, lhat, grid, p_grid }
    }

    fn p_grid(&self) -> Result<&[f64]> {
        match &self.p_grid {
            Ok(g) => Ok(g),
            Err(Error::QuantileNotAttained { p, sup }) => Err(Error::QuantileNotAttained { p: *p, sup: *sup }),
            Err(e) => Err(Error::InvalidParameter(e.to_string())),
        }
    }

    fn statistic(&self, name: &str) -> Result<f64> {
        let (truth, range, n) = (&self.sh.truth, &self.sh.range, self.n);
        match name {
            "sup_pl" => sup_deviation(self.fhat, |t| truth.cdf(t), &self.grid, range),
            "sup_hazard" => sup_deviation(self.lhat, |t| truth.cum_hazard(t), &self.grid, range),
            "lil" => lil_stat(self.lhat, truth, LilTarget::Hazard, &self.grid, n, range),
            "lil_pl" => lil_stat(self.fhat, truth, LilTarget::Pl, &self.grid, n, range),
            "bahadur" => bahadur_stat(self.fhat, self.p_grid()?),
            "bahadur_jump" => bahadur_jump_bound(self.fhat, self.p_grid()?),
            "qdev" => qdev_stat(self.fhat, truth, self.p_grid()?, n),
            "oscillation" => {
                let root_n = (n as f64).sqrt();
                let z: Vec<f64> = self.grid.iter().map(|&t| root_n * (self.fhat.eval(t) - truth.cdf(t))).collect();
                oscillation_stat(&self.grid, &z, self.sh.rates.lambda_n(n as f64))
            }
            "coupling" => coupling_stat(&quantile_process(self.fhat, truth, self.p_grid()?, n)?, self.fhat, truth),
            "sup_quantile" => sup_norm(&quantile_process(self.fhat, truth, self.p_grid()?, n)?),
            "rel38" => rel38_stat(self.fhat, self.lhat, truth, &self.grid, n, range),
            // filled in after all replications
            "ksdist" | "ksdist_quantile" => Ok(f64::NAN),
            other => Err(Error::InvalidParameter(format!("unknown statistic {other}"))),
        }
    }
}

fn ks_row(name: &str, n: usize, data: &[Option<f64>], limit: &[Option<f64>]) -> (RawRow, SummaryRow) {
    let a: Vec<f64> = data.iter().flatten().copied().collect();
    let b: Vec<f64> = limit.iter().flatten().copied().collect();
    let reps = data.len();
    let reps_valid = a.len().min(b.len());
    let ok = reps_valid as f64 >= MIN_VALID_FRACTION * reps as f64;
    let value = if ok { ks_distance(&a, &b).ok() } else { None };
    let raw = RawRow { statistic: name.to_string(), n, rep: None, value };
    let summary =
        SummaryRow { statistic: name.to_string(), n, median: value, mean: value, q05: value, q95: value, reps_valid, reps };
    (raw, summary)
}

/// Runs every (size, replication) pair and aggregates. Replications run in
/// parallel; all reductions follow replication order, so output does not
/// depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let truth = true_model(&cfg.model)?;
    let range = truth.admissible_range(cfg.tau_epsilon)?;
    let limit = if cfg.has(Statistic::Ksdist) { Some(LimitDraws::new(cfg, &truth, range.tau)?) } else { None };
    let sh = Shared { cfg, truth, range, rates: cfg.rate_params(), limit };
    let names = cfg.output_names();

    let mut raw = Vec::new();
    let mut by_stat: Vec<Vec<SummaryRow>> = vec![Vec::new(); names.len()];
    for &n in &cfg.sizes {
        log::info!("{}: n = {n}, {} replications", cfg.name, cfg.reps);
        let outcomes: Vec<RepOutcome> = (0..cfg.reps).into_par_iter().map(|rep| run_rep(&sh, n, rep)).collect();
        for (k, name) in names.iter().enumerate() {
            if name.starts_with("ksdist") {
                let (data, lim) = if *name == "ksdist" { (0, 2) } else { (1, 3) };
                let col = |i: usize| -> Vec<Option<f64>> { outcomes.iter().map(|o| o.ks_inputs.and_then(|x| x[i])).collect() };
                let (r, s) = ks_row(name, n, &col(data), &col(lim));
                raw.push(r);
                by_stat[k].push(s);
                continue;
            }
            let col: Vec<Option<f64>> = outcomes.iter().map(|o| o.values[k]).collect();
            for (rep, v) in col.iter().enumerate() {
                raw.push(RawRow { statistic: name.to_string(), n, rep: Some(rep), value: *v });
            }
            by_stat[k].push(SummaryRow::from_values(name, n, &col));
        }
    }
    raw.sort_by_key(|r| names.iter().position(|s| *s == r.statistic));
    let summary: Vec<SummaryRow> = by_stat.into_iter().flatten().collect();

    let sizes: Vec<f64> = cfg.sizes.iter().map(|&n| n as f64).collect();
    let med = |name: &str| -> Vec<f64> {
        summary.iter().filter(|r| r.statistic == name).map(|r| r.median.unwrap_or(f64::NAN)).collect()
    };
    let rates = names
        .iter()
        .filter_map(|name| {
            fit_rate(&sizes, &med(name)).map(|f| RateRow { statistic: name.to_string(), slope: f.slope, stderr: f.stderr })
        })
        .collect();
    let mut exponents = sh.rates;
    exponents.lambda_exp = fit_log_rate(&sizes, &med("ksdist")).map(|f| -f.slope);
    exponents.beta_exp = fit_log_rate(&sizes, &med("coupling")).zip(exponents.lambda_exp).map(|(f, l)| -f.slope - l);
    Ok(ExperimentResult { name: cfg.name.clone(), raw, summary, rates, exponents })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::MarginalSpec;

    fn model() -> MixingModel {
        MixingModel::iid(MarginalSpec::Exponential { rate: 1.0 }, MarginalSpec::Exponential { rate: 3.0 / 7.0 })
            .with_rho(0.5, 0.5)
    }

    fn bytes(r: &ExperimentResult) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        r.write_raw_csv(&mut a).unwrap();
        r.write_summary_csv(&mut b).unwrap();
        r.write_rates_json(&mut c).unwrap();
        (a, b, c)
    }

    #[test]
    fn single_row() {
        let cfg = ExperimentConfig::new("one", model(), vec![100], 1, 3, vec![Statistic::SupPl]);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.raw.len(), 1);
        assert_eq!(r.summary.len(), 1);
        assert!(r.rates.is_empty());
        let (raw, summary, _) = bytes(&r);
        let raw = String::from_utf8(raw).unwrap();
        assert!(raw.starts_with("statistic,n,rep,value,valid\nsup_pl,100,0,"));
        assert!(String::from_utf8(summary).unwrap().starts_with("statistic,n,median,mean,q05,q95,reps_valid\n"));
    }

    #[test]
    fn deterministic_and_complete() {
        let mut cfg = ExperimentConfig::new("all", model(), vec![100, 200, 400], 12, 11, Statistic::ALL.to_vec());
        cfg.grid_size = 64;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        let names = cfg.output_names();
        assert_eq!(a.summary.len(), names.len() * 3);
        for r in &a.summary {
            if let (Some(lo), Some(m), Some(hi)) = (r.q05, r.median, r.q95) {
                assert!(lo <= m && m <= hi);
            }
        }
        for &n in &cfg.sizes {
            let stat = a.values("bahadur", n);
            let bound = a.values("bahadur_jump", n);
            for (s, b) in stat.iter().zip(&bound) {
                if let (Some(s), Some(b)) = (s, b) {
                    assert!(s <= b);
                }
            }
            let ks = a.summary_row("ksdist", n).unwrap();
            assert!(ks.median.unwrap() > 0.0 && ks.median.unwrap() <= 1.0);
        }
        assert_eq!(a.rates.len(), names.len());
    }

    #[test]
    fn invalid_rows_when_quantiles_unattained() {
        // heavy censoring: F̂ₙ rarely reaches 0.9 at small n
        let heavy = MixingModel::iid(MarginalSpec::Exponential { rate: 1.0 }, MarginalSpec::Exponential { rate: 4.0 });
        let mut cfg = ExperimentConfig::new("heavy", heavy, vec![30], 20, 1, vec![Statistic::Bahadur]);
        cfg.p1 = 0.95;
        let r = run_experiment(&cfg).unwrap();
        let row = r.summary_row("bahadur", 30).unwrap();
        assert!(!row.is_valid());
        assert!(!r.all_valid());
        let mut out = Vec::new();
        r.write_summary_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("bahadur,30,,,,,"));
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::new("v", model(), vec![10, 20], 2, 0, vec![Statistic::Lil]);
        assert!(ok.validate().is_ok());
        assert!(ExperimentConfig { sizes: vec![20, 10], ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { reps: 0, ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { p0: 0.5, p1: 0.4, ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { name: "a/b".into(), ..ok }.validate().is_err());
    }
}
