use anyhow::{bail, Context};
use censmix::config::Config;
use censmix::datagen::{generate_sample, true_model, CensoredSample};
use censmix::estimators::{
    hazard_process, km, nelson_aalen, pl_process, quantile_grid, quantile_process, sup_grid, survival_at_observations,
    ProcessPath,
};
use censmix::experiments::{read_summary_csv, render_markdown, run_experiment, write_plot_csv, RateParams, RateRow};
use censmix::limit::{
    b_cov_matrix, BDirectSampler, BIntegrator, GammaKernel, GaussianPath, KieferSampler, PathMethod, DIRECT_NODES_PER_CELL,
};
use censmix::rng::{RandomStream, LANE_LIMIT};
use clap::{Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "censmix", version, about = "Censored-data estimators under strong mixing")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads for replications (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overwrite existing result files
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a censored sample from the configured model
    Generate {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
        /// Sample size
        #[arg(long)]
        n: usize,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Stream id (replication index)
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate F, Λ and Q from a sample CSV
    Estimate {
        /// Sample CSV with header z,delta
        input: PathBuf,
        /// Config whose model is taken as the truth for process paths
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Points in the process and quantile grids
        #[arg(long, default_value_t = 512)]
        grid_size: usize,
    },
    /// Draw paths of the limiting Gaussian processes
    GpSample {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
        /// Level n of K(·, n) and B(·, n)
        #[arg(long)]
        n_level: u64,
        /// Number of independent paths
        #[arg(long, default_value_t = 1)]
        draws: usize,
        /// Sampler (default: [limit].method)
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Grid points on [0, τ] (default: [limit].grid_size, 65 for direct)
        #[arg(long)]
        grid_size: Option<usize>,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured Monte Carlo experiments
    Experiment {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Render tables and plot data from experiment results
    Report {
        /// Directory written by `experiment`
        results: PathBuf,
        /// Where to write report.md and the plot CSVs (default: the results directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Kiefer,
    Integral,
    Direct,
}

impl From<Method> for PathMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Kiefer => PathMethod::Kiefer,
            Method::Integral => PathMethod::Integral,
            Method::Direct => PathMethod::Direct,
        }
    }
}

/// Failures that map to exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

enum Outcome {
    Ok,
    InvalidRows,
}

struct Output {
    dir: PathBuf,
    force: bool,
}

impl Output {
    fn new(dir: &Path, force: bool) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), force })
    }

    fn path(&self, name: &str) -> anyhow::Result<PathBuf> {
        let p = self.dir.join(name);
        if p.exists() && !self.force {
            return Err(usage(format!("{} exists; pass --force to overwrite", p.display())));
        }
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn create(&self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let p = self.path(name)?;
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<Config> {
    let mut cfg = Config::load(path).map_err(|e| usage(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn generate(config: &Path, n: usize, seed: Option<u64>, stream: u64, out: &Output) -> anyhow::Result<Outcome> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let cfg = load_config(config, seed)?;
    let sample = generate_sample(&cfg.model, n, &RandomStream::new(cfg.seed, stream))?;
    sample.write_csv(out.create("sample.csv")?)?;
    println!("censoring proportion: {:.4}", sample.censoring_proportion());
    Ok(Outcome::Ok)
}

fn write_path(out: &Output, name: &str, path: &ProcessPath, range: &censmix::datagen::AdmissibleRange) -> anyhow::Result<()> {
    path.write_csv(out.create(&format!("{name}.csv"))?)?;
    path.write_sidecar(out.create(&format!("{name}.json"))?, range)?;
    Ok(())
}

fn estimate(input: &Path, config: Option<&Path>, grid_size: usize, out: &Output) -> anyhow::Result<Outcome> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let sample = CensoredSample::read_csv(file).with_context(|| format!("reading {}", input.display()))?;
    let fhat = km(&sample)?;
    let lhat = nelson_aalen(&sample)?;
    fhat.write_csv(out.create("km.csv")?)?;
    lhat.write_csv(out.create("nelson_aalen.csv")?)?;
    {
        let mut w = csv::Writer::from_writer(out.create("quantile.csv")?);
        w.write_record(["p", "quantile"])?;
        for (t, p) in fhat.jump_times().iter().zip(fhat.values()) {
            w.write_record([p.to_string(), t.to_string()])?;
        }
        w.flush()?;
    }
    {
        let mut w = csv::Writer::from_writer(out.create("survival.csv")?);
        w.write_record(["t", "survival"])?;
        for (t, s) in survival_at_observations(&sample, &fhat) {
            w.write_record([t.to_string(), s.to_string()])?;
        }
        w.flush()?;
    }
    let Some(config) = config else {
        return Ok(Outcome::Ok);
    };
    let cfg = load_config(config, None)?;
    let truth = true_model(&cfg.model)?;
    let epsilon = cfg.limit.tau_epsilon;
    let range = truth.admissible_range(epsilon)?;
    let n = sample.len();
    let grid = sup_grid(fhat.jump_times(), range.tau, grid_size);
    write_path(out, "hazard_process", &hazard_process(&lhat, &truth, &grid, n, &range)?, &range)?;
    write_path(out, "pl_process", &pl_process(&fhat, &truth, &grid, n, &range)?, &range)?;
    let (p0, p1) = cfg.experiments.first().map_or((0.1, 0.9), |e| (e.p0, e.p1));
    match quantile_process(&fhat, &truth, &quantile_grid(&fhat, p0, p1, grid_size), n) {
        Ok(rho) => write_path(out, "quantile_process", &rho, &range)?,
        Err(e) => log::warn!("quantile process skipped: {e}"),
    }
    Ok(Outcome::Ok)
}

/// Largest absolute and relative gap between two covariance matrices.
fn discrepancy(empirical: &nalgebra::DMatrix<f64>, target: &nalgebra::DMatrix<f64>) -> (f64, f64) {
    let scale = target.diagonal().max().max(f64::MIN_POSITIVE);
    let abs = (empirical - target).abs().max();
    (abs, abs / scale)
}

fn empirical_cov(paths: &[GaussianPath], idx: &[usize]) -> nalgebra::DMatrix<f64> {
    let d = paths.len() as f64;
    let m = idx.len();
    let mean: Vec<f64> = idx.iter().map(|&i| paths.iter().map(|p| p.values[i]).sum::<f64>() / d).collect();
    nalgebra::DMatrix::from_fn(m, m, |a, b| {
        paths.iter().map(|p| (p.values[idx[a]] - mean[a]) * (p.values[idx[b]] - mean[b])).sum::<f64>() / (d - 1.0).max(1.0)
    })
}

#[allow(clippy::too_many_arguments)]
fn gp_sample(
    config: &Path,
    n_level: u64,
    draws: usize,
    method: Option<Method>,
    grid_size: Option<usize>,
    seed: Option<u64>,
    out: &Output,
) -> anyhow::Result<Outcome> {
    if draws == 0 {
        return Err(usage("--draws must be at least 1"));
    }
    let cfg = load_config(config, seed)?;
    let method: PathMethod = method.map_or(cfg.limit.method, Into::into);
    let truth = true_model(&cfg.model)?;
    let tau = truth.tau(cfg.limit.tau_epsilon)?;
    let kernel = GammaKernel::new(&cfg.model)?;
    let size = grid_size.unwrap_or(match method {
        PathMethod::Direct => 65,
        _ => cfg.limit.grid_size,
    });
    if size < 2 {
        return Err(usage("--grid-size must be at least 2"));
    }
    let grid: Vec<f64> = (0..size).map(|i| tau * i as f64 / (size - 1) as f64).collect();
    let draw_stream = |d: usize| RandomStream::new(cfg.seed, d as u64).rng(LANE_LIMIT);
    let paths: Vec<GaussianPath> = match method {
        PathMethod::Kiefer => {
            let s = KieferSampler::new(&grid, &kernel)?;
            (0..draws).map(|d| s.sample(n_level, &mut draw_stream(d))).collect()
        }
        PathMethod::Integral => {
            let s = KieferSampler::new(&grid, &kernel)?;
            let b = BIntegrator::new(&grid, &truth)?;
            (0..draws).map(|d| b.integrate(&s.sample(n_level, &mut draw_stream(d)))).collect::<Result<_, _>>()?
        }
        PathMethod::Direct => {
            let s = BDirectSampler::new(&grid, &kernel, &truth)?;
            (0..draws).map(|d| s.sample(n_level, &mut draw_stream(d))).collect()
        }
    };
    {
        let mut w = csv::Writer::from_writer(out.create("draws.csv")?);
        w.write_record(["draw", "grid", "value"])?;
        for (d, p) in paths.iter().enumerate() {
            for (g, v) in p.grid.iter().zip(&p.values) {
                w.write_record([d.to_string(), g.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
    }
    // covariance check on at most 9 evenly spaced grid points
    let k = size.min(9);
    let idx: Vec<usize> = (0..k).map(|i| i * (size - 1) / (k - 1).max(1)).collect();
    let sub: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
    let target = match method {
        PathMethod::Kiefer => kernel.tabulate(&sub).matrix * n_level as f64,
        _ if n_level == 0 => nalgebra::DMatrix::zeros(k, k),
        _ => b_cov_matrix(&sub, &kernel, &truth, 4 * DIRECT_NODES_PER_CELL)?,
    };
    let empirical = empirical_cov(&paths, &idx);
    let (abs, rel) = discrepancy(&empirical, &target);
    let report = serde_json::json!({
        "method": method,
        "n_level": n_level,
        "draws": draws,
        "grid_size": size,
        "tau": tau,
        "check_points": sub,
        "target": target.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "empirical": empirical.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "max_abs_discrepancy": abs,
        "max_rel_discrepancy": rel,
    });
    let mut w = out.create("covariance.json")?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    println!("max covariance discrepancy: {abs:.4e} (relative {rel:.4e})");
    Ok(Outcome::Ok)
}

fn experiment(config: &Path, seed: Option<u64>, out: &Output) -> anyhow::Result<Outcome> {
    let cfg = load_config(config, seed)?;
    let exps = cfg.experiment_configs().map_err(|e| usage(e.to_string()))?;
    if exps.is_empty() {
        return Err(usage(format!("{} defines no [[experiment]]", config.display())));
    }
    let mut outcome = Outcome::Ok;
    for e in &exps {
        let result = run_experiment(e)?;
        let sub = |f: &str| format!("{}/{f}", e.name);
        result.write_raw_csv(out.create(&sub("raw.csv"))?)?;
        result.write_summary_csv(out.create(&sub("summary.csv"))?)?;
        result.write_rates_json(out.create(&sub("rates.json"))?)?;
        std::fs::write(
            out.path(&sub("summary.md"))?,
            render_markdown(&result.name, &result.summary, &result.rates, &result.exponents),
        )?;
        let invalid = result.summary.iter().filter(|r| !r.is_valid()).count();
        println!("{}: {} summary rows, {invalid} invalid", e.name, result.summary.len());
        if invalid > 0 {
            outcome = Outcome::InvalidRows;
        }
    }
    Ok(outcome)
}

fn report(results: &Path, out: &Output) -> anyhow::Result<Outcome> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(results)
        .with_context(|| format!("reading {}", results.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.csv").is_file())
        .collect();
    if results.join("summary.csv").is_file() {
        dirs.push(results.to_path_buf());
    }
    dirs.sort();
    if dirs.is_empty() {
        bail!("no summary.csv found under {}", results.display());
    }
    let mut outcome = Outcome::Ok;
    let mut combined = String::new();
    for dir in dirs {
        let name = dir.file_name().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
        let summary = read_summary_csv(File::open(dir.join("summary.csv"))?)?;
        let rates: Vec<RateRow> = match File::open(dir.join("rates.json")) {
            Ok(f) => serde_json::from_reader(f)?,
            Err(_) => Vec::new(),
        };
        let mut stats: Vec<&str> = Vec::new();
        for r in &summary {
            if !stats.contains(&r.statistic.as_str()) {
                stats.push(&r.statistic);
            }
        }
        for s in stats {
            write_plot_csv(out.create(&format!("{name}/plot_{s}.csv"))?, &summary, s)?;
        }
        if summary.iter().any(|r| !r.is_valid()) {
            outcome = Outcome::InvalidRows;
        }
        combined.push_str(&render_markdown(&name, &summary, &rates, &RateParams::default()));
        combined.push('\n');
    }
    std::fs::write(out.path("report.md")?, &combined)?;
    print!("{combined}");
    Ok(outcome)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    match cli.command {
        Command::Generate { config, n, seed, stream, out } => generate(&config, n, seed, stream, &Output::new(&out, cli.force)?),
        Command::Estimate { input, config, out, grid_size } => {
            estimate(&input, config.as_deref(), grid_size, &Output::new(&out, cli.force)?)
        }
        Command::GpSample { config, n_level, draws, method, grid_size, seed, out } => {
            gp_sample(&config, n_level, draws, method, grid_size, seed, &Output::new(&out, cli.force)?)
        }
        Command::Experiment { config, seed, out } => experiment(&config, seed, &Output::new(&out, cli.force)?),
        Command::Report { results, out } => {
            let out = out.unwrap_or_else(|| results.clone());
            report(&results, &Output::new(&out, cli.force)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::InvalidRows) => {
            eprintln!("error: at least one summary row is invalid");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
