use super::rates::{fit_rate, RateParams};
use super::{RateRow, SummaryRow};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{Read, Write};

fn describe(statistic: &str) -> &'static str {
    match statistic {
        "sup_pl" => {
            "sup |F̂ₙ − F| on [0, τ]: uniform consistency of the product-limit estimator (rate n^{-1/2} up to log factors)"
        }
        "sup_hazard" => "sup |Λ̂ₙ − Λ| on [0, τ]: uniform consistency of the Nelson–Aalen estimator",
        "lil" => "sup |Λ̂ₙ − Λ| · (n / log log n)^{1/2}: law-of-the-iterated-logarithm bound, expected bounded in n",
        "lil_pl" => "sup |F̂ₙ − F| · (n / log log n)^{1/2}: LIL bound for the product-limit estimator",
        "bahadur" => "sup_p |F̂ₙ(Qₙ(p)) − p|: inversion error of the PL-quantile, expected O(bₙ)",
        "bahadur_jump" => "largest jump of F̂ₙ over [Qₙ(p₀), Qₙ(p₁)]: structural ceiling for bahadur",
        "qdev" => "sup_p √n |Qₙ(p) − Q(p)| / √(log log n): quantile LIL bound, expected bounded in n",
        "oscillation" => "oscillation of Zₙ₂ over windows of width λₙ = const·bₙ: expected to vanish",
        "coupling" => "sup_p |ρₙ(p) − Zₙ₂(Q(p))|: quantile-process linearization error, expected to vanish",
        "sup_quantile" => "sup_p |ρₙ(p)|: scale reference for coupling",
        "rel38" => "sup |(F̂ₙ − F) − (1 − F)(Λ̂ₙ − Λ)| · n / log log n: product-limit vs hazard linearization remainder",
        "ksdist" => "KS distance between sup |Zₙ₂| and sup |(1 − F)B(·, n)| over replications",
        "ksdist_quantile" => "KS distance between sup |ρₙ| and sup_p (1 − p)|B(Q(p), n)| over replications",
        _ => "",
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

/// Markdown summary: one table per statistic and the fitted slopes.
pub fn render_markdown(name: &str, summary: &[SummaryRow], rates: &[RateRow], exponents: &RateParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Experiment `{name}`\n");
    let invalid: Vec<&SummaryRow> = summary.iter().filter(|r| !r.is_valid()).collect();
    if invalid.is_empty() {
        let _ = writeln!(out, "All summary rows valid.\n");
    } else {
        let _ = writeln!(out, "**{} invalid summary row(s)** (fewer than 90% valid replications):\n", invalid.len());
        for r in invalid {
            let _ = writeln!(out, "- `{}` at n = {}: {}/{} valid", r.statistic, r.n, r.reps_valid, r.reps);
        }
        out.push('\n');
    }
    let mut order: Vec<&str> = Vec::new();
    for r in summary {
        if !order.contains(&r.statistic.as_str()) {
            order.push(&r.statistic);
        }
    }
    for stat in order {
        let _ = writeln!(out, "## `{stat}`\n\n{}\n", describe(stat));
        let _ = writeln!(out, "| n | median | mean | q05 | q95 | valid |\n|---|---|---|---|---|---|");
        for r in summary.iter().filter(|r| r.statistic == stat) {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {}/{} |",
                r.n,
                cell(r.median),
                cell(r.mean),
                cell(r.q05),
                cell(r.q95),
                r.reps_valid,
                r.reps
            );
        }
        if let Some(rate) = rates.iter().find(|r| r.statistic == stat) {
            let _ = writeln!(out, "\nlog-log slope: {:.4} ± {:.4}", rate.slope, rate.stderr);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "## Exponents\n");
    let _ = writeln!(out, "- normalization λ = {}, window constant = {}", exponents.lambda, exponents.window_const);
    let _ = writeln!(out, "- fitted λ (from ksdist vs log n): {}", cell(exponents.lambda_exp));
    let _ = writeln!(out, "- fitted β (from coupling vs log n, minus λ): {}", cell(exponents.beta_exp));
    out
}

fn parse_opt(s: &str, row: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::MalformedRow { row, message: format!("bad number '{s}'") })
}

/// Reads a summary.csv written by an experiment run.
pub fn read_summary_csv<R: Read>(reader: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["statistic", "n", "median", "mean", "q05", "q95", "reps_valid"] {
        return Err(Error::MalformedRow { row: 1, message: "unexpected summary header".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let bad = |m: &str| Error::MalformedRow { row, message: m.to_string() };
        let n = rec[1].parse().map_err(|_| bad("bad n"))?;
        let (v, r) = rec[6].split_once('/').ok_or_else(|| bad("reps_valid must be k/reps"))?;
        out.push(SummaryRow {
            statistic: rec[0].to_string(),
            n,
            median: parse_opt(&rec[2], row)?,
            mean: parse_opt(&rec[3], row)?,
            q05: parse_opt(&rec[4], row)?,
            q95: parse_opt(&rec[5], row)?,
            reps_valid: v.parse().map_err(|_| bad("bad reps_valid"))?,
            reps: r.parse().map_err(|_| bad("bad reps"))?,
        });
    }
    Ok(out)
}

/// Plot data for one statistic: (n, log n, log median, fitted log median).
pub fn plot_data(summary: &[SummaryRow], statistic: &str) -> Vec<(usize, f64, f64, Option<f64>)> {
    let rows: Vec<&SummaryRow> =
        summary.iter().filter(|r| r.statistic == statistic && r.median.is_some_and(|m| m > 0.0)).collect();
    let sizes: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let med: Vec<f64> = rows.iter().map(|r| r.median.unwrap()).collect();
    let fit = fit_rate(&sizes, &med);
    rows.iter()
        .map(|r| {
            let x = (r.n as f64).ln();
            (r.n, x, r.median.unwrap().ln(), fit.map(|f| f.intercept + f.slope * x))
        })
        .collect()
}

pub fn write_plot_csv<W: Write>(writer: W, summary: &[SummaryRow], statistic: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "log_n", "log_median", "fitted"])?;
    for (n, x, y, f) in plot_data(summary, statistic) {
        w.write_record([n.to_string(), x.to_string(), y.to_string(), f.map_or_else(String::new, |v| v.to_string())])?;
    }
    w.flush()?;
    Ok(())
}
