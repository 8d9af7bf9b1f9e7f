//! CSV output for experiment runs and per-cell summaries.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::experiments::{CellSummary, RunRow};

pub const RUNS_HEADER: [&str; 13] = [
    "experiment",
    "algorithm",
    "measure",
    "n",
    "k",
    "run_index",
    "seed",
    "iters_to_cover",
    "iters_to_opt",
    "imbalance_at_cover",
    "opt_total",
    "mu_max",
    "capped",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "experiment",
    "algorithm",
    "measure",
    "n",
    "k",
    "k_rules",
    "statistic",
    "mean",
    "std",
    "runs",
    "capped",
];

/// Formats a ratio with 10 significant digits in plain or scientific
/// notation, whichever `{:e}` precision rules pick for the magnitude.
pub fn format_ratio(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.9e}");
        let (mant, e) = s.split_once('e').expect("scientific notation");
        format!("{}e{e}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_runs<W: Write>(w: W, rows: &[RunRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(RUNS_HEADER)?;
    for r in rows {
        out.write_record([
            r.experiment.id().to_string(),
            r.algorithm.to_string(),
            r.measure.as_str().to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.run_index.to_string(),
            r.seed.to_string(),
            opt(r.iters_to_cover),
            opt(r.iters_to_opt),
            opt(r.imbalance_at_cover),
            r.opt_total.to_string(),
            r.mu_max.to_string(),
            r.capped.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, summaries: &[CellSummary]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        out.write_record([
            s.experiment.id().to_string(),
            s.algorithm.to_string(),
            s.measure.as_str().to_string(),
            s.n.to_string(),
            s.k.to_string(),
            s.rules.clone(),
            s.statistic.name().to_string(),
            format_ratio(s.mean),
            format_ratio(s.std),
            s.runs.to_string(),
            s.capped.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `runs.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn write_experiment(dir: &Path, rows: &[RunRow], summaries: &[CellSummary]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_runs(std::fs::File::create(dir.join("runs.csv"))?, rows)?;
    write_summary(std::fs::File::create(dir.join("summary.csv"))?, summaries)?;
    Ok(())
}
