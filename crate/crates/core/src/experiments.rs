//! Batch protocols over the `(n, k)` grid.
//!
//! * `fig3`: GSEMO_D from one random genome until optimal diversity; both the
//!   cover time and the optimum time are normalized by `k n^3`.
//! * `fig4`: GSEMO and GSEMO_D (both measures) until the front is covered;
//!   reports `imbalance_at_cover / opt_total - 1`. Cells with `k = 2` are
//!   skipped since every covering population is then optimal.
//! * `fig5`: GSEMO_D from the worst-diversity covering population (the same
//!   one in every run) until optimal diversity, normalized by `k n^2 ln n`.
//!
//! Every (cell, run) owns its RNG stream, so results do not depend on how
//! runs are scheduled across workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diversity::MeasureKind;
use crate::error::{Error, Result};
use crate::evolve::{run, RunConfig, StopRule};
use crate::lotz::ProblemParams;
use crate::oracle::{build_covering_population, optimal_diversity, Fill};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    FullRun,
    CoverDiversity,
    WorstStart,
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::FullRun => "fig3",
            Experiment::CoverDiversity => "fig4",
            Experiment::WorstStart => "fig5",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Experiment::FullRun => 3,
            Experiment::CoverDiversity => 4,
            Experiment::WorstStart => 5,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Experiment::FullRun),
            "fig4" => Ok(Experiment::CoverDiversity),
            "fig5" => Ok(Experiment::WorstStart),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

/// How `k` is chosen from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KRule {
    Two,
    Four,
    Sqrt,
    Half,
    Full,
}

impl KRule {
    pub const ALL: [KRule; 5] = [KRule::Two, KRule::Four, KRule::Sqrt, KRule::Half, KRule::Full];

    pub fn k_for(&self, n: usize) -> usize {
        match self {
            KRule::Two => 2,
            KRule::Four => 4,
            KRule::Sqrt => n.isqrt(),
            KRule::Half => n / 2,
            KRule::Full => n,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            KRule::Two => "2",
            KRule::Four => "4",
            KRule::Sqrt => "sqrt",
            KRule::Half => "n/2",
            KRule::Full => "n",
        }
    }
}

/// One `(n, k)` point and the rules that produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub rules: Vec<KRule>,
}

impl Cell {
    pub fn new(n: usize, k: usize) -> Self {
        let rules = KRule::ALL.into_iter().filter(|r| r.k_for(n) == k).collect();
        Self { n, k, rules }
    }

    /// Rule labels joined with `;`, e.g. `2;sqrt` for `n = 8, k = 2`.
    pub fn rules_label(&self) -> String {
        if self.rules.is_empty() {
            return "custom".into();
        }
        self.rules.iter().map(KRule::label).collect::<Vec<_>>().join(";")
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.k)
    }
}

/// Deduplicated cells for problem size `n`. For `n >= 128` only the rules
/// `2`, `4` and `sqrt` are used.
pub fn cells_for(n: usize) -> Vec<Cell> {
    let rules: &[KRule] = if n >= 128 {
        &[KRule::Two, KRule::Four, KRule::Sqrt]
    } else {
        &KRule::ALL
    };
    let mut out: Vec<Cell> = Vec::new();
    for rule in rules {
        let k = rule.k_for(n);
        if k < 2 || k > n {
            continue;
        }
        match out.iter_mut().find(|c| c.k == k) {
            Some(c) => c.rules.push(*rule),
            None => out.push(Cell {
                n,
                k,
                rules: vec![*rule],
            }),
        }
    }
    out.sort_by_key(|c| c.k);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// `n` in {8, 16, 32, 64, 128}.
    Paper,
    /// `n` in {8, 16, 32, 64}.
    Small,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "small" => Ok(Scale::Small),
            other => Err(Error::Config(format!("unknown scale {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub cells: Vec<Cell>,
    pub runs_per_cell: usize,
    pub base_seed: u64,
}

impl GridSpec {
    pub fn for_scale(scale: Scale, runs_per_cell: usize, base_seed: u64) -> Self {
        let ns: &[usize] = match scale {
            Scale::Paper => &[8, 16, 32, 64, 128],
            Scale::Small => &[8, 16, 32, 64],
        };
        Self {
            cells: ns.iter().flat_map(|&n| cells_for(n)).collect(),
            runs_per_cell,
            base_seed,
        }
    }

    pub fn from_cells(cells: Vec<Cell>, runs_per_cell: usize, base_seed: u64) -> Self {
        Self {
            cells,
            runs_per_cell,
            base_seed,
        }
    }
}

/// An algorithm and its tie-break measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub measure: MeasureKind,
}

impl Variant {
    pub fn algorithm(&self) -> &'static str {
        match self.measure {
            MeasureKind::NoDiversity => "gsemo",
            _ => "gsemo_d",
        }
    }

    fn tag(&self) -> u64 {
        match self.measure {
            MeasureKind::TotalImbalance => 1,
            MeasureKind::SortedVector => 2,
            MeasureKind::NoDiversity => 3,
        }
    }
}

/// One line of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRow {
    pub experiment: Experiment,
    pub algorithm: &'static str,
    pub measure: MeasureKind,
    pub n: usize,
    pub k: usize,
    pub rules: String,
    pub run_index: usize,
    pub seed: u64,
    pub iters_to_cover: Option<u64>,
    pub iters_to_opt: Option<u64>,
    pub imbalance_at_cover: Option<u64>,
    pub opt_total: u64,
    pub mu_max: usize,
    pub capped: bool,
}

/// Named statistic derived from one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `iters_to_cover / (k n^3)`.
    CoverPerKn3,
    /// `iters_to_opt / (k n^3)`.
    OptPerKn3,
    /// `imbalance_at_cover / opt_total - 1`.
    ImbalanceExcess,
    /// `iters_to_opt / (k n^2 ln n)`.
    OptPerKn2LnN,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::CoverPerKn3 => "cover_per_kn3",
            Statistic::OptPerKn3 => "opt_per_kn3",
            Statistic::ImbalanceExcess => "imbalance_excess",
            Statistic::OptPerKn2LnN => "opt_per_kn2lnn",
        }
    }

    pub fn of(&self, row: &RunRow) -> Option<f64> {
        let n = row.n as f64;
        let k = row.k as f64;
        match self {
            Statistic::CoverPerKn3 => row.iters_to_cover.map(|t| t as f64 / (k * n * n * n)),
            Statistic::OptPerKn3 => row.iters_to_opt.map(|t| t as f64 / (k * n * n * n)),
            Statistic::ImbalanceExcess => row
                .imbalance_at_cover
                .map(|b| b as f64 / row.opt_total as f64 - 1.0),
            Statistic::OptPerKn2LnN => row.iters_to_opt.map(|t| t as f64 / (k * n * n * n.ln())),
        }
    }
}

impl Experiment {
    pub fn statistics(&self) -> &'static [Statistic] {
        match self {
            Experiment::FullRun => &[Statistic::CoverPerKn3, Statistic::OptPerKn3],
            Experiment::CoverDiversity => &[Statistic::ImbalanceExcess],
            Experiment::WorstStart => &[Statistic::OptPerKn2LnN],
        }
    }

    /// Algorithm variants run per cell. `measure` selects the GSEMO_D
    /// measure for `fig3` and `fig5`; `fig4` always runs all three.
    pub fn variants(&self, measure: MeasureKind) -> Result<Vec<Variant>> {
        match self {
            Experiment::CoverDiversity => Ok(vec![
                Variant { measure: MeasureKind::TotalImbalance },
                Variant { measure: MeasureKind::SortedVector },
                Variant { measure: MeasureKind::NoDiversity },
            ]),
            _ if measure == MeasureKind::NoDiversity => Err(Error::Config(format!(
                "{self} needs a diversity measure (total or sorted)"
            ))),
            _ => Ok(vec![Variant { measure }]),
        }
    }

    pub fn includes(&self, cell: &Cell) -> bool {
        !(matches!(self, Experiment::CoverDiversity) && cell.k == 2)
    }
}

/// Aggregate of one statistic over the runs of one cell and variant.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub experiment: Experiment,
    pub algorithm: &'static str,
    pub measure: MeasureKind,
    pub n: usize,
    pub k: usize,
    pub rules: String,
    pub statistic: Statistic,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
    pub capped: usize,
}

/// Sample mean and sample standard deviation (denominator `N - 1`; a single
/// value has standard deviation 0).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyCell("no values to aggregate".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Groups rows by (experiment, algorithm, measure, n, k) in order of first
/// appearance and summarizes every statistic of the experiment. Capped runs
/// are counted but excluded from the means.
pub fn aggregate(rows: &[RunRow]) -> Result<Vec<CellSummary>> {
    type Key = (Experiment, &'static str, MeasureKind, usize, usize);
    let mut groups: Vec<(Key, Vec<&RunRow>)> = Vec::new();
    for row in rows {
        let key = (row.experiment, row.algorithm, row.measure, row.n, row.k);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    let mut out = Vec::new();
    for ((experiment, algorithm, measure, n, k), members) in groups {
        // Sort by run index so the fold is independent of input order.
        let mut members = members;
        members.sort_by_key(|r| r.run_index);
        let capped = members.iter().filter(|r| r.capped).count();
        for &stat in experiment.statistics() {
            let values: Vec<f64> = members
                .iter()
                .filter(|r| !r.capped)
                .filter_map(|r| stat.of(r))
                .collect();
            let (mean, std) = mean_std(&values).map_err(|_| {
                Error::EmptyCell(format!(
                    "{experiment} {algorithm} {measure} n={n} k={k} {}",
                    stat.name()
                ))
            })?;
            out.push(CellSummary {
                experiment,
                algorithm,
                measure,
                n,
                k,
                rules: members[0].rules.clone(),
                statistic: stat,
                mean,
                std,
                runs: values.len(),
                capped,
            });
        }
    }
    Ok(out)
}

/// Seed of one run.
pub fn run_seed(base: u64, experiment: Experiment, variant: Variant, n: usize, k: usize, run_index: usize) -> u64 {
    derive_seed(
        base,
        &[experiment.tag(), variant.tag(), n as u64, k as u64, run_index as u64],
    )
}

/// Runs every run of one cell for one variant.
pub fn run_cell(
    experiment: Experiment,
    variant: Variant,
    cell: &Cell,
    runs: usize,
    base_seed: u64,
) -> Result<Vec<RunRow>> {
    let params = cell.params()?;
    let opt = optimal_diversity(params);
    let worst = match experiment {
        Experiment::WorstStart => Some(build_covering_population(params, Fill::WorstDiversity)),
        _ => None,
    };
    let stop = match experiment {
        Experiment::CoverDiversity => StopRule::Cover,
        _ => StopRule::Optimum,
    };
    let rules = cell.rules_label();
    (0..runs)
        .into_par_iter()
        .map(|run_index| {
            let seed = run_seed(base_seed, experiment, variant, cell.n, cell.k, run_index);
            let cfg = RunConfig::new(params, variant.measure, seed).with_stop(stop);
            let rec = run(&cfg, worst.clone())?;
            Ok(RunRow {
                experiment,
                algorithm: variant.algorithm(),
                measure: variant.measure,
                n: cell.n,
                k: cell.k,
                rules: rules.clone(),
                run_index,
                seed,
                iters_to_cover: rec.iters_to_cover,
                iters_to_opt: rec.iters_to_opt,
                imbalance_at_cover: rec.imbalance_at_cover,
                opt_total: opt.opt_total,
                mu_max: opt.mu_max,
                capped: rec.capped,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<RunRow>,
    pub summaries: Vec<CellSummary>,
}

impl ExperimentOutput {
    pub fn capped(&self) -> usize {
        self.rows.iter().filter(|r| r.capped).count()
    }
}

/// Runs `experiment` over `grid`. `progress` is called after each finished
/// (cell, variant) with a short human-readable line. Parallelism comes from
/// the ambient rayon pool.
pub fn run_experiment<F>(
    experiment: Experiment,
    grid: &GridSpec,
    measure: MeasureKind,
    mut progress: F,
) -> Result<ExperimentOutput>
where
    F: FnMut(&str),
{
    if grid.runs_per_cell == 0 {
        return Err(Error::Config("runs per cell must be positive".into()));
    }
    let variants = experiment.variants(measure)?;
    let mut rows = Vec::new();
    for cell in grid.cells.iter().filter(|c| experiment.includes(c)) {
        for &variant in &variants {
            let cell_rows = run_cell(experiment, variant, cell, grid.runs_per_cell, grid.base_seed)?;
            let capped = cell_rows.iter().filter(|r| r.capped).count();
            progress(&format!(
                "{experiment} {} {} n={} k={} ({}): {} runs, {} capped",
                variant.algorithm(),
                variant.measure,
                cell.n,
                cell.k,
                cell.rules_label(),
                cell_rows.len(),
                capped
            ));
            rows.extend(cell_rows);
        }
    }
    let summaries = aggregate(&rows)?;
    Ok(ExperimentOutput { rows, summaries })
}

/// Runs `f` inside a dedicated rayon pool with `jobs` workers. `jobs = 0`
/// uses rayon's default worker count.
pub fn with_jobs<T, F>(jobs: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `experiment_full_run`: the total-runtime protocol.
pub fn experiment_full_run(grid: &GridSpec, measure: MeasureKind) -> Result<ExperimentOutput> {
    run_experiment(Experiment::FullRun, grid, measure, |_| {})
}

/// `experiment_cover_diversity`: diversity at the cover instant.
pub fn experiment_cover_diversity(grid: &GridSpec) -> Result<ExperimentOutput> {
    run_experiment(Experiment::CoverDiversity, grid, MeasureKind::TotalImbalance, |_| {})
}

/// `experiment_worst_start`: optimization time from the worst population.
pub fn experiment_worst_start(grid: &GridSpec, measure: MeasureKind) -> Result<ExperimentOutput> {
    run_experiment(Experiment::WorstStart, grid, measure, |_| {})
}
