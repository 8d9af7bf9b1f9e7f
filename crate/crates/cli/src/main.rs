use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use edo_core::experiments::{run_experiment, with_jobs, Experiment, GridSpec, Scale};
use edo_core::oracle::{build_covering_population, mu_max, optimal_diversity, Fill};
use edo_core::report::write_experiment;
use edo_core::verify::{verify, ClosedForms};
use edo_core::{run, MeasureKind, ProblemParams, RunConfig, StopRule};

const EXIT_ERROR: u8 = 1;
const EXIT_CAPPED: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "edo", version, about = "GSEMO / GSEMO_D on LOTZ_k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Total,
    Sorted,
    None,
}

impl From<Measure> for MeasureKind {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Total => MeasureKind::TotalImbalance,
            Measure::Sorted => MeasureKind::SortedVector,
            Measure::None => MeasureKind::NoDiversity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    /// One uniformly random genome.
    Random,
    /// Covering population with the largest imbalance at every position.
    Worst,
    /// Covering population with optimal diversity.
    Best,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stop {
    Cover,
    Optimum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Paper,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation and print its record.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "total")]
        measure: Measure,
        #[arg(long, env = "EDO_SEED", default_value_t = 0)]
        seed: u64,
        /// Iteration cap; defaults to 100 k n^3.
        #[arg(long)]
        max_iters: Option<u64>,
        #[arg(long, value_enum, default_value = "random")]
        init: Init,
        #[arg(long, value_enum, default_value = "optimum")]
        stop: Stop,
        /// Also write the record to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one experiment grid and write runs.csv and summary.csv.
    Experiment {
        #[arg(long, value_enum)]
        which: Which,
        /// Diversity measure for fig3 and fig5 (fig4 runs all three).
        #[arg(long, value_enum, default_value = "total")]
        measure: Measure,
        #[arg(long, default_value_t = 128)]
        runs: usize,
        #[arg(long, env = "EDO_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "paper")]
        scale: ScaleArg,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        quiet: bool,
    },
    /// Print the closed-form optimum for one (n, k).
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Cross-check the closed forms against exhaustive enumeration.
    Verify {
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cmd: Command) -> edo_core::Result<ExitCode> {
    match cmd {
        Command::Run {
            n,
            k,
            measure,
            seed,
            max_iters,
            init,
            stop,
            out,
        } => {
            let params = ProblemParams::new(n, k)?;
            let mut cfg = RunConfig::new(params, measure.into(), seed).with_stop(match stop {
                Stop::Cover => StopRule::Cover,
                Stop::Optimum => StopRule::Optimum,
            });
            if let Some(m) = max_iters {
                cfg = cfg.with_max_iters(m);
            }
            let initial = match init {
                Init::Random => None,
                Init::Worst => Some(build_covering_population(params, Fill::WorstDiversity)),
                Init::Best => Some(build_covering_population(params, Fill::BestDiversity)),
            };
            let rec = run(&cfg, initial)?;
            let opt = optimal_diversity(params);
            let field = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut text = String::new();
            let _ = writeln!(text, "n={n}");
            let _ = writeln!(text, "k={k}");
            let _ = writeln!(text, "measure={}", MeasureKind::from(measure));
            let _ = writeln!(text, "seed={seed}");
            let _ = writeln!(text, "mu_max={}", opt.mu_max);
            let _ = writeln!(text, "opt_total={}", opt.opt_total);
            let _ = writeln!(text, "iters_to_cover={}", field(rec.iters_to_cover));
            let _ = writeln!(text, "iters_to_opt={}", field(rec.iters_to_opt));
            let _ = writeln!(text, "imbalance_at_cover={}", field(rec.imbalance_at_cover));
            let _ = writeln!(text, "final_phi={}", field(rec.final_phi));
            let _ = writeln!(text, "iterations={}", rec.iterations);
            let _ = writeln!(text, "capped={}", rec.capped);
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            if rec.capped {
                eprintln!("run hit the iteration cap");
                return Ok(ExitCode::from(EXIT_CAPPED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment {
            which,
            measure,
            runs,
            seed,
            scale,
            out_dir,
            jobs,
            quiet,
        } => {
            let experiment = match which {
                Which::Fig3 => Experiment::FullRun,
                Which::Fig4 => Experiment::CoverDiversity,
                Which::Fig5 => Experiment::WorstStart,
            };
            let scale = match scale {
                ScaleArg::Paper => Scale::Paper,
                ScaleArg::Small => Scale::Small,
            };
            let grid = GridSpec::for_scale(scale, runs, seed);
            let out = with_jobs(jobs, || {
                run_experiment(experiment, &grid, measure.into(), |line| {
                    if !quiet {
                        eprintln!("{line}");
                    }
                })
            })??;
            write_experiment(&out_dir, &out.rows, &out.summaries)?;
            let capped = out.capped();
            if capped > 0 {
                eprintln!("{capped} runs hit the iteration cap");
                return Ok(ExitCode::from(EXIT_CAPPED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { n, k } => {
            let params = ProblemParams::new(n, k)?;
            let opt = optimal_diversity(params);
            let mu = mu_max(params);
            println!("mu_max={mu}");
            println!("parity={}", if mu.is_multiple_of(2) { "even" } else { "odd" });
            println!("delta={}", opt.delta);
            println!("opt_total={}", opt.opt_total);
            println!("i,b_opt");
            for (i, b) in opt.b_opt.iter().enumerate() {
                println!("{},{b}", i + 1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { max_n } => {
            let report = verify(max_n, ClosedForms::default())?;
            for c in &report.checks {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({} cases, {} failures)", c.name, c.cases, c.failure_count);
                for f in &c.failures {
                    println!("    {f}");
                }
            }
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_VERIFY_FAILED))
            }
        }
    }
}
