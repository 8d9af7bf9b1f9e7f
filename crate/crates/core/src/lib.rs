//! Simulator and analysis toolkit for evolutionary diversity optimization on
//! the three-objective LOTZ_k benchmark.
//!
//! * [`lotz`]: genomes, the objective function and dominance.
//! * [`diversity`]: imbalance counters and the total-imbalance and
//!   sorted-imbalances measures.
//! * [`oracle`]: closed forms for covering populations and their optimal
//!   diversity, plus constructors for special covering populations.
//! * [`population`] and [`evolve`]: the archive and the GSEMO / GSEMO_D loop.
//! * [`experiments`] and [`report`]: batch protocols and CSV output.
//! * [`verify`]: brute-force cross-checks of the closed forms.

pub mod diversity;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod lotz;
pub mod oracle;
pub mod population;
pub mod report;
pub mod rng;
pub mod verify;

pub use diversity::MeasureKind;
pub use error::{Error, Result};
pub use evolve::{run, Gsemo, RunConfig, RunRecord, StopRule};
pub use lotz::{Fitness, Genome, ProblemParams};
pub use oracle::{build_covering_population, optimal_diversity, Fill, OptimalDiversity};
pub use population::Population;
