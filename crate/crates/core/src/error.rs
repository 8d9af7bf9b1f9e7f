use thiserror::Error;

/// Errors raised by the simulator and its oracles.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: n = {n}, k = {k} (need 2 <= k <= n)")]
    InvalidParams { n: usize, k: usize },

    #[error("genome length {actual} does not match problem size {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("position {pos} out of range 1..={n}")]
    PositionOutOfRange { pos: usize, n: usize },

    #[error("fitness ({lo}, {tz}) does not exist for n = {n}")]
    NonexistentFitness { lo: usize, tz: usize, n: usize },

    #[error("fitness ({lo}, {tz}) is infeasible for n = {n}, k = {k}")]
    InfeasibleFitness { lo: usize, tz: usize, n: usize, k: usize },

    #[error("expected {expected} free bits, got {actual}")]
    FreeBitsLength { expected: usize, actual: usize },

    #[error("cannot parse genome: {0}")]
    ParseGenome(String),

    #[error("snapshot mismatch: {0}")]
    SnapshotMismatch(String),

    #[error("population does not cover the feasible set ({covered} of {mu_max})")]
    NotCovering { covered: usize, mu_max: usize },

    #[error("imbalance {actual} below the optimum {target} at position {pos}")]
    BelowOptimum { pos: usize, actual: u32, target: u32 },

    #[error("inconsistent population: {0}")]
    InconsistentPopulation(String),

    #[error("enumeration guard: n = {n} exceeds the limit {limit}")]
    EnumerationGuard { n: usize, limit: usize },

    #[error("empty cell: {0}")]
    EmptyCell(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
