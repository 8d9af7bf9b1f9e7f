//! The GSEMO / GSEMO_D loop on LOTZ_k.
//!
//! One iteration picks a parent uniformly from the archive, applies standard
//! bit mutation and offers the offspring to the archive (see
//! [`Population::offer`]). Iterations are counted as offspring evaluations.

use rand::{Rng, RngCore};

use crate::diversity::MeasureKind;
use crate::error::{Error, Result};
use crate::lotz::{evaluate, Genome, ProblemParams};
use crate::oracle::{optimal_diversity, OptimalDiversity};
use crate::population::{Offer, Population};
use crate::rng::{rng_from_seed, SimRng};

/// Standard bit mutation: every bit of `child` (a copy of `parent`) flips
/// independently with probability `1 / n`.
///
/// Each bit draws one `u64` and flips when it falls below `floor(2^64 / n)`,
/// which keeps the operator integer-only and reproducible across platforms.
pub fn mutate_into<R: RngCore + ?Sized>(parent: &Genome, child: &mut Genome, rng: &mut R) {
    child.copy_from(parent);
    let n = parent.len() as u64;
    if n == 0 {
        return;
    }
    let threshold = u64::MAX / n;
    for pos in 1..=parent.len() {
        if rng.next_u64() < threshold {
            child.flip(pos);
        }
    }
}

pub fn mutate<R: RngCore + ?Sized>(parent: &Genome, rng: &mut R) -> Genome {
    let mut child = parent.clone();
    mutate_into(parent, &mut child, rng);
    child
}

/// When a run stops early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop when every feasible fitness vector is present.
    Cover,
    /// Stop when the covering population also has optimal diversity.
    Optimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub measure: MeasureKind,
    pub seed: u64,
    pub max_iters: u64,
    pub stop: StopRule,
}

impl RunConfig {
    pub fn new(params: ProblemParams, measure: MeasureKind, seed: u64) -> Self {
        Self {
            params,
            measure,
            seed,
            max_iters: default_max_iters(params),
            stop: StopRule::Optimum,
        }
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }
}

/// `100 k n^3`.
pub fn default_max_iters(p: ProblemParams) -> u64 {
    let n = p.n() as u64;
    100 * p.k() as u64 * n * n * n
}

/// Measurements of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunRecord {
    /// Iterations until all feasible fitness vectors were present.
    pub iters_to_cover: Option<u64>,
    /// Iterations until the covering population reached optimal diversity.
    pub iters_to_opt: Option<u64>,
    /// Total imbalance at the cover instant.
    pub imbalance_at_cover: Option<u64>,
    /// Potential at the end of the run, if the front was covered.
    pub final_phi: Option<u64>,
    pub iterations: u64,
    pub capped: bool,
}

/// A single GSEMO / GSEMO_D run in progress.
pub struct Gsemo {
    measure: MeasureKind,
    pop: Population,
    rng: SimRng,
    offspring: Genome,
    iterations: u64,
}

impl Gsemo {
    /// Starts from one uniformly random genome.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let mut rng = rng_from_seed(cfg.seed);
        let n = cfg.params.n();
        let start = Genome::from_bits((0..n).map(|_| rng.random::<bool>()));
        let pop = Population::single(cfg.params, start)?;
        Ok(Self::assemble(cfg, pop, rng))
    }

    /// Starts from a given population.
    pub fn with_population(cfg: &RunConfig, pop: Population) -> Result<Self> {
        if pop.params() != cfg.params {
            return Err(Error::Config("initial population has different parameters".into()));
        }
        if pop.is_empty() {
            return Err(Error::Config("initial population is empty".into()));
        }
        let rng = rng_from_seed(cfg.seed);
        Ok(Self::assemble(cfg, pop, rng))
    }

    fn assemble(cfg: &RunConfig, pop: Population, rng: SimRng) -> Self {
        Self {
            measure: cfg.measure,
            offspring: Genome::zeros(cfg.params.n()),
            pop,
            rng,
            iterations: 0,
        }
    }

    #[inline]
    pub fn population(&self) -> &Population {
        &self.pop
    }

    #[inline]
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn into_population(self) -> Population {
        self.pop
    }

    /// One iteration; returns what happened to the offspring.
    pub fn step_detailed(&mut self) -> Result<Offer> {
        let idx = self.rng.random_range(0..self.pop.len());
        mutate_into(&self.pop.member(idx).genome, &mut self.offspring, &mut self.rng);
        let f = evaluate(&self.offspring, self.pop.params())?;
        let outcome = self.pop.offer(&mut self.offspring, f, self.measure)?;
        self.iterations += 1;
        Ok(outcome)
    }

    /// One iteration; returns whether the offspring entered the archive.
    pub fn step(&mut self) -> Result<bool> {
        self.step_detailed().map(|o| o.accepted())
    }
}

/// Runs until the stop rule fires or `max_iters` iterations have passed.
/// Starts from `initial` when given, otherwise from one random genome.
pub fn run(cfg: &RunConfig, initial: Option<Population>) -> Result<RunRecord> {
    if cfg.max_iters == 0 {
        return Err(Error::Config("max_iters must be positive".into()));
    }
    let opt = optimal_diversity(cfg.params);
    let mut sim = match initial {
        Some(pop) => Gsemo::with_population(cfg, pop)?,
        None => Gsemo::new(cfg)?,
    };
    run_with(cfg, &opt, &mut sim)
}

/// Drives `sim` under `cfg`, recording cover and optimum events.
pub fn run_with(cfg: &RunConfig, opt: &OptimalDiversity, sim: &mut Gsemo) -> Result<RunRecord> {
    let mut rec = RunRecord {
        iters_to_cover: None,
        iters_to_opt: None,
        imbalance_at_cover: None,
        final_phi: None,
        iterations: 0,
        capped: false,
    };
    let start = sim.iterations();
    loop {
        let t = sim.iterations() - start;
        let pop = sim.population();
        if rec.iters_to_cover.is_none() && pop.is_covering() {
            debug_assert_eq!(pop.len(), opt.mu_max);
            rec.iters_to_cover = Some(t);
            rec.imbalance_at_cover = Some(pop.total_imbalance());
        }
        if rec.iters_to_cover.is_some()
            && rec.iters_to_opt.is_none()
            && pop.total_imbalance() == opt.opt_total
        {
            rec.iters_to_opt = Some(t);
        }
        let done = match cfg.stop {
            StopRule::Cover => rec.iters_to_cover.is_some(),
            StopRule::Optimum => rec.iters_to_opt.is_some(),
        };
        if done {
            break;
        }
        if t >= cfg.max_iters {
            rec.capped = true;
            break;
        }
        sim.step()?;
    }
    let pop = sim.population();
    rec.iterations = sim.iterations() - start;
    if pop.is_covering() {
        rec.final_phi = Some(pop.total_imbalance() - opt.opt_total);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_covering_population, Fill};

    fn p(n: usize, k: usize) -> ProblemParams {
        ProblemParams::new(n, k).unwrap()
    }

    #[test]
    fn mutation_flips_one_bit_on_average() {
        let mut rng = rng_from_seed(11);
        let n = 64;
        let parent = Genome::zeros(n);
        let mut child = Genome::zeros(n);
        let trials = 1_000_000u64;
        let mut flips = 0u64;
        let mut unchanged = 0u64;
        let mut per_pos = vec![0u64; n];
        for _ in 0..trials {
            mutate_into(&parent, &mut child, &mut rng);
            let c = child.count_ones() as u64;
            flips += c;
            unchanged += (c == 0) as u64;
            for pos in 1..=n {
                per_pos[pos - 1] += child.get(pos) as u64;
            }
        }
        let mean = flips as f64 / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean flips {mean}");

        let q = (1.0 - 1.0 / n as f64).powi(n as i32);
        let sigma = (q * (1.0 - q) / trials as f64).sqrt();
        let frac = unchanged as f64 / trials as f64;
        assert!((frac - q).abs() < 3.0 * sigma, "P(no flip) {frac} vs {q}");

        // Chi-square over positions, 63 degrees of freedom; the 0.999
        // quantile is about 103.4.
        let expected = flips as f64 / n as f64;
        let chi2: f64 = per_pos
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 103.4, "chi2 = {chi2}");
    }

    #[test]
    fn best_start_is_optimal_immediately() {
        let params = p(16, 4);
        for measure in [MeasureKind::TotalImbalance, MeasureKind::SortedVector] {
            let pop = build_covering_population(params, Fill::BestDiversity);
            let rec = run(&RunConfig::new(params, measure, 3), Some(pop)).unwrap();
            assert_eq!(rec.iters_to_cover, Some(0));
            assert_eq!(rec.iters_to_opt, Some(0));
            assert_eq!(rec.final_phi, Some(0));
            assert!(!rec.capped);
        }
    }

    #[test]
    fn k_two_opt_coincides_with_cover() {
        for seed in 0..16 {
            for measure in [MeasureKind::TotalImbalance, MeasureKind::SortedVector] {
                let rec = run(&RunConfig::new(p(10, 2), measure, seed), None).unwrap();
                assert!(!rec.capped);
                assert_eq!(rec.iters_to_cover, rec.iters_to_opt);
            }
        }
    }

    #[test]
    fn cap_is_reported_not_raised() {
        let cfg = RunConfig::new(p(16, 4), MeasureKind::TotalImbalance, 1).with_max_iters(10);
        let rec = run(&cfg, None).unwrap();
        assert!(rec.capped);
        assert_eq!(rec.iterations, 10);
        assert_eq!(rec.iters_to_cover, None);
        let zero = cfg.with_max_iters(0);
        assert!(run(&zero, None).is_err());
    }

    #[test]
    fn cover_stop_rule() {
        let cfg = RunConfig::new(p(12, 6), MeasureKind::NoDiversity, 5).with_stop(StopRule::Cover);
        let rec = run(&cfg, None).unwrap();
        assert!(!rec.capped);
        assert_eq!(rec.iterations, rec.iters_to_cover.unwrap());
        assert!(rec.imbalance_at_cover.unwrap() >= optimal_diversity(p(12, 6)).opt_total);
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = RunConfig::new(p(12, 4), MeasureKind::SortedVector, 99);
        assert_eq!(run(&cfg, None).unwrap(), run(&cfg, None).unwrap());
    }

    #[test]
    fn archive_invariants_hold_along_runs() {
        for (n, k, seed) in [(6, 2, 1), (7, 3, 2), (8, 4, 3), (9, 9, 4), (10, 5, 5)] {
            for measure in [
                MeasureKind::TotalImbalance,
                MeasureKind::SortedVector,
                MeasureKind::NoDiversity,
            ] {
                let params = p(n, k);
                let mu = crate::oracle::mu_max(params);
                let cfg = RunConfig::new(params, measure, seed);
                let mut sim = Gsemo::new(&cfg).unwrap();
                let mut covered = 0;
                for _ in 0..20_000 {
                    sim.step().unwrap();
                    let pop = sim.population();
                    pop.check_consistency().unwrap();
                    assert!(pop.covered_feasible() >= covered);
                    covered = pop.covered_feasible();
                    if covered > 0 {
                        assert!(pop.len() <= mu);
                    } else {
                        let max_u = pop
                            .members()
                            .iter()
                            .map(|m| m.fitness.lo + m.fitness.tz)
                            .max()
                            .unwrap();
                        assert!(pop.len() <= max_u + 1);
                        assert!(max_u < n - k);
                    }
                }
            }
        }
    }
}
