//! The GSEMO archive: one genome per fitness vector, no member dominated by
//! another, with imbalance counters kept in step with the contents.

use crate::diversity::{ImbalanceCounters, MeasureKind};
use crate::error::{Error, Result};
use crate::lotz::{dominates, evaluate, Fitness, Genome, ProblemParams};
use crate::oracle::mu_max;

const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub genome: Genome,
    pub fitness: Fitness,
}

/// What happened to an offspring offered to the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offer {
    /// Same fitness as a member and not worse in diversity: replaced it.
    Swapped,
    /// Same fitness as a member but worse in diversity: discarded.
    TieRejected,
    /// Dominated by a member: discarded.
    Dominated,
    /// New fitness vector: inserted after evicting the members it dominates.
    Inserted { evicted: usize },
}

impl Offer {
    pub fn accepted(&self) -> bool {
        matches!(self, Offer::Swapped | Offer::Inserted { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    params: ProblemParams,
    mu_max: usize,
    members: Vec<Member>,
    /// `(n + 1) x (n + 1)` grid indexed by `(lo, tz)` holding member indices.
    grid: Vec<u32>,
    /// Largest `tz` among members with a given `lo`, or -1.
    max_tz_by_lo: Vec<i32>,
    counters: ImbalanceCounters,
    covered_feasible: usize,
    infeasible: usize,
}

impl Population {
    fn empty(params: ProblemParams) -> Self {
        let n = params.n();
        Self {
            params,
            mu_max: mu_max(params),
            members: Vec::new(),
            grid: vec![EMPTY; (n + 1) * (n + 1)],
            max_tz_by_lo: vec![-1; n + 1],
            counters: ImbalanceCounters::new(n),
            covered_feasible: 0,
            infeasible: 0,
        }
    }

    /// A population holding the single genome `g`.
    pub fn single(params: ProblemParams, g: Genome) -> Result<Self> {
        Self::from_genomes(params, vec![g])
    }

    /// Builds an archive from explicit members. The genomes must have pairwise
    /// distinct fitness vectors and must not dominate each other.
    pub fn from_genomes(params: ProblemParams, genomes: Vec<Genome>) -> Result<Self> {
        let mut pop = Self::empty(params);
        let mut members = Vec::with_capacity(genomes.len());
        for g in genomes {
            let fitness = evaluate(&g, params)?;
            members.push(Member { genome: g, fitness });
        }
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.fitness == b.fitness {
                    return Err(Error::InconsistentPopulation(format!(
                        "duplicate fitness ({}, {})",
                        a.fitness.lo, a.fitness.tz
                    )));
                }
                if dominates(&a.fitness, &b.fitness) || dominates(&b.fitness, &a.fitness) {
                    return Err(Error::InconsistentPopulation(format!(
                        "({}, {}) and ({}, {}) are comparable",
                        a.fitness.lo, a.fitness.tz, b.fitness.lo, b.fitness.tz
                    )));
                }
            }
        }
        for m in members {
            pop.push(m);
        }
        Ok(pop)
    }

    #[inline]
    fn cell(&self, lo: usize, tz: usize) -> usize {
        lo * (self.params.n() + 1) + tz
    }

    fn push(&mut self, m: Member) {
        let cell = self.cell(m.fitness.lo, m.fitness.tz);
        debug_assert_eq!(self.grid[cell], EMPTY);
        self.grid[cell] = self.members.len() as u32;
        let row = &mut self.max_tz_by_lo[m.fitness.lo];
        *row = (*row).max(m.fitness.tz as i32);
        if m.fitness.is_feasible() {
            self.covered_feasible += 1;
        } else {
            self.infeasible += 1;
        }
        self.counters.add(&m.genome);
        self.members.push(m);
    }

    fn remove_at(&mut self, idx: usize) -> Result<Member> {
        let m = self.members.swap_remove(idx);
        let cell = self.cell(m.fitness.lo, m.fitness.tz);
        self.grid[cell] = EMPTY;
        if idx < self.members.len() {
            let moved = self.members[idx].fitness;
            let moved_cell = self.cell(moved.lo, moved.tz);
            self.grid[moved_cell] = idx as u32;
        }
        if m.fitness.is_feasible() {
            self.covered_feasible -= 1;
        } else {
            self.infeasible -= 1;
        }
        self.counters.remove(&m.genome)?;
        self.refresh_row(m.fitness.lo);
        Ok(m)
    }

    fn refresh_row(&mut self, lo: usize) {
        let n = self.params.n();
        let start = lo * (n + 1);
        self.max_tz_by_lo[lo] = (0..=n)
            .rev()
            .find(|&tz| self.grid[start + tz] != EMPTY)
            .map_or(-1, |tz| tz as i32);
    }

    #[inline]
    pub fn params(&self) -> ProblemParams {
        self.params
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    #[inline]
    pub fn member(&self, idx: usize) -> &Member {
        &self.members[idx]
    }

    pub fn find(&self, lo: usize, tz: usize) -> Option<usize> {
        if lo > self.params.n() || tz > self.params.n() {
            return None;
        }
        match self.grid[self.cell(lo, tz)] {
            EMPTY => None,
            idx => Some(idx as usize),
        }
    }

    #[inline]
    pub fn counters(&self) -> &ImbalanceCounters {
        &self.counters
    }

    #[inline]
    pub fn total_imbalance(&self) -> u64 {
        self.counters.total_imbalance()
    }

    /// Number of distinct feasible fitness vectors present.
    #[inline]
    pub fn covered_feasible(&self) -> usize {
        self.covered_feasible
    }

    #[inline]
    pub fn mu_max(&self) -> usize {
        self.mu_max
    }

    /// Whether every feasible fitness vector is present.
    #[inline]
    pub fn is_covering(&self) -> bool {
        self.covered_feasible == self.mu_max
    }

    /// Whether some member dominates `f`. A fitness vector already present is
    /// not considered dominated.
    pub fn is_dominated(&self, f: &Fitness) -> bool {
        // Infeasible members have h = 0 and feasible ones never dominate each
        // other, so nothing dominates a feasible vector.
        if f.is_feasible() {
            return false;
        }
        // Any other member with lo' >= lo and tz' >= tz is strictly better in
        // lo or tz and no worse in h.
        let tz = f.tz as i32;
        self.max_tz_by_lo[f.lo..]
            .iter()
            .enumerate()
            .any(|(off, &max_tz)| if off == 0 { max_tz > tz } else { max_tz >= tz })
    }

    /// Algorithm-level acceptance of offspring `y` with fitness `f`.
    ///
    /// On `Swapped` the displaced genome is left in `y` so the caller can
    /// reuse the buffer.
    pub fn offer(&mut self, y: &mut Genome, f: Fitness, measure: MeasureKind) -> Result<Offer> {
        if let Some(idx) = self.find(f.lo, f.tz) {
            let incumbent = &self.members[idx].genome;
            let effect = self.counters.swap_effect(incumbent, y);
            if !effect.accept(measure) {
                return Ok(Offer::TieRejected);
            }
            self.counters.apply_swap(incumbent, y)?;
            std::mem::swap(&mut self.members[idx].genome, y);
            return Ok(Offer::Swapped);
        }
        if self.is_dominated(&f) {
            return Ok(Offer::Dominated);
        }
        let mut evicted = 0;
        if self.infeasible > 0 {
            // Only infeasible members can be dominated by anything.
            let mut doomed: Vec<usize> = self
                .members
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.fitness.is_feasible() && dominates(&f, &m.fitness))
                .map(|(i, _)| i)
                .collect();
            doomed.sort_unstable_by(|a, b| b.cmp(a));
            for idx in doomed {
                self.remove_at(idx)?;
                evicted += 1;
            }
        }
        self.push(Member {
            genome: y.clone(),
            fitness: f,
        });
        Ok(Offer::Inserted { evicted })
    }

    /// Full consistency check: counters against a recount, the grid against
    /// the member list, pairwise non-domination and the coverage tally.
    /// O(mu^2 + mu n); meant for tests and debugging.
    pub fn check_consistency(&self) -> Result<()> {
        let n = self.params.n();
        let fresh = ImbalanceCounters::from_genomes(n, self.members.iter().map(|m| &m.genome));
        if fresh != self.counters {
            return Err(Error::InconsistentPopulation("counters differ from recount".into()));
        }
        let mut feasible = 0;
        for (i, m) in self.members.iter().enumerate() {
            if evaluate(&m.genome, self.params)? != m.fitness {
                return Err(Error::InconsistentPopulation(format!("stale fitness at {i}")));
            }
            if self.find(m.fitness.lo, m.fitness.tz) != Some(i) {
                return Err(Error::InconsistentPopulation(format!("grid mismatch at {i}")));
            }
            feasible += m.fitness.is_feasible() as usize;
            for other in &self.members[i + 1..] {
                if dominates(&m.fitness, &other.fitness) || dominates(&other.fitness, &m.fitness) {
                    return Err(Error::InconsistentPopulation("members dominate each other".into()));
                }
            }
        }
        if self.grid.iter().filter(|&&c| c != EMPTY).count() != self.members.len() {
            return Err(Error::InconsistentPopulation("dangling grid entries".into()));
        }
        if feasible != self.covered_feasible || self.members.len() - feasible != self.infeasible {
            return Err(Error::InconsistentPopulation("coverage tally is off".into()));
        }
        for lo in 0..=n {
            let expect = self
                .members
                .iter()
                .filter(|m| m.fitness.lo == lo)
                .map(|m| m.fitness.tz as i32)
                .max()
                .unwrap_or(-1);
            if expect != self.max_tz_by_lo[lo] {
                return Err(Error::InconsistentPopulation(format!("row maximum off at lo = {lo}")));
            }
        }
        Ok(())
    }
}
