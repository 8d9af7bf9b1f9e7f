//! Per-position imbalance bookkeeping and the two imbalance-based diversity
//! measures.
//!
//! For a population of size `mu`, `n1(i)` counts members with a 1-bit at
//! position `i`, and the imbalance is `b(i) = |2 n1(i) - mu|`. The total
//! imbalance is `sum_i b(i)`; the sorted imbalances vector is the multiset of
//! `b(i)` sorted non-increasingly and compared lexicographically. Smaller is
//! more diverse for both.
//!
//! The sorted vector is stored as a histogram `count[v]`, and comparisons
//! walk it from the largest imbalance downward.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lotz::Genome;

/// Which diversity measure breaks fitness ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    TotalImbalance,
    SortedVector,
    /// Plain GSEMO: the offspring always replaces the incumbent.
    NoDiversity,
}

impl MeasureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::TotalImbalance => "total",
            MeasureKind::SortedVector => "sorted",
            MeasureKind::NoDiversity => "none",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(MeasureKind::TotalImbalance),
            "sorted" => Ok(MeasureKind::SortedVector),
            "none" => Ok(MeasureKind::NoDiversity),
            other => Err(Error::Config(format!("unknown measure {other:?}"))),
        }
    }
}

#[inline]
fn imbalance(n1: u32, mu: u32) -> u32 {
    (2 * n1).abs_diff(mu)
}

/// One-counts per position plus the population size, with the total
/// imbalance kept up to date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalanceCounters {
    n1: Vec<u32>,
    pop_size: u32,
    total: u64,
}

impl ImbalanceCounters {
    /// Counters for an empty population over `n` positions.
    pub fn new(n: usize) -> Self {
        Self {
            n1: vec![0; n],
            pop_size: 0,
            total: 0,
        }
    }

    /// Counts `genomes` from scratch.
    pub fn from_genomes<'a, I>(n: usize, genomes: I) -> Self
    where
        I: IntoIterator<Item = &'a Genome>,
    {
        let mut c = Self::new(n);
        for g in genomes {
            debug_assert_eq!(g.len(), n);
            for (i, slot) in c.n1.iter_mut().enumerate() {
                *slot += g.get(i + 1) as u32;
            }
            c.pop_size += 1;
        }
        c.total = c.recount_total();
        c
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n1.len()
    }

    #[inline]
    pub fn pop_size(&self) -> u32 {
        self.pop_size
    }

    /// `n1(pos)` for 1-indexed `pos`.
    #[inline]
    pub fn ones_at(&self, pos: usize) -> u32 {
        self.n1[pos - 1]
    }

    pub fn ones(&self) -> &[u32] {
        &self.n1
    }

    /// `b(pos)` for 1-indexed `pos`.
    #[inline]
    pub fn imbalance_at(&self, pos: usize) -> u32 {
        imbalance(self.n1[pos - 1], self.pop_size)
    }

    pub fn imbalances(&self) -> Vec<u32> {
        self.n1.iter().map(|&c| imbalance(c, self.pop_size)).collect()
    }

    /// `sum_i b(i)`, maintained incrementally.
    #[inline]
    pub fn total_imbalance(&self) -> u64 {
        self.total
    }

    fn recount_total(&self) -> u64 {
        self.n1
            .iter()
            .map(|&c| imbalance(c, self.pop_size) as u64)
            .sum()
    }

    /// Adds a member; every imbalance changes parity, so this is O(n).
    pub fn add(&mut self, g: &Genome) {
        debug_assert_eq!(g.len(), self.n());
        for (i, slot) in self.n1.iter_mut().enumerate() {
            *slot += g.get(i + 1) as u32;
        }
        self.pop_size += 1;
        self.total = self.recount_total();
    }

    /// Removes a counted member.
    pub fn remove(&mut self, g: &Genome) -> Result<()> {
        if self.pop_size == 0 {
            return Err(Error::InconsistentPopulation("remove from empty counters".into()));
        }
        for (i, slot) in self.n1.iter_mut().enumerate() {
            if g.get(i + 1) {
                *slot = slot.checked_sub(1).ok_or_else(|| {
                    Error::InconsistentPopulation(format!("n1 underflow at position {}", i + 1))
                })?;
            }
        }
        self.pop_size -= 1;
        self.total = self.recount_total();
        Ok(())
    }

    /// Replaces `removed` by `added`; only positions where they differ are
    /// touched and the population size is unchanged.
    pub fn apply_swap(&mut self, removed: &Genome, added: &Genome) -> Result<()> {
        let mu = self.pop_size;
        for pos in removed.diff_positions(added) {
            let slot = &mut self.n1[pos - 1];
            let old_b = imbalance(*slot, mu) as u64;
            if added.get(pos) {
                if *slot >= mu {
                    return Err(Error::InconsistentPopulation(format!(
                        "n1 overflow at position {pos}"
                    )));
                }
                *slot += 1;
            } else {
                *slot = slot.checked_sub(1).ok_or_else(|| {
                    Error::InconsistentPopulation(format!("n1 underflow at position {pos}"))
                })?;
            }
            let new_b = imbalance(*slot, mu) as u64;
            self.total = self.total - old_b + new_b;
        }
        Ok(())
    }

    /// Effect of replacing `removed` by `added`, without applying it.
    ///
    /// Only the positions where the genomes differ are inspected. The sorted
    /// ordering is found by patching a local histogram delta at the old and
    /// new imbalance values and locating the largest value whose count
    /// changed.
    pub fn swap_effect(&self, removed: &Genome, added: &Genome) -> SwapEffect {
        let mu = self.pop_size;
        let mut total_delta: i64 = 0;
        // (imbalance value, net count change); a swap rarely touches more
        // than a handful of positions.
        let mut patch: Vec<(u32, i32)> = Vec::new();
        let mut bump = |v: u32, d: i32| match patch.iter_mut().find(|(val, _)| *val == v) {
            Some(e) => e.1 += d,
            None => patch.push((v, d)),
        };
        for pos in removed.diff_positions(added) {
            let c = self.n1[pos - 1];
            let after = if added.get(pos) { c + 1 } else { c - 1 };
            let old_b = imbalance(c, mu);
            let new_b = imbalance(after, mu);
            total_delta += new_b as i64 - old_b as i64;
            bump(old_b, -1);
            bump(new_b, 1);
        }
        let sorted = patch
            .iter()
            .filter(|(_, d)| *d != 0)
            .max_by_key(|(v, _)| *v)
            .map_or(Ordering::Equal, |(_, d)| d.cmp(&0));
        SwapEffect {
            total_delta,
            sorted,
        }
    }

    pub fn snapshot(&self) -> DiversitySnapshot {
        let mut hist = vec![0u32; self.pop_size as usize + 1];
        for &c in &self.n1 {
            hist[imbalance(c, self.pop_size) as usize] += 1;
        }
        DiversitySnapshot {
            n: self.n(),
            pop_size: self.pop_size,
            total: self.total,
            hist,
        }
    }
}

/// How a candidate replacement changes diversity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapEffect {
    /// New total imbalance minus old.
    pub total_delta: i64,
    /// Ordering of the new sorted vector relative to the old one.
    pub sorted: Ordering,
}

impl SwapEffect {
    /// Tie-break decision for `kind`; equality accepts.
    pub fn accept(&self, kind: MeasureKind) -> bool {
        match kind {
            MeasureKind::NoDiversity => true,
            MeasureKind::TotalImbalance => self.total_delta <= 0,
            MeasureKind::SortedVector => self.sorted != Ordering::Greater,
        }
    }
}

/// Total imbalance plus the imbalance histogram of one population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiversitySnapshot {
    pub n: usize,
    pub pop_size: u32,
    pub total: u64,
    /// `hist[v]` = number of positions with imbalance `v`, for `v` in `0..=pop_size`.
    pub hist: Vec<u32>,
}

impl DiversitySnapshot {
    /// Builds a snapshot from explicit imbalance values.
    pub fn from_imbalances(pop_size: u32, imbalances: &[u32]) -> Self {
        let mut hist = vec![0u32; pop_size as usize + 1];
        for &b in imbalances {
            hist[b as usize] += 1;
        }
        Self {
            n: imbalances.len(),
            pop_size,
            total: imbalances.iter().map(|&b| b as u64).sum(),
            hist,
        }
    }

    /// The descending sorted imbalances vector, materialized.
    pub fn sorted_desc(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n);
        for (v, &c) in self.hist.iter().enumerate().rev() {
            out.extend(std::iter::repeat_n(v as u32, c as usize));
        }
        out
    }
}

pub fn total_imbalance(c: &ImbalanceCounters) -> u64 {
    c.total_imbalance()
}

/// Lexicographic order of the descending-sorted imbalance vectors of `a`
/// and `b`. Both must describe populations of the same size over the same
/// number of positions.
pub fn compare_sorted(a: &DiversitySnapshot, b: &DiversitySnapshot) -> Result<Ordering> {
    if a.n != b.n {
        return Err(Error::SnapshotMismatch(format!("n differs: {} vs {}", a.n, b.n)));
    }
    if a.pop_size != b.pop_size {
        return Err(Error::SnapshotMismatch(format!(
            "population sizes differ: {} vs {}",
            a.pop_size, b.pop_size
        )));
    }
    for (ca, cb) in a.hist.iter().rev().zip(b.hist.iter().rev()) {
        match ca.cmp(cb) {
            Ordering::Equal => continue,
            ord => return Ok(ord),
        }
    }
    Ok(Ordering::Equal)
}

/// Whether the population `after` (= P with y swapped in for w) is accepted
/// over `before` under `kind`. Ties accept.
pub fn tie_break_accept(
    kind: MeasureKind,
    before: &DiversitySnapshot,
    after: &DiversitySnapshot,
) -> Result<bool> {
    match kind {
        MeasureKind::NoDiversity => Ok(true),
        MeasureKind::TotalImbalance => Ok(after.total <= before.total),
        MeasureKind::SortedVector => Ok(compare_sorted(after, before)? != Ordering::Greater),
    }
}

/// `sum_i (b(i) - b_opt(i))`. Fails if any position sits below its target,
/// which can only happen through a bookkeeping or oracle bug on a covering
/// population.
pub fn potential_phi(c: &ImbalanceCounters, targets: &[u32]) -> Result<u64> {
    if targets.len() != c.n() {
        return Err(Error::LengthMismatch {
            expected: c.n(),
            actual: targets.len(),
        });
    }
    let mut phi = 0u64;
    for (i, &t) in targets.iter().enumerate() {
        let b = c.imbalance_at(i + 1);
        if b < t {
            return Err(Error::BelowOptimum {
                pos: i + 1,
                actual: b,
                target: t,
            });
        }
        phi += (b - t) as u64;
    }
    Ok(phi)
}
