//! Closed forms for covering populations: their size, the per-position
//! classification of feasible fitness vectors into forced-one, forced-zero
//! and free, and the resulting minimum imbalances. Also builds canonical
//! genomes and whole covering populations with chosen free-bit fillings.
//!
//! A genome with fitness `(lo, tz)` and `lo + tz <= n - 2` has the layout
//!
//! ```text
//! 1^lo 0 [free bits at lo+2 ..= n-tz-1] 1 0^tz
//! ```
//!
//! and one with `lo + tz = n` is `1^lo 0^tz`.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lotz::{Genome, ProblemParams};
use crate::population::Population;
use crate::rng::rng_from_seed;

/// Number of feasible fitness vectors, which is also the size of every
/// covering population: `n k - (k - 2)(k + 1) / 2`.
pub fn mu_max(p: ProblemParams) -> usize {
    let (n, k) = (p.n(), p.k());
    let tri = (k - 2) * (k + 1);
    debug_assert_eq!(tri % 2, 0);
    n * k - tri / 2
}

/// Counts of feasible fitness vectors that force a 1, force a 0, or leave
/// free the bit at one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionClassification {
    pub m1: usize,
    pub m0: usize,
    pub m_free: usize,
    /// Side of the infeasible triangle cut from the free rectangle.
    pub a: usize,
}

impl PositionClassification {
    /// Smallest achievable `|n1 - n0|` given the forced counts, over all ways
    /// to fill the free bits.
    pub fn min_imbalance(&self, delta: usize) -> usize {
        self.m1.abs_diff(self.m0).saturating_sub(self.m_free).max(delta)
    }

    /// Largest achievable imbalance: every free bit sides with the majority.
    pub fn max_imbalance(&self) -> usize {
        self.m1.abs_diff(self.m0) + self.m_free
    }
}

#[inline]
fn half(x: usize) -> usize {
    debug_assert_eq!(x % 2, 0, "odd quadratic term");
    x / 2
}

/// Closed-form classification of position `i` (1-indexed).
pub fn classify_position(i: usize, p: ProblemParams) -> Result<PositionClassification> {
    let (n, k) = (p.n(), p.k());
    if i == 0 || i > n {
        return Err(Error::PositionOutOfRange { pos: i, n });
    }
    let (ni, ki) = (n as i64, k as i64);
    let ii = i as i64;

    let mut m1 = half((n - i + 1) * (n - i)) + i.min(k);
    if ii < ni - ki {
        let d = n - k - i;
        m1 -= half(d * (d + 1));
    }

    let mut m0 = half(i * (i - 1)) + (n - i + 1).min(k);
    if i > k + 1 {
        let d = i - k - 1;
        m0 -= half(d * (d + 1));
    }

    let a = [ki - 3, ii - 2, ni - ii - 1, ni - ki]
        .into_iter()
        .min()
        .unwrap()
        .max(0) as usize;
    let side_lo = (k - 2).min(i - 1);
    let side_tz = (k - 2).min(n - i);
    let m_free = side_lo * side_tz - half(a * (a + 1));

    Ok(PositionClassification { m1, m0, m_free, a })
}

/// Per-position minimum imbalances of a covering population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalDiversity {
    pub b_opt: Vec<u32>,
    pub delta: u32,
    pub opt_total: u64,
    pub mu_max: usize,
}

pub fn optimal_diversity(p: ProblemParams) -> OptimalDiversity {
    let mu = mu_max(p);
    let delta = mu % 2;
    let b_opt: Vec<u32> = (1..=p.n())
        .map(|i| {
            let c = classify_position(i, p).expect("position in range");
            c.min_imbalance(delta) as u32
        })
        .collect();
    let opt_total = b_opt.iter().map(|&b| b as u64).sum();
    OptimalDiversity {
        b_opt,
        delta: delta as u32,
        opt_total,
        mu_max: mu,
    }
}

/// Feasible `(lo, tz)` pairs in ascending `(lo, tz)` order.
pub fn feasible_pairs(p: ProblemParams) -> Vec<(usize, usize)> {
    let n = p.n();
    let mut out = Vec::with_capacity(mu_max(p));
    for lo in 0..=n {
        for tz in 0..=n - lo {
            let u = lo + tz;
            if p.is_feasible_sum(u) && u + 1 != n {
                out.push((lo, tz));
            }
        }
    }
    out
}

/// Largest `n` for which pair enumeration is allowed.
pub const PAIR_ENUMERATION_LIMIT: usize = 20;
/// Largest `n` for which genome enumeration is allowed.
pub const GENOME_ENUMERATION_LIMIT: usize = 14;

/// All feasible `(lo, tz)` pairs for small `n`.
pub fn brute_force_feasible_set(p: ProblemParams) -> Result<BTreeSet<(usize, usize)>> {
    if p.n() > PAIR_ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            n: p.n(),
            limit: PAIR_ENUMERATION_LIMIT,
        });
    }
    Ok(feasible_pairs(p).into_iter().collect())
}

/// What a fitness vector implies for one bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRule {
    One,
    Zero,
    Free,
}

/// The bit at `pos` of any genome with fitness `(lo, tz)`.
pub fn bit_rule(lo: usize, tz: usize, pos: usize, n: usize) -> BitRule {
    debug_assert!(lo + tz <= n && lo + tz + 1 != n);
    if pos <= lo {
        BitRule::One
    } else if lo + tz == n || pos == lo + 1 || pos > n - tz {
        BitRule::Zero
    } else if pos == n - tz {
        BitRule::One
    } else {
        BitRule::Free
    }
}

/// Number of free bits of a genome with fitness `(lo, tz)`.
pub fn free_len(lo: usize, tz: usize, n: usize) -> usize {
    n.saturating_sub(lo + tz + 2)
}

/// The genome with fitness `(lo, tz)` whose free region is `free_bits`.
pub fn canonical_genome(
    (lo, tz): (usize, usize),
    p: ProblemParams,
    free_bits: &[bool],
) -> Result<Genome> {
    let n = p.n();
    if lo + tz > n || lo + tz + 1 == n {
        return Err(Error::NonexistentFitness { lo, tz, n });
    }
    if !p.is_feasible_sum(lo + tz) {
        return Err(Error::InfeasibleFitness { lo, tz, n, k: p.k() });
    }
    let expected = free_len(lo, tz, n);
    if free_bits.len() != expected {
        return Err(Error::FreeBitsLength {
            expected,
            actual: free_bits.len(),
        });
    }
    let mut g = Genome::zeros(n);
    for pos in 1..=lo {
        g.set(pos, true);
    }
    if lo + tz < n {
        g.set(n - tz, true);
        for (off, &b) in free_bits.iter().enumerate() {
            g.set(lo + 2 + off, b);
        }
    }
    Ok(g)
}

/// How the free bits of a covering population are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    AllZero,
    AllOne,
    /// Minimum imbalance at every position.
    BestDiversity,
    /// Maximum imbalance at every position.
    WorstDiversity,
    /// Independent uniform free bits.
    Random(u64),
}

/// One genome per feasible fitness vector, with free bits chosen by `fill`.
pub fn build_covering_population(p: ProblemParams, fill: Fill) -> Population {
    let n = p.n();
    let pairs = feasible_pairs(p);
    let mut genomes: Vec<Genome> = pairs
        .iter()
        .map(|&(lo, tz)| canonical_genome((lo, tz), p, &vec![false; free_len(lo, tz, n)]).unwrap())
        .collect();

    match fill {
        Fill::AllZero => {}
        Fill::AllOne => set_free(&pairs, &mut genomes, n, |_, _, _| true),
        Fill::Random(seed) => {
            let mut rng = rng_from_seed(seed);
            set_free(&pairs, &mut genomes, n, |_, _, _| rng.random::<bool>());
        }
        Fill::WorstDiversity | Fill::BestDiversity => {
            for pos in 1..=n {
                let (mut ones, mut zeros) = (0usize, 0usize);
                let mut free: Vec<usize> = Vec::new();
                for (idx, &(lo, tz)) in pairs.iter().enumerate() {
                    match bit_rule(lo, tz, pos, n) {
                        BitRule::One => ones += 1,
                        BitRule::Zero => zeros += 1,
                        BitRule::Free => free.push(idx),
                    }
                }
                let m = free.len();
                let set_ones = if fill == Fill::WorstDiversity {
                    // Ties fill with 1; either choice is maximal.
                    if ones >= zeros {
                        m
                    } else {
                        0
                    }
                } else {
                    let target = (zeros + m) as i64 - ones as i64;
                    target.div_euclid(2).clamp(0, m as i64) as usize
                };
                // `pairs` is in (lo, tz) order, so the first members get the 1s.
                for (rank, &idx) in free.iter().enumerate() {
                    genomes[idx].set(pos, rank < set_ones);
                }
            }
        }
    }
    Population::from_genomes(p, genomes).expect("covering population is consistent")
}

fn set_free<F>(pairs: &[(usize, usize)], genomes: &mut [Genome], n: usize, mut bit: F)
where
    F: FnMut(usize, usize, usize) -> bool,
{
    for (g, &(lo, tz)) in genomes.iter_mut().zip(pairs) {
        for pos in lo + 2..(n - tz).max(lo + 2) {
            let b = bit(lo, tz, pos);
            g.set(pos, b);
        }
    }
}

/// Exhaustive oracles over all genomes of a small size.
pub mod brute {
    use std::collections::{BTreeMap, BTreeSet};

    use super::{PositionClassification, GENOME_ENUMERATION_LIMIT};
    use crate::error::{Error, Result};
    use crate::lotz::{leading_ones, trailing_zeros, Genome, ProblemParams};

    /// For every realizable `(lo, tz)`: per-position AND and OR over all
    /// genomes with that fitness, packed as `u64` masks (bit `i - 1` for
    /// position `i`).
    pub fn realized_masks(n: usize) -> Result<BTreeMap<(usize, usize), (u64, u64)>> {
        if n > GENOME_ENUMERATION_LIMIT {
            return Err(Error::EnumerationGuard {
                n,
                limit: GENOME_ENUMERATION_LIMIT,
            });
        }
        let mut out: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
        for bits in 0u64..(1 << n) {
            let g = Genome::from_bits((0..n).map(|i| (bits >> i) & 1 == 1));
            let key = (leading_ones(&g), trailing_zeros(&g));
            let e = out.entry(key).or_insert((!0, 0));
            e.0 &= bits;
            e.1 |= bits;
        }
        Ok(out)
    }

    /// Feasible pairs realized by at least one genome.
    pub fn feasible_set_by_genomes(p: ProblemParams) -> Result<BTreeSet<(usize, usize)>> {
        Ok(realized_masks(p.n())?
            .into_keys()
            .filter(|&(lo, tz)| p.is_feasible_sum(lo + tz))
            .collect())
    }

    /// Classification of every position obtained by enumerating genomes.
    /// `a` is left at zero: it has no meaning for the enumeration.
    pub fn classify_by_genomes(p: ProblemParams) -> Result<Vec<PositionClassification>> {
        let masks = realized_masks(p.n())?;
        let mut out = vec![
            PositionClassification {
                m1: 0,
                m0: 0,
                m_free: 0,
                a: 0
            };
            p.n()
        ];
        for (&(lo, tz), &(and, or)) in &masks {
            if !p.is_feasible_sum(lo + tz) {
                continue;
            }
            for (i, c) in out.iter_mut().enumerate() {
                let (always, ever) = ((and >> i) & 1 == 1, (or >> i) & 1 == 1);
                match (always, ever) {
                    (true, _) => c.m1 += 1,
                    (false, false) => c.m0 += 1,
                    (false, true) => c.m_free += 1,
                }
            }
        }
        Ok(out)
    }

    /// Minimum of `|n1 - n0|` over every count `j` of free bits set to 1.
    pub fn min_imbalance_by_search(c: &PositionClassification) -> usize {
        (0..=c.m_free)
            .map(|j| (c.m1 + j).abs_diff(c.m0 + c.m_free - j))
            .min()
            .unwrap()
    }

    /// Maximum of `|n1 - n0|` over every count `j` of free bits set to 1.
    pub fn max_imbalance_by_search(c: &PositionClassification) -> usize {
        (0..=c.m_free)
            .map(|j| (c.m1 + j).abs_diff(c.m0 + c.m_free - j))
            .max()
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::potential_phi;
    use crate::lotz::evaluate;

    fn p(n: usize, k: usize) -> ProblemParams {
        ProblemParams::new(n, k).unwrap()
    }

    /// Classification straight from the membership rules of each feasible
    /// pair, independent of the closed forms.
    fn classify_by_pairs(i: usize, params: ProblemParams) -> (usize, usize, usize) {
        let n = params.n();
        let (mut m1, mut m0, mut mf) = (0, 0, 0);
        for (lo, tz) in feasible_pairs(params) {
            let in_m1 = lo >= i || (tz == n - i && lo + 1 < i);
            let in_m0 = lo + 1 == i || tz > n - i;
            let in_free = lo + 1 < i && tz < n - i;
            assert_eq!(in_m1 as u8 + in_m0 as u8 + in_free as u8, 1);
            m1 += in_m1 as usize;
            m0 += in_m0 as usize;
            mf += in_free as usize;
        }
        (m1, m0, mf)
    }

    #[test]
    fn mu_max_examples() {
        assert_eq!(mu_max(p(8, 2)), 16);
        assert_eq!(mu_max(p(8, 8)), 37);
        // Enumeration oracle for the same two cases.
        assert_eq!(brute::feasible_set_by_genomes(p(8, 2)).unwrap().len(), 16);
        assert_eq!(brute::feasible_set_by_genomes(p(8, 8)).unwrap().len(), 37);
        // n odd, k = 1 mod 4 gives an even size.
        for (n, k) in [(9, 5), (11, 9), (13, 5)] {
            assert_eq!(mu_max(p(n, k)) % 2, 0);
        }
    }

    #[test]
    fn k_two_has_no_free_bits() {
        for n in 2..40 {
            for i in 1..=n {
                assert_eq!(classify_position(i, p(n, 2)).unwrap().m_free, 0);
            }
        }
    }

    #[test]
    fn classification_sums_to_mu_max() {
        for n in 2..=64 {
            for k in 2..=n {
                let params = p(n, k);
                let mu = mu_max(params);
                for i in 1..=n {
                    let c = classify_position(i, params).unwrap();
                    assert_eq!(c.m1 + c.m0 + c.m_free, mu, "n={n} k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn classification_matches_membership_rules() {
        for n in 2..=24 {
            for k in 2..=n {
                for i in 1..=n {
                    let c = classify_position(i, p(n, k)).unwrap();
                    assert_eq!((c.m1, c.m0, c.m_free), classify_by_pairs(i, p(n, k)));
                }
            }
        }
    }

    #[test]
    fn n8_k4_matches_genome_enumeration() {
        let params = p(8, 4);
        let brute = brute::classify_by_genomes(params).unwrap();
        for i in 1..=8 {
            let c = classify_position(i, params).unwrap();
            assert_eq!((c.m1, c.m0, c.m_free), (brute[i - 1].m1, brute[i - 1].m0, brute[i - 1].m_free));
        }
    }

    #[test]
    fn b_opt_n8_k4_matches_search() {
        let params = p(8, 4);
        let opt = optimal_diversity(params);
        // mu_max = 32 - 5 = 27, odd.
        assert_eq!(opt.mu_max, 27);
        assert_eq!(opt.delta, 1);
        for i in 1..=8 {
            let c = classify_position(i, params).unwrap();
            assert_eq!(opt.b_opt[i - 1] as usize, brute::min_imbalance_by_search(&c));
        }
        // Frozen from the search oracle above.
        assert_eq!(opt.b_opt, vec![19, 13, 7, 1, 1, 7, 13, 19]);
        assert_eq!(opt.opt_total, 80);
    }

    #[test]
    fn b_opt_is_mirror_symmetric() {
        for n in 2..=64 {
            for k in 2..=n {
                let opt = optimal_diversity(p(n, k));
                for i in 1..=n {
                    assert_eq!(opt.b_opt[i - 1], opt.b_opt[n - i]);
                }
            }
        }
    }

    #[test]
    fn b_opt_parity_and_floor() {
        for n in 2..=40 {
            for k in 2..=n {
                let opt = optimal_diversity(p(n, k));
                for &b in &opt.b_opt {
                    assert!(b >= opt.delta);
                    assert_eq!(b % 2, opt.mu_max as u32 % 2);
                }
            }
        }
    }

    #[test]
    fn canonical_genome_examples() {
        let g = canonical_genome((8, 0), p(8, 2), &[]).unwrap();
        assert_eq!(g, Genome::ones(8));
        let g = canonical_genome((2, 4), p(8, 4), &[]).unwrap();
        assert_eq!(g.to_string(), "11010000");
        let g = canonical_genome((2, 2), p(8, 4), &[true, false]).unwrap();
        assert_eq!(g.to_string(), "11010100");
        let f = evaluate(&g, p(8, 4)).unwrap();
        assert_eq!((f.lo, f.tz), (2, 2));
    }

    #[test]
    fn canonical_genome_errors() {
        assert!(matches!(
            canonical_genome((3, 4), p(8, 4), &[]),
            Err(Error::NonexistentFitness { .. })
        ));
        assert!(matches!(
            canonical_genome((1, 1), p(8, 4), &[false; 4]),
            Err(Error::InfeasibleFitness { .. })
        ));
        assert!(matches!(
            canonical_genome((2, 2), p(8, 4), &[true]),
            Err(Error::FreeBitsLength { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn canonical_genomes_round_trip() {
        for n in 2..=16 {
            for k in 2..=n {
                let params = p(n, k);
                for (lo, tz) in feasible_pairs(params) {
                    let free: Vec<bool> = (0..free_len(lo, tz, n)).map(|j| j % 3 == 1).collect();
                    let g = canonical_genome((lo, tz), params, &free).unwrap();
                    let f = evaluate(&g, params).unwrap();
                    assert_eq!((f.lo, f.tz), (lo, tz));
                    assert!(f.is_feasible());
                }
            }
        }
    }

    #[test]
    fn feasible_set_small_case() {
        let params = p(4, 2);
        let set = brute_force_feasible_set(params).unwrap();
        let expected: BTreeSet<_> =
            [(0, 2), (1, 1), (2, 0), (0, 4), (1, 3), (2, 2), (3, 1), (4, 0)].into();
        assert_eq!(set, expected);
        assert_eq!(set, brute::feasible_set_by_genomes(params).unwrap());
        assert_eq!(set.len(), mu_max(params));
        assert!(set.iter().all(|&(lo, tz)| lo + tz != 3));
        assert!(brute_force_feasible_set(p(21, 4)).is_err());
    }

    #[test]
    fn best_population_hits_targets() {
        for (n, k) in [(8, 2), (8, 4), (9, 5), (16, 4), (16, 8), (17, 17), (33, 5)] {
            let params = p(n, k);
            let pop = build_covering_population(params, Fill::BestDiversity);
            let opt = optimal_diversity(params);
            assert_eq!(pop.len(), opt.mu_max);
            assert!(pop.is_covering());
            assert_eq!(pop.counters().imbalances(), opt.b_opt);
            assert_eq!(pop.total_imbalance(), opt.opt_total);
            assert_eq!(potential_phi(pop.counters(), &opt.b_opt).unwrap(), 0);
        }
    }

    #[test]
    fn worst_equals_best_when_k_is_two() {
        for n in [4, 8, 16, 31] {
            let params = p(n, 2);
            let best = build_covering_population(params, Fill::BestDiversity);
            let worst = build_covering_population(params, Fill::WorstDiversity);
            assert_eq!(best.members(), worst.members());
        }
    }

    #[test]
    fn worst_population_n8_k4_maximizes_every_position() {
        let params = p(8, 4);
        let pop = build_covering_population(params, Fill::WorstDiversity);
        let mut expected_total = 0;
        for i in 1..=8 {
            let c = classify_position(i, params).unwrap();
            let max = brute::max_imbalance_by_search(&c);
            assert_eq!(pop.counters().imbalance_at(i) as usize, max);
            expected_total += max as u64;
        }
        assert_eq!(pop.total_imbalance(), expected_total);
        // Frozen from the search oracle: b = (19, 17, 13, 7, 7, 13, 17, 19).
        assert_eq!(expected_total, 112);
        let opt = optimal_diversity(params);
        assert_eq!(potential_phi(pop.counters(), &opt.b_opt).unwrap(), 32);
    }

    #[test]
    fn random_populations_respect_wrong_bit_bound() {
        for (n, k) in [(8, 4), (10, 10), (12, 5), (16, 6)] {
            let params = p(n, k);
            let opt = optimal_diversity(params);
            for seed in 0..20 {
                let pop = build_covering_population(params, Fill::Random(seed));
                pop.check_consistency().unwrap();
                let phi = potential_phi(pop.counters(), &opt.b_opt).unwrap();
                assert_eq!(phi % 2, 0);
                for pos in 1..=n {
                    let n1 = pop.counters().ones_at(pos) as usize;
                    let n0 = pop.len() - n1;
                    let b = pop.counters().imbalance_at(pos);
                    let majority = if n1 > n0 { Some(true) } else if n0 > n1 { Some(false) } else { None };
                    let wrong = match majority {
                        None => 0,
                        Some(v) => pop
                            .members()
                            .iter()
                            .filter(|m| {
                                bit_rule(m.fitness.lo, m.fitness.tz, pos, n) == BitRule::Free
                                    && m.genome.get(pos) == v
                            })
                            .count(),
                    };
                    assert!(2 * wrong >= (b - opt.b_opt[pos - 1]) as usize);
                }
            }
        }
    }
}
