//! Archive updates against a naive model that recounts everything from the
//! member list on every offer.

use edo_core::diversity::{compare_sorted, DiversitySnapshot, ImbalanceCounters};
use edo_core::evolve::mutate;
use edo_core::lotz::{dominates, evaluate, Genome};
use edo_core::population::Offer;
use edo_core::rng::rng_from_seed;
use edo_core::{MeasureKind, Population, ProblemParams};
use rand::Rng;

fn snapshot(n: usize, genomes: &[Genome]) -> DiversitySnapshot {
    ImbalanceCounters::from_genomes(n, genomes.iter()).snapshot()
}

fn naive_accept(measure: MeasureKind, n: usize, before: &[Genome], after: &[Genome]) -> bool {
    let (b, a) = (snapshot(n, before), snapshot(n, after));
    match measure {
        MeasureKind::TotalImbalance => a.total <= b.total,
        MeasureKind::SortedVector => compare_sorted(&a, &b).unwrap().is_le(),
        MeasureKind::NoDiversity => true,
    }
}

fn check(n: usize, k: usize, measure: MeasureKind, seed: u64, steps: usize) {
    let params = ProblemParams::new(n, k).unwrap();
    let mut rng = rng_from_seed(seed);
    let start = Genome::from_bits((0..n).map(|_| rng.random::<bool>()));
    let mut pop = Population::single(params, start).unwrap();
    for _ in 0..steps {
        let members: Vec<Genome> = pop.members().iter().map(|m| m.genome.clone()).collect();
        let parent = &members[rng.random_range(0..members.len())];
        let child = mutate(parent, &mut rng);
        let f = evaluate(&child, params).unwrap();

        let fits: Vec<_> = members.iter().map(|g| evaluate(g, params).unwrap()).collect();
        let expected: Vec<Genome> = if let Some(j) = fits.iter().position(|m| m.key() == f.key()) {
            let mut swapped = members.clone();
            swapped[j] = child.clone();
            if naive_accept(measure, n, &members, &swapped) {
                swapped
            } else {
                members.clone()
            }
        } else if fits.iter().any(|m| dominates(m, &f)) {
            members.clone()
        } else {
            let mut kept: Vec<Genome> = members
                .iter()
                .zip(&fits)
                .filter(|(_, m)| !dominates(&f, m))
                .map(|(g, _)| g.clone())
                .collect();
            kept.push(child.clone());
            kept
        };

        let mut y = child.clone();
        let outcome = pop.offer(&mut y, f, measure).unwrap();
        pop.check_consistency().unwrap();

        let mut got: Vec<String> = pop.members().iter().map(|m| m.genome.to_string()).collect();
        let mut want: Vec<String> = expected.iter().map(Genome::to_string).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want, "n={n} k={k} {measure} seed={seed}: offer {child} gave {outcome:?}");
        let counters = ImbalanceCounters::from_genomes(n, expected.iter());
        assert_eq!(pop.counters().imbalances(), counters.imbalances());
        assert_eq!(pop.total_imbalance(), counters.total_imbalance());
        if let Offer::Inserted { evicted } = outcome {
            assert_eq!(members.len() + 1 - evicted, pop.len());
        }
    }
}

#[test]
fn archive_matches_naive_model() {
    for (n, k) in [(4, 2), (5, 3), (6, 6), (7, 2), (8, 4), (9, 5), (10, 3)] {
        for measure in [MeasureKind::TotalImbalance, MeasureKind::SortedVector, MeasureKind::NoDiversity] {
            for seed in 0..4 {
                check(n, k, measure, seed, 3000);
            }
        }
    }
}

#[test]
fn archive_matches_naive_model_across_word_boundary() {
    check(70, 5, MeasureKind::SortedVector, 11, 4000);
    check(65, 65, MeasureKind::TotalImbalance, 12, 4000);
}
