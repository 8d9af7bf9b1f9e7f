//! Brute-force cross-checks of the closed forms on small problem sizes.
//!
//! The closed forms under test are passed in as function pointers so that a
//! deliberately broken formula can be shown to fail.

use crate::diversity::ImbalanceCounters;
use crate::error::{Error, Result};
use crate::lotz::{dominates, Fitness, ProblemParams};
use crate::oracle::{self, brute, build_covering_population, Fill, PositionClassification};

/// Largest `n` accepted by [`verify`].
pub const VERIFY_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct ClosedForms {
    pub mu_max: fn(ProblemParams) -> usize,
    pub classify: fn(usize, ProblemParams) -> Result<PositionClassification>,
}

impl Default for ClosedForms {
    fn default() -> Self {
        Self {
            mu_max: oracle::mu_max,
            classify: oracle::classify_position,
        }
    }
}

/// Expected parity of the covering population size, read off a lookup
/// table indexed by the parity of `n` and `k mod 4`.
pub fn parity_table(n: usize, k: usize) -> usize {
    const ODD_N: [usize; 4] = [1, 0, 0, 1];
    const EVEN_N: [usize; 4] = [1, 1, 0, 0];
    if n % 2 == 1 {
        ODD_N[k % 4]
    } else {
        EVEN_N[k % 4]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// First few failures, for display.
    pub failures: Vec<String>,
    pub failure_count: usize,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub max_n: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

/// Runs every check for `2 <= k <= n <= max_n`.
pub fn verify(max_n: usize, forms: ClosedForms) -> Result<VerifyReport> {
    if !(2..=VERIFY_LIMIT).contains(&max_n) {
        return Err(Error::Config(format!(
            "max n must lie in 2..={VERIFY_LIMIT}, got {max_n}"
        )));
    }
    let mut size = CheckOutcome::new("mu_max matches enumeration");
    let mut classes = CheckOutcome::new("position classification matches enumeration");
    let mut minimum = CheckOutcome::new("optimal imbalance matches exhaustive search");
    let mut attain = CheckOutcome::new("best covering population attains the optimum");
    let mut parity = CheckOutcome::new("parity of mu_max matches table");
    let mut gap = CheckOutcome::new("no genome has lo + tz = n - 1");
    let mut antichain = CheckOutcome::new("feasible vectors are mutually non-dominating");

    for n in 2..=max_n {
        let masks = brute::realized_masks(n)?;
        gap.check(masks.keys().all(|&(lo, tz)| lo + tz + 1 != n), || {
            format!("n={n}: some genome has lo + tz = n - 1")
        });
        for k in 2..=n {
            let p = ProblemParams::new(n, k)?;
            let feasible = brute::feasible_set_by_genomes(p)?;
            let mu = (forms.mu_max)(p);
            size.check(mu == feasible.len(), || {
                format!("n={n} k={k}: formula {mu}, enumeration {}", feasible.len())
            });
            parity.check(mu % 2 == parity_table(n, k), || {
                format!("n={n} k={k}: mu_max {mu} parity vs table {}", parity_table(n, k))
            });

            let fits: Vec<Fitness> = feasible.iter().map(|&(lo, tz)| Fitness::from_pair(lo, tz, p)).collect();
            let comparable = fits
                .iter()
                .enumerate()
                .any(|(i, a)| fits.iter().skip(i + 1).any(|b| dominates(a, b) || dominates(b, a)));
            antichain.check(!comparable, || format!("n={n} k={k}: two feasible vectors are comparable"));

            let by_genomes = brute::classify_by_genomes(p)?;
            let mut b_opt = Vec::with_capacity(n);
            for (idx, truth) in by_genomes.iter().enumerate() {
                let i = idx + 1;
                let c = (forms.classify)(i, p)?;
                classes.check(
                    (c.m1, c.m0, c.m_free) == (truth.m1, truth.m0, truth.m_free),
                    || {
                        format!(
                            "n={n} k={k} i={i}: formula ({}, {}, {}), enumeration ({}, {}, {})",
                            c.m1, c.m0, c.m_free, truth.m1, truth.m0, truth.m_free
                        )
                    },
                );
                let closed = c.min_imbalance(mu % 2);
                let searched = brute::min_imbalance_by_search(truth);
                minimum.check(closed == searched, || {
                    format!("n={n} k={k} i={i}: formula {closed}, search {searched}")
                });
                b_opt.push(closed as u32);
            }

            let best = build_covering_population(p, Fill::BestDiversity);
            let realized = ImbalanceCounters::from_genomes(n, best.members().iter().map(|m| &m.genome)).imbalances();
            attain.check(realized == b_opt, || {
                format!("n={n} k={k}: realized {realized:?}, target {b_opt:?}")
            });
        }
    }
    Ok(VerifyReport {
        max_n,
        checks: vec![size, classes, minimum, attain, parity, gap, antichain],
    })
}
