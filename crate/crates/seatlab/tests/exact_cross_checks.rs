//! The exact engine's two routes (enumeration and bitmask DP) must agree
//! with each other, with the closed form, and with the backward coloring
//! construction — all as rational identities, and with Monte Carlo as a
//! statistical witness on top.

use seatlab::backward::{
    backward_distribution, independent_red_pattern_distribution, record_red_pattern_distribution,
};
use seatlab::exact::{closed_form, enumerate, event_prob, verify_independence};
use seatlab::model::Instance;
use seatlab::sim::run_batch_map;
use seatlab::stats::{chi_square_goodness_of_fit, Significance};
use seatlab::ExactProb;

#[test]
fn dp_matches_enumeration_for_every_lost_set_up_to_seven() {
    for n in 1..=7u32 {
        for bits in 0u32..(1 << n) {
            let lost: Vec<u32> = (1..=n).filter(|&m| bits >> (m - 1) & 1 == 1).collect();
            let instance = Instance::new(n, lost.iter().copied()).unwrap();
            let dist = enumerate(&instance).unwrap();
            assert_eq!(dist.total(), ExactProb::one());
            for m in (1..=n).filter(|&m| !instance.is_lost(m)) {
                assert_eq!(
                    event_prob(&instance, m).unwrap(),
                    dist.event_prob(m),
                    "n={n} lost={lost:?} m={m}"
                );
            }
        }
    }
}

#[test]
fn dp_matches_closed_form_for_consecutive_lost_sets() {
    for n in 2..=12u32 {
        for k in 1..=4u32.min(n - 1) {
            let instance = Instance::consecutive(n, k).unwrap();
            for m in k + 1..=n {
                assert_eq!(
                    event_prob(&instance, m).unwrap(),
                    closed_form(n, k, m).unwrap(),
                    "n={n} k={k} m={m}"
                );
            }
        }
    }
}

#[test]
fn independence_zero_violations_consecutive_up_to_six() {
    // the n <= 8 sweep runs in the acceptance suite; this keeps a faster
    // regression net in the crate itself
    for n in 2..=6u32 {
        for k in 1..=3u32.min(n - 1) {
            let report = verify_independence(&Instance::consecutive(n, k).unwrap()).unwrap();
            assert!(
                report.all_independent(),
                "n={n} k={k}: {:?}",
                report.violations
            );
            let eligible = u64::from(n - k);
            assert_eq!(report.subsets_checked, (1 << eligible) - 1);
        }
    }
}

#[test]
fn backward_distribution_equals_forward_enumeration() {
    for n in 2..=7u32 {
        let backward = backward_distribution(n, 1).unwrap();
        let forward = enumerate(&Instance::consecutive(n, 1).unwrap()).unwrap();
        assert_eq!(backward, forward, "n={n} k=1");
    }
    for n in 3..=6u32 {
        let backward = backward_distribution(n, 2).unwrap();
        let forward = enumerate(&Instance::consecutive(n, 2).unwrap()).unwrap();
        assert_eq!(backward, forward, "n={n} k=2");
    }
}

#[test]
fn record_coloring_equals_independent_marginals_up_to_seven() {
    for n in 2..=7u32 {
        assert_eq!(
            record_red_pattern_distribution(n),
            independent_red_pattern_distribution(n),
            "n={n}"
        );
    }
}

#[test]
fn simulated_occupancy_pair_passes_independence_test() {
    // D_2 vs D_4 indicators over 1e5 trials, n=10, k=1: the events are
    // exactly independent, so the chi-square test must not reject at 0.001
    let instance = Instance::consecutive(10, 1).unwrap();
    let (_, pairs) = run_batch_map(&instance, 100_000, 77, 2, |_, seats| {
        (seats[1] != 2, seats[3] != 4)
    });
    let mut table = [[0u64; 2]; 2];
    for (d2, d4) in pairs {
        table[usize::from(d2)][usize::from(d4)] += 1;
    }
    let result =
        seatlab::stats::chi_square_independence_2x2(table, Significance::S001).unwrap();
    assert!(result.pass, "chi2 {} over {}", result.statistic, result.threshold);
}

#[test]
fn empirical_outcome_frequencies_match_exact_distribution() {
    // chi-square goodness of fit at 0.001 between 1e5 sampled outcomes and
    // the exact distribution, for every consecutive instance n <= 6, k <= 2
    let trials = 100_000u64;
    for n in 2..=6u32 {
        for k in 1..=2u32.min(n - 1) {
            let instance = Instance::consecutive(n, k).unwrap();
            let dist = enumerate(&instance).unwrap();
            let index: std::collections::BTreeMap<&[u32], usize> = dist
                .entries()
                .iter()
                .enumerate()
                .map(|(i, (o, _))| (o.seats(), i))
                .collect();

            let (_, cells) = run_batch_map(&instance, trials, 2024 + u64::from(n), 2, |_, seats| {
                index[seats]
            });
            let mut observed = vec![0u64; dist.len()];
            for cell in cells {
                observed[cell] += 1;
            }
            let expected: Vec<f64> = dist.entries().iter().map(|(_, p)| p.to_f64()).collect();
            let result =
                chi_square_goodness_of_fit(&observed, &expected, Significance::S001).unwrap();
            assert!(
                result.pass,
                "n={n} k={k}: chi2 {} over {}",
                result.statistic, result.threshold
            );
        }
    }
}
