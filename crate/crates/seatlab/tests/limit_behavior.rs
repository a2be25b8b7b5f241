//! Displacement profiles against the backward coloring's red-seat gaps,
//! exact displacement conservation, and the stick-breaking oracle's own
//! frozen statistics.

use seatlab::backward::{seat_from_coloring, ColoredSeats};
use seatlab::exact::enumerate;
use seatlab::model::Instance;
use seatlab::pd::{
    chain_displacements, convergence_report, displacement_profile, oracle_largest_components,
    sample_profiles, stick_breaking_sample,
};
use seatlab::rng::SplitMix64;
use seatlab::stats::{ks_two_sample, Significance};

// Golden constants from the oracle pre-run: mean and variance of the
// largest stick-breaking component, seed 0, 1e6 samples.
const ORACLE_MEAN_LARGEST: f64 = 0.624303;
const ORACLE_VAR_LARGEST: f64 = 0.036972;

#[test]
fn oracle_largest_component_statistics_are_stable() {
    let samples = oracle_largest_components(0, 1_000_000);
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    assert!((mean - ORACLE_MEAN_LARGEST).abs() < 0.002, "mean {mean}");
    assert!((var - ORACLE_VAR_LARGEST).abs() < 0.002, "var {var}");
}

#[test]
fn two_oracle_sample_sets_pass_ks_against_each_other() {
    let a = oracle_largest_components(0, 10_000);
    let b = oracle_largest_components(1, 10_000);
    let result = ks_two_sample(&a, &b, Significance::S05).unwrap();
    assert!(result.pass, "ks {} over {}", result.statistic, result.threshold);
}

#[test]
fn stick_breaking_residual_bound_holds() {
    let mut rng = SplitMix64::new(77);
    for _ in 0..1000 {
        let s = stick_breaking_sample(&mut rng, 1e-4);
        let sum: f64 = s.components.iter().sum();
        assert!((1.0 - sum) <= 1e-4 + 1e-12);
    }
}

/// Gap oracle, independent of the pd module: the nonzero displacements of
/// chain `i` are exactly the hops between consecutive shade-`i` seats
/// (starting from passenger `i`) in the relabeled seat set.
fn gaps_from_coloring(colored: &ColoredSeats, shade: u32) -> Vec<u64> {
    let mut prev = shade;
    let mut gaps = Vec::new();
    for seat in colored.seats() {
        if colored.shade_of(seat) == Some(shade) {
            gaps.push(u64::from(seat - prev));
            prev = seat;
        }
    }
    gaps.sort_unstable_by(|a, b| b.cmp(a));
    gaps
}

#[test]
fn profile_components_equal_red_seat_gaps_k1() {
    for n in 2..=7u32 {
        let instance = Instance::consecutive(n, 1).unwrap();
        // every coloring: any red subset of seats 2..=n, terminal n+1 red
        for bits in 0u32..(1 << (n - 1)) {
            let shades: Vec<Option<u32>> = (0..n)
                .map(|i| {
                    if i == n - 1 || bits >> i & 1 == 1 {
                        Some(1)
                    } else {
                        None
                    }
                })
                .collect();
            let colored = ColoredSeats::new(n, 1, shades).unwrap();
            let outcome = seat_from_coloring(&colored).unwrap();
            let profiles = displacement_profile(&instance, &outcome).unwrap();
            let expected: Vec<f64> = gaps_from_coloring(&colored, 1)
                .into_iter()
                .map(|g| g as f64 / f64::from(n))
                .collect();
            assert_eq!(profiles[0].components, expected, "n={n} bits={bits:b}");
        }
    }
}

#[test]
fn profile_components_equal_red_seat_gaps_k2() {
    let (n, k) = (5u32, 2u32);
    let instance = Instance::consecutive(n, k).unwrap();
    let free = (n - k) as usize;
    let mut digits = vec![0u32; free];
    loop {
        for flip in [false, true] {
            let mut shades: Vec<Option<u32>> =
                digits.iter().map(|&d| (d > 0).then_some(d)).collect();
            let (a, b) = if flip { (2, 1) } else { (1, 2) };
            shades.push(Some(a));
            shades.push(Some(b));
            let colored = ColoredSeats::new(n, k, shades).unwrap();
            let outcome = seat_from_coloring(&colored).unwrap();
            let profiles = displacement_profile(&instance, &outcome).unwrap();
            for shade in 1..=k {
                let expected: Vec<f64> = gaps_from_coloring(&colored, shade)
                    .into_iter()
                    .map(|g| g as f64 / f64::from(n))
                    .collect();
                assert_eq!(
                    profiles[(shade - 1) as usize].components,
                    expected,
                    "digits={digits:?} flip={flip} shade={shade}"
                );
            }
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return;
            }
            digits[i] += 1;
            if digits[i] <= k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn displacement_mass_is_conserved_exactly() {
    // per chain the integer displacements telescope to n + terminal - start,
    // and across chains they sum to exactly k * n
    for n in 2..=6u32 {
        for k in 1..=3u32.min(n - 1) {
            let instance = Instance::consecutive(n, k).unwrap();
            for (outcome, _) in enumerate(&instance).unwrap().entries() {
                let chains = chain_displacements(&instance, outcome).unwrap();
                let mut total = 0u64;
                let mut terminals: Vec<u32> = Vec::new();
                for chain in &chains {
                    let sum: u64 = chain.displacements.iter().sum();
                    assert_eq!(
                        sum,
                        u64::from(n + chain.terminal_seat - chain.chain_id),
                        "n={n} k={k} outcome={outcome:?}"
                    );
                    total += sum;
                    terminals.push(chain.terminal_seat);
                }
                assert_eq!(total, u64::from(k * n));
                terminals.sort_unstable();
                assert_eq!(terminals, (1..=k).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn profile_batches_agree_with_convergence_summaries() {
    let instance = Instance::consecutive(50, 2).unwrap();
    let batch = sample_profiles(&instance, 500, 9, 2).unwrap();
    let samples = batch.displacement_samples.unwrap();
    assert_eq!(samples.len(), 500);
    for trial in &samples {
        assert_eq!(trial.len(), 2);
        for profile in trial {
            // sorted decreasing, all components in (0, 1 + k/n]
            assert!(profile
                .components
                .windows(2)
                .all(|w| w[0] >= w[1]));
            assert!(profile.components.iter().all(|&c| c > 0.0 && c <= 1.0 + 2.0 / 50.0));
        }
    }
}

#[test]
fn convergence_report_shape_and_sanity() {
    let report = convergence_report(&[100, 400], 2, 3_000, 5, 2).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.oracle_samples, 3_000);
    for row in &report.rows {
        assert_eq!(row.k, 2);
        assert_eq!(row.trials, 3_000);
        assert!(row.ks_distance.is_finite() && row.ks_distance < 0.15);
        assert!((row.mean_largest - ORACLE_MEAN_LARGEST).abs() < 0.05);
        let corr = row.max_cross_corr.expect("k = 2 has cross-chain stats");
        assert!(corr < 0.2, "corr {corr}");
    }
    // single-chain reports carry no correlation column
    let single = convergence_report(&[100], 1, 1_000, 5, 1).unwrap();
    assert!(single.rows[0].max_cross_corr.is_none());
}
