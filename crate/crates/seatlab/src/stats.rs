//! Statistical utilities backing the Monte Carlo acceptance checks: Wilson
//! score intervals, chi-square tests, and the two-sample Kolmogorov-Smirnov
//! test. No p-values; each test compares its statistic against a critical
//! value at one of three fixed significance levels.
//!
//! This module and [`crate::pd`] are the only places floating point is used.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    DomainError(&'static str),
}

/// Fixed significance levels with embedded critical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Significance {
    S05,
    S01,
    S001,
}

impl Significance {
    pub fn alpha(self) -> f64 {
        match self {
            Significance::S05 => 0.05,
            Significance::S01 => 0.01,
            Significance::S001 => 0.001,
        }
    }

    /// Chi-square critical value, df = 1.
    fn chi2_critical_df1(self) -> f64 {
        match self {
            Significance::S05 => 3.841458820694124,
            Significance::S01 => 6.634896601021213,
            Significance::S001 => 10.827566170662733,
        }
    }

    /// Coefficient `c(alpha)` in the two-sample KS threshold
    /// `c(alpha) * sqrt((na + nb) / (na * nb))`; these satisfy
    /// `c = sqrt(-ln(alpha/2) / 2)`.
    fn ks_coefficient(self) -> f64 {
        match self {
            Significance::S05 => 1.358,
            Significance::S01 => 1.628,
            Significance::S001 => 1.949,
        }
    }

    /// Standard normal quantile z such that P(|Z| <= z) = 1 - alpha.
    fn normal_two_sided_z(self) -> f64 {
        match self {
            Significance::S05 => 1.959963984540054,
            Significance::S01 => 2.5758293035489004,
            Significance::S001 => 3.2905267314918945,
        }
    }
}

/// Outcome of one statistical test: `pass` ⇔ `statistic <= threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub significance: f64,
    /// Set when the input was degenerate (e.g. a zero margin) and the test
    /// passed vacuously.
    pub degenerate: bool,
}

impl TestResult {
    fn new(statistic: f64, threshold: f64, significance: Significance) -> Self {
        Self {
            statistic,
            threshold,
            pass: statistic <= threshold,
            significance: significance.alpha(),
            degenerate: false,
        }
    }
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64), StatsError> {
    if trials < 1 {
        return Err(StatsError::DomainError("trials must be at least 1"));
    }
    if successes > trials {
        return Err(StatsError::DomainError("successes exceed trials"));
    }
    if z.is_nan() || z <= 0.0 {
        return Err(StatsError::DomainError("z must be positive"));
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Wilson interval at the two-sided 99.9% level, the band used by the
/// Monte Carlo acceptance checks.
pub fn wilson_99_9(successes: u64, trials: u64) -> Result<(f64, f64), StatsError> {
    wilson_interval(successes, trials, Significance::S001.normal_two_sided_z())
}

/// Pearson chi-square test of independence on a 2x2 contingency table,
/// df = 1. A zero row or column margin makes independence untestable; the
/// result then passes with statistic 0 and `degenerate` set.
pub fn chi_square_independence_2x2(
    counts: [[u64; 2]; 2],
    significance: Significance,
) -> Result<TestResult, StatsError> {
    let row: [f64; 2] = [
        (counts[0][0] + counts[0][1]) as f64,
        (counts[1][0] + counts[1][1]) as f64,
    ];
    let col: [f64; 2] = [
        (counts[0][0] + counts[1][0]) as f64,
        (counts[0][1] + counts[1][1]) as f64,
    ];
    let total = row[0] + row[1];
    if total < 1.0 {
        return Err(StatsError::DomainError("table total must be at least 1"));
    }
    if row.contains(&0.0) || col.contains(&0.0) {
        let mut result = TestResult::new(0.0, significance.chi2_critical_df1(), significance);
        result.degenerate = true;
        return Ok(result);
    }
    let mut statistic = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = row[i] * col[j] / total;
            let diff = counts[i][j] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    Ok(TestResult::new(
        statistic,
        significance.chi2_critical_df1(),
        significance,
    ))
}

/// Chi-square goodness-of-fit of observed counts against given cell
/// probabilities, df = cells - 1. The critical value comes from the
/// Wilson-Hilferty cube approximation, accurate to well under a percent for
/// the df used here.
pub fn chi_square_goodness_of_fit(
    observed: &[u64],
    expected_probs: &[f64],
    significance: Significance,
) -> Result<TestResult, StatsError> {
    if observed.len() != expected_probs.len() {
        return Err(StatsError::DomainError("observed/expected length mismatch"));
    }
    if observed.len() < 2 {
        return Err(StatsError::DomainError("need at least 2 cells"));
    }
    let total: u64 = observed.iter().sum();
    if total < 1 {
        return Err(StatsError::DomainError("no observations"));
    }
    let total = total as f64;
    let mut statistic = 0.0;
    for (&obs, &p) in observed.iter().zip(expected_probs) {
        if p.is_nan() || p <= 0.0 {
            return Err(StatsError::DomainError("cell probability must be positive"));
        }
        let expected = total * p;
        let diff = obs as f64 - expected;
        statistic += diff * diff / expected;
    }
    let df = (observed.len() - 1) as f64;
    // Wilson-Hilferty: chi2_q(df) ~ df * (1 - 2/(9 df) + z sqrt(2/(9 df)))^3
    // with z the upper-tail normal quantile for alpha.
    let z_upper = match significance {
        Significance::S05 => 1.6448536269514722,
        Significance::S01 => 2.3263478740408408,
        Significance::S001 => 3.090232306167813,
    };
    let term = 1.0 - 2.0 / (9.0 * df) + z_upper * (2.0 / (9.0 * df)).sqrt();
    let threshold = df * term * term * term;
    Ok(TestResult::new(statistic, threshold, significance))
}

/// Two-sample KS statistic: the sup-distance between empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::DomainError("samples must be nonempty"));
    }
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_unstable_by(|x, y| x.total_cmp(y));
    b.sort_unstable_by(|x, y| x.total_cmp(y));

    let (na, nb) = (a.len(), b.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while ia < na && ib < nb {
        let x = a[ia].min(b[ib]);
        while ia < na && a[ia] <= x {
            ia += 1;
        }
        while ib < nb && b[ib] <= x {
            ib += 1;
        }
        let diff = (ia as f64 / na as f64 - ib as f64 / nb as f64).abs();
        if diff > sup {
            sup = diff;
        }
    }
    Ok(sup)
}

/// Two-sample Kolmogorov-Smirnov test. Pass ⇔ the KS statistic stays below
/// `c(alpha) * sqrt((na + nb) / (na * nb))`.
pub fn ks_two_sample(a: &[f64], b: &[f64], significance: Significance) -> Result<TestResult, StatsError> {
    let statistic = ks_statistic(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let threshold = significance.ks_coefficient() * ((na + nb) / (na * nb)).sqrt();
    Ok(TestResult::new(statistic, threshold, significance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_edge_cases() {
        let (lo, _) = wilson_interval(0, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_interval(10, 10, 1.96).unwrap();
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_center_matches_direct_formula() {
        let z = 1.96f64;
        let (lo, hi) = wilson_interval(5, 10, z).unwrap();
        let center = (5.0 + z * z / 2.0) / (10.0 + z * z);
        assert!((0.5 * (lo + hi) - center).abs() < 1e-12);
        // interval always contains the sample proportion
        assert!(lo <= 0.5 && 0.5 <= hi);
    }

    #[test]
    fn wilson_rejects_bad_input() {
        assert!(wilson_interval(3, 0, 1.96).is_err());
        assert!(wilson_interval(11, 10, 1.96).is_err());
        assert!(wilson_interval(1, 10, 0.0).is_err());
    }

    #[test]
    fn chi2_proportional_table_passes_with_zero_statistic() {
        let r = chi_square_independence_2x2([[50, 50], [50, 50]], Significance::S05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
        assert!(!r.degenerate);
    }

    #[test]
    fn chi2_diagonal_table_fails_everywhere() {
        // By hand: all expected cells are 50, so the statistic is
        // 4 * (50^2 / 50) = 200.
        for sig in [Significance::S05, Significance::S01, Significance::S001] {
            let r = chi_square_independence_2x2([[100, 0], [0, 100]], sig).unwrap();
            assert!((r.statistic - 200.0).abs() < 1e-9);
            assert!(!r.pass);
        }
    }

    #[test]
    fn chi2_transpose_invariant() {
        let t = [[37, 12], [9, 61]];
        let tt = [[37, 9], [12, 61]];
        let a = chi_square_independence_2x2(t, Significance::S05).unwrap();
        let b = chi_square_independence_2x2(tt, Significance::S05).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-12);
    }

    #[test]
    fn chi2_degenerate_margin_flagged() {
        let r = chi_square_independence_2x2([[10, 20], [0, 0]], Significance::S001).unwrap();
        assert!(r.pass);
        assert!(r.degenerate);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn gof_uniform_die_sanity() {
        // 600 perfectly uniform observations: statistic 0
        let r = chi_square_goodness_of_fit(&[100; 6], &[1.0 / 6.0; 6], Significance::S001).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
        // Wilson-Hilferty threshold for df=5 at 0.05 is near the exact 11.0705
        let r = chi_square_goodness_of_fit(&[100; 6], &[1.0 / 6.0; 6], Significance::S05).unwrap();
        assert!((r.threshold - 11.0705).abs() < 0.05, "threshold {}", r.threshold);
    }

    #[test]
    fn ks_identical_samples_zero() {
        let a = [0.1, 0.4, 0.4, 0.9];
        let r = ks_two_sample(&a, &a, Significance::S05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn ks_disjoint_supports_is_one() {
        let a = [0.0, 0.1, 0.2, 0.3, 0.4];
        let b = [0.5, 0.6, 0.7, 0.8, 1.0];
        let r = ks_two_sample(&a, &b, Significance::S05).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn ks_symmetric_and_monotone_invariant() {
        let a: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64 / 41.0).collect();
        let b: Vec<f64> = (0..25).map(|i| ((i * 17) % 29) as f64 / 29.0).collect();
        let ab = ks_statistic(&a, &b).unwrap();
        let ba = ks_statistic(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        // common strictly increasing transform leaves the statistic fixed
        let f = |x: f64| (3.0 * x + 1.0).exp();
        let fa: Vec<f64> = a.iter().map(|&x| f(x)).collect();
        let fb: Vec<f64> = b.iter().map(|&x| f(x)).collect();
        assert!((ks_statistic(&fa, &fb).unwrap() - ab).abs() < 1e-12);
    }

    #[test]
    fn ks_threshold_formula() {
        let a = vec![0.0; 100];
        let b = vec![0.0; 400];
        let r = ks_two_sample(&a, &b, Significance::S01).unwrap();
        let expected = 1.628 * ((100.0f64 + 400.0) / (100.0 * 400.0)).sqrt();
        assert!((r.threshold - expected).abs() < 1e-12);
    }
}
