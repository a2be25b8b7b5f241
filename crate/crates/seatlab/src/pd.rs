//! Displacement profiles and their stick-breaking scaling limit.
//!
//! For a consecutive lost set `{1..k}`, relabel seat `j <= k` as `n + j`.
//! Every passenger then satisfies `S_m >= m` for their relabeled seat `S_m`,
//! and the displacements `S_m - m` of the choosers decompose into `k`
//! disjoint chains, one per lost passenger. Normalizing a chain's
//! displacements by `n` and sorting them decreasingly gives its
//! [`DisplacementProfile`].
//!
//! As `n` grows, the profile of a single chain approaches the distribution
//! sampled by uniform stick breaking (`p_1 = V_1`,
//! `p_i = V_i * prod_{j<i} (1 - V_j)`, all `V_i` uniform, sorted
//! decreasingly), which serves as the reference oracle here. The chains of a
//! `k`-chain instance approach `k` independent copies;
//! [`convergence_report`] quantifies both effects with a two-sample KS
//! distance on the largest component and the cross-chain correlation.

use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, Outcome};
use crate::rng::{mix64, SplitMix64};
use crate::sim::{run_batch_map, BatchResult};
use crate::stats;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PdError {
    #[error("lost set must be consecutive {{1..k}} for displacement profiles")]
    NotConsecutive,
    #[error("n = {n} too small for k = {k}: need n >= 10k")]
    ScaleTooSmall { n: u32, k: u32 },
}

/// Integer displacements of one chain, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDisplacements {
    /// The lost passenger the chain starts from (1-based, also the shade of
    /// the chain in the backward coloring).
    pub chain_id: u32,
    /// Original label of the lost seat the chain terminates in.
    pub terminal_seat: u32,
    /// Hop displacements in chain order; each is at least 1 and the sum
    /// telescopes to `n + terminal_seat - chain_id`.
    pub displacements: Vec<u64>,
}

/// One chain's displacements divided by `n`, sorted decreasingly.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementProfile {
    pub chain_id: u32,
    pub components: Vec<f64>,
}

impl DisplacementProfile {
    pub fn largest(&self) -> f64 {
        self.components.first().copied().unwrap_or(0.0)
    }
}

/// Walks the displacement chains of an outcome under the relabeling.
/// Requires a consecutive lost set.
pub fn chain_displacements(
    instance: &Instance,
    outcome: &Outcome,
) -> Result<Vec<ChainDisplacements>, PdError> {
    let k = instance.consecutive_k().ok_or(PdError::NotConsecutive)?;
    let n = instance.n();
    let mut chains = Vec::with_capacity(k as usize);
    for start in 1..=k {
        let mut displacements = Vec::new();
        let mut passenger = start;
        let terminal_seat = loop {
            let seat = outcome.seat_of(passenger);
            let relabeled = if seat <= k { n + seat } else { seat };
            debug_assert!(relabeled > passenger);
            displacements.push(u64::from(relabeled - passenger));
            if relabeled > n {
                break relabeled - n;
            }
            passenger = relabeled;
        };
        chains.push(ChainDisplacements {
            chain_id: start,
            terminal_seat,
            displacements,
        });
    }
    Ok(chains)
}

/// Per-chain normalized displacement profiles of an outcome.
pub fn displacement_profile(
    instance: &Instance,
    outcome: &Outcome,
) -> Result<Vec<DisplacementProfile>, PdError> {
    let n = instance.n() as f64;
    Ok(chain_displacements(instance, outcome)?
        .into_iter()
        .map(|chain| {
            let mut components: Vec<f64> =
                chain.displacements.iter().map(|&d| d as f64 / n).collect();
            components.sort_unstable_by(|a, b| b.total_cmp(a));
            DisplacementProfile {
                chain_id: chain.chain_id,
                components,
            }
        })
        .collect())
}

/// Runs a forward batch and stores every trial's displacement profiles in
/// the result. Same determinism contract as [`crate::sim::run_batch`].
pub fn sample_profiles(
    instance: &Instance,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<BatchResult, PdError> {
    instance.consecutive_k().ok_or(PdError::NotConsecutive)?;
    let (mut result, profiles) = run_batch_map(instance, trials, master_seed, workers, |_, seats| {
        let outcome = Outcome::from_seats(seats.to_vec()).expect("sampler produces bijections");
        displacement_profile(instance, &outcome).expect("consecutive checked above")
    });
    result.displacement_samples = Some(profiles);
    Ok(result)
}

/// A stick-breaking draw: components sorted decreasingly plus the mass of
/// the unbroken remainder.
#[derive(Debug, Clone, Serialize)]
pub struct StickBreakingSample {
    pub components: Vec<f64>,
    pub truncation_mass: f64,
}

const MAX_PIECES: usize = 64;

/// Raw stick-breaking pieces in break order: `p_i = V_i * prod_{j<i}(1-V_j)`
/// with independent uniform `V_i`, stopping once the remainder drops below
/// `epsilon` (or after 64 pieces).
pub fn stick_breaking_pieces(rng: &mut SplitMix64, epsilon: f64) -> Vec<f64> {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    let mut pieces = Vec::with_capacity(24);
    let mut remaining = 1.0f64;
    while remaining >= epsilon && pieces.len() < MAX_PIECES {
        let v = rng.next_f64();
        pieces.push(v * remaining);
        remaining *= 1.0 - v;
    }
    pieces
}

/// One reference sample of the displacement-profile limit.
pub fn stick_breaking_sample(rng: &mut SplitMix64, epsilon: f64) -> StickBreakingSample {
    let pieces = stick_breaking_pieces(rng, epsilon);
    let truncation_mass = 1.0 - pieces.iter().sum::<f64>();
    let mut components = pieces;
    components.sort_unstable_by(|a, b| b.total_cmp(a));
    StickBreakingSample {
        components,
        truncation_mass: truncation_mass.max(0.0),
    }
}

/// Residual bound used wherever the crate needs a default oracle draw.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Tag separating the oracle's seed stream from the simulation streams.
const ORACLE_STREAM: u64 = u64::MAX;

/// Draws `count` oracle samples of the largest stick-breaking component,
/// deterministically derived from `master_seed`.
pub fn oracle_largest_components(master_seed: u64, count: u64) -> Vec<f64> {
    let oracle_seed = mix64(master_seed, ORACLE_STREAM);
    (0..count)
        .map(|t| {
            let mut rng = SplitMix64::for_trial(oracle_seed, t);
            stick_breaking_sample(&mut rng, DEFAULT_EPSILON)
                .components
                .first()
                .copied()
                .unwrap_or(0.0)
        })
        .collect()
}

/// One row of the convergence diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub k: u32,
    pub trials: u64,
    /// KS distance between the empirical largest components (all chains
    /// pooled) and the stick-breaking oracle samples.
    pub ks_distance: f64,
    pub mean_largest: f64,
    pub var_largest: f64,
    /// Largest absolute pairwise correlation of largest components across
    /// chains; `None` when k = 1.
    pub max_cross_corr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub oracle_samples: u64,
    pub oracle_mean_largest: f64,
    pub oracle_var_largest: f64,
}

/// For each `n` in `n_values`, samples `trials` outcomes of the `{1..k}`
/// instance and compares the largest displacement component against the
/// stick-breaking oracle. Requires `n >= 10k` throughout.
pub fn convergence_report(
    n_values: &[u32],
    k: u32,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ConvergenceReport, PdError> {
    assert!(k >= 1, "need at least one lost passenger");
    for &n in n_values {
        if n < 10 * k {
            return Err(PdError::ScaleTooSmall { n, k });
        }
    }

    let oracle = oracle_largest_components(master_seed, trials);
    let (oracle_mean, oracle_var) = mean_var(&oracle);

    let mut rows = Vec::with_capacity(n_values.len());
    for (i, &n) in n_values.iter().enumerate() {
        let instance = Instance::consecutive(n, k).expect("n >= 10k >= k");
        let batch_seed = mix64(master_seed, i as u64);
        // Largest displacement per chain, per trial; chains are walked in
        // chain-id order so column j is chain j+1.
        let (_, largest): (_, Vec<Vec<f64>>) =
            run_batch_map(&instance, trials, batch_seed, workers, |_, seats| {
                largest_per_chain(n, k, seats)
            });

        let pooled: Vec<f64> = largest.iter().flatten().copied().collect();
        let ks_distance = stats::ks_statistic(&pooled, &oracle).expect("nonempty samples");
        let (mean_largest, var_largest) = mean_var(&pooled);
        let max_cross_corr = (k >= 2).then(|| {
            let mut max_abs = 0.0f64;
            for a in 0..k as usize {
                for b in a + 1..k as usize {
                    let xs: Vec<f64> = largest.iter().map(|row| row[a]).collect();
                    let ys: Vec<f64> = largest.iter().map(|row| row[b]).collect();
                    max_abs = max_abs.max(correlation(&xs, &ys).abs());
                }
            }
            max_abs
        });

        rows.push(ConvergenceRow {
            n,
            k,
            trials,
            ks_distance,
            mean_largest,
            var_largest,
            max_cross_corr,
        });
    }

    Ok(ConvergenceReport {
        rows,
        oracle_samples: trials,
        oracle_mean_largest: oracle_mean,
        oracle_var_largest: oracle_var,
    })
}

/// Chain-walk specialized to the hot path: returns each chain's largest
/// normalized displacement without materializing profiles.
fn largest_per_chain(n: u32, k: u32, seats: &[u32]) -> Vec<f64> {
    let mut out = Vec::with_capacity(k as usize);
    for start in 1..=k {
        let mut passenger = start;
        let mut max_d = 0u32;
        loop {
            let seat = seats[(passenger - 1) as usize];
            let relabeled = if seat <= k { n + seat } else { seat };
            max_d = max_d.max(relabeled - passenger);
            if relabeled > n {
                break;
            }
            passenger = relabeled;
        }
        out.push(f64::from(max_d) / f64::from(n));
    }
    out
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, vx) = mean_var(xs);
    let (my, vy) = mean_var(ys);
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.len() as f64;
    cov / (vx * vy).sqrt()
}
