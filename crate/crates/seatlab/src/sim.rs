//! Forward sampling of the boarding process.
//!
//! Batches are reproducible by construction: trial `t` draws from
//! `SplitMix64::for_trial(master_seed, t)`, so the numbers seen inside a
//! trial do not depend on which worker ran it or in what order. Workers
//! process contiguous trial ranges and their partial aggregates are merged
//! in range order, making [`run_batch`] a pure function of
//! `(instance, trials, master_seed)`.

use std::ops::Range;

use serde::Serialize;

use crate::model::{Instance, Outcome, SeatPool, Trace, TraceEntry};
use crate::pd::DisplacementProfile;
use crate::rng::SplitMix64;

/// Aggregated counts from a batch of independent boarding trials.
#[derive(Debug, Clone, Serialize)]
pub struct BatchResult {
    pub trials: u64,
    /// `event_counts[m - 1]` counts trials where passenger `m` found seat
    /// `m` occupied; entries for lost passengers stay 0.
    pub event_counts: Vec<u64>,
    /// Trials where the last passenger sat in seat `n`.
    pub last_correct_count: u64,
    /// Per-trial, per-chain displacement profiles, populated by
    /// [`crate::pd::sample_profiles`]; plain [`run_batch`] leaves it `None`.
    pub displacement_samples: Option<Vec<Vec<DisplacementProfile>>>,
    pub master_seed: u64,
}

impl BatchResult {
    pub fn event_frequency(&self, passenger: u32) -> f64 {
        self.event_counts[(passenger - 1) as usize] as f64 / self.trials as f64
    }

    pub fn last_correct_frequency(&self) -> f64 {
        self.last_correct_count as f64 / self.trials as f64
    }
}

/// Reusable per-worker sampler state; one allocation per worker, not per
/// trial (a trial at n = 10^7 must stay linear with no reallocation).
pub(crate) struct TrialSampler {
    n: u32,
    is_lost: Vec<bool>,
    pool: SeatPool,
    seat_of: Vec<u32>,
    trace: Vec<TraceEntry>,
}

impl TrialSampler {
    pub fn new(instance: &Instance) -> Self {
        let n = instance.n();
        let mut is_lost = vec![false; n as usize + 1];
        for &m in instance.lost() {
            is_lost[m as usize] = true;
        }
        Self {
            n,
            is_lost,
            pool: SeatPool::new(n),
            seat_of: vec![0; n as usize],
            trace: Vec::new(),
        }
    }

    /// Runs one boarding trial, leaving the result in `seat_of`/`trace`.
    pub fn run(&mut self, rng: &mut SplitMix64) {
        self.pool.reset(self.n);
        self.trace.clear();
        for m in 1..=self.n {
            let seat = if self.is_lost[m as usize] || !self.pool.is_empty_seat(m) {
                let options = self.pool.len();
                let seat = self.pool.nth(rng.next_below(u64::from(options)) as u32);
                self.trace.push(TraceEntry {
                    passenger: m,
                    seat,
                    options,
                });
                seat
            } else {
                m
            };
            self.pool.take(seat);
            self.seat_of[(m - 1) as usize] = seat;
        }
    }

    pub fn seats(&self) -> &[u32] {
        &self.seat_of
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }
}

/// Samples one boarding outcome together with the trace that replays to it.
pub fn sample_outcome(instance: &Instance, rng: &mut SplitMix64) -> (Outcome, Trace) {
    let mut sampler = TrialSampler::new(instance);
    sampler.run(rng);
    (
        Outcome::from_seats_unchecked(sampler.seat_of.clone()),
        Trace::new(sampler.trace.clone()),
    )
}

/// Runs `trials` independent boarding trials and aggregates occupancy
/// counts. The result is identical for every `workers` value.
pub fn run_batch(instance: &Instance, trials: u64, master_seed: u64, workers: usize) -> BatchResult {
    let (result, _) = run_batch_map(instance, trials, master_seed, workers, |_, _| ());
    result
}

/// Like [`run_batch`], also applying `extract` to each trial's seat
/// assignment. Extracted values are returned in trial order regardless of
/// the worker count.
pub fn run_batch_map<T, F>(
    instance: &Instance,
    trials: u64,
    master_seed: u64,
    workers: usize,
    extract: F,
) -> (BatchResult, Vec<T>)
where
    T: Send,
    F: Fn(u64, &[u32]) -> T + Sync,
{
    assert!(trials >= 1, "trials must be at least 1");
    let workers = workers.max(1).min(usize::try_from(trials).unwrap_or(usize::MAX));

    let parts = if workers == 1 {
        vec![run_range(instance, 0..trials, master_seed, &extract)]
    } else {
        let ranges = split_ranges(trials, workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|range| scope.spawn(|| run_range(instance, range, master_seed, &extract)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let n = instance.n() as usize;
    let mut event_counts = vec![0u64; n];
    let mut last_correct_count = 0;
    let mut extracted = Vec::with_capacity(usize::try_from(trials).unwrap_or(0));
    for part in parts {
        for (total, c) in event_counts.iter_mut().zip(&part.event_counts) {
            *total += c;
        }
        last_correct_count += part.last_correct;
        extracted.extend(part.extracted);
    }

    (
        BatchResult {
            trials,
            event_counts,
            last_correct_count,
            displacement_samples: None,
            master_seed,
        },
        extracted,
    )
}

struct RangePart<T> {
    event_counts: Vec<u64>,
    last_correct: u64,
    extracted: Vec<T>,
}

fn run_range<T, F>(instance: &Instance, range: Range<u64>, master_seed: u64, extract: &F) -> RangePart<T>
where
    F: Fn(u64, &[u32]) -> T,
{
    let n = instance.n();
    let mut sampler = TrialSampler::new(instance);
    let mut event_counts = vec![0u64; n as usize];
    let mut last_correct = 0u64;
    let mut extracted = Vec::with_capacity(range.clone().count());

    for t in range {
        let mut rng = SplitMix64::for_trial(master_seed, t);
        sampler.run(&mut rng);
        // The choosers are exactly the lost passengers plus those who found
        // their seat taken, so the trace alone yields the event counts.
        for entry in sampler.trace() {
            if !sampler.is_lost[entry.passenger as usize] {
                event_counts[(entry.passenger - 1) as usize] += 1;
            }
        }
        if sampler.seat_of[(n - 1) as usize] == n {
            last_correct += 1;
        }
        extracted.push(extract(t, sampler.seats()));
    }

    RangePart {
        event_counts,
        last_correct,
        extracted,
    }
}

fn split_ranges(trials: u64, workers: usize) -> Vec<Range<u64>> {
    let workers = workers as u64;
    let base = trials / workers;
    let extra = trials % workers;
    let mut ranges = Vec::with_capacity(workers as usize);
    let mut start = 0;
    for w in 0..workers {
        let len = base + u64::from(w < extra);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}
