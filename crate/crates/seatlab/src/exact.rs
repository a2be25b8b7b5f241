//! Exact rational analysis of the boarding process.
//!
//! Two independent routes are maintained on purpose:
//!
//! - [`enumerate`] expands every uniform choice of the boarding rule into a
//!   weighted decision tree and merges identical outcomes. It is exponential
//!   but exact, and serves as the ground-truth oracle for everything else.
//! - [`event_prob`] / [`joint_prob`] run a memoized dynamic program over
//!   (next passenger, occupied-seat bitmask) states. The process is Markov
//!   in that state, and since passenger `m` boards with exactly `m - 1`
//!   seats taken, the bitmask alone identifies the state. This route
//!   reaches `n` around 24, far beyond full enumeration.
//!
//! [`closed_form`] gives `k/(n-m+k+1)` for a consecutive lost set `{1..k}`,
//! and [`verify_independence`] checks `Pr(⋂ D_m) = ∏ Pr(D_m)` over every
//! subset of passengers with exact rational equality — independence is an
//! identity here, not a statistical statement, so no tolerance is involved.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, Outcome, SeatPool};
use crate::prob::ExactProb;

/// Default cap on decision-tree leaves for [`enumerate`].
pub const DEFAULT_MAX_LEAVES: u128 = 10_000_000;

/// The bitmask DP stores occupied sets in a `u64` and its state space grows
/// like binomials in `n`; past this the exact engine refuses.
pub const MAX_DP_SEATS: u32 = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("decision tree has at least {estimated_leaves} leaves, over the bound of {bound}")]
    TooLarge { bound: u128, estimated_leaves: u128 },
    #[error("exact DP supports at most {max} seats, got n = {n}")]
    TooManySeats { n: u32, max: u32 },
    #[error("{0}")]
    DomainError(String),
}

/// The full outcome distribution as `(outcome, probability)` pairs, in
/// lexicographic seat order, with probabilities summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactDistribution {
    entries: Vec<(Outcome, ExactProb)>,
}

impl ExactDistribution {
    pub(crate) fn from_map(map: BTreeMap<Vec<u32>, BigRational>) -> Self {
        let entries = map
            .into_iter()
            .map(|(seats, p)| {
                (
                    Outcome::from_seats_unchecked(seats),
                    ExactProb::from_big_rational(p),
                )
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[(Outcome, ExactProb)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob_of(&self, seats: &[u32]) -> Option<&ExactProb> {
        self.entries
            .binary_search_by(|(o, _)| o.seats().cmp(seats))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn total(&self) -> ExactProb {
        self.entries.iter().map(|(_, p)| p.clone()).sum()
    }

    /// Exact probability of the event `D_m` by summing matching outcomes.
    pub fn event_prob(&self, m: u32) -> ExactProb {
        self.entries
            .iter()
            .filter(|(o, _)| o.seat_of(m) != m)
            .map(|(_, p)| p.clone())
            .sum()
    }
}

/// Exhaustive expansion of the boarding process with the default leaf bound.
pub fn enumerate(instance: &Instance) -> Result<ExactDistribution, ExactError> {
    enumerate_bounded(instance, DEFAULT_MAX_LEAVES)
}

/// Exhaustive expansion with an explicit leaf bound. A cheap counting pass
/// runs first so oversized trees fail fast instead of half-evaluating.
pub fn enumerate_bounded(
    instance: &Instance,
    max_leaves: u128,
) -> Result<ExactDistribution, ExactError> {
    let mut walker = TreeWalker::new(instance);
    let mut leaves = 0u128;
    if walker.count(1, max_leaves, &mut leaves).is_err() {
        return Err(ExactError::TooLarge {
            bound: max_leaves,
            estimated_leaves: leaves,
        });
    }

    let mut acc = BTreeMap::new();
    let mut denom = BigInt::one();
    walker.expand(1, &mut denom, &mut acc);
    Ok(ExactDistribution::from_map(acc))
}

/// Depth-first walker over the boarding decision tree. Passengers who sit
/// in their own seat are skipped in a loop, so the recursion depth is the
/// number of choice nodes on the path, not `n`.
struct TreeWalker<'a> {
    instance: &'a Instance,
    n: u32,
    pool: SeatPool,
    seat_of: Vec<u32>,
}

impl<'a> TreeWalker<'a> {
    fn new(instance: &'a Instance) -> Self {
        let n = instance.n();
        Self {
            instance,
            n,
            pool: SeatPool::new(n),
            seat_of: vec![0; n as usize],
        }
    }

    fn must_choose(&self, m: u32) -> bool {
        self.instance.is_lost(m) || !self.pool.is_empty_seat(m)
    }

    /// Seats deterministic passengers starting at `from`; returns the next
    /// chooser (or `n + 1`). Callers unwind with [`unwind`].
    fn advance(&mut self, from: u32) -> u32 {
        let mut m = from;
        while m <= self.n && !self.must_choose(m) {
            self.pool.take(m);
            self.seat_of[(m - 1) as usize] = m;
            m += 1;
        }
        m
    }

    fn unwind(&mut self, from: u32, to: u32) {
        for m in from..to {
            self.pool.put_back(self.seat_of[(m - 1) as usize]);
        }
    }

    /// Counts leaves, aborting with `Err` once the budget is exceeded.
    fn count(&mut self, from: u32, budget: u128, leaves: &mut u128) -> Result<(), ()> {
        let m = self.advance(from);
        let result = if m > self.n {
            *leaves += 1;
            if *leaves > budget {
                Err(())
            } else {
                Ok(())
            }
        } else {
            let options: Vec<u32> = self.pool.empty_seats().to_vec();
            let mut result = Ok(());
            for &seat in &options {
                self.pool.take(seat);
                self.seat_of[(m - 1) as usize] = seat;
                result = self.count(m + 1, budget, leaves);
                self.pool.put_back(seat);
                if result.is_err() {
                    break;
                }
            }
            result
        };
        self.unwind(from, m);
        result
    }

    /// Full expansion: each choice over `e` seats multiplies the running
    /// denominator by `e`; a leaf contributes `1/denominator` to its merged
    /// outcome.
    fn expand(&mut self, from: u32, denom: &mut BigInt, acc: &mut BTreeMap<Vec<u32>, BigRational>) {
        let m = self.advance(from);
        if m > self.n {
            let p = BigRational::new(BigInt::one(), denom.clone());
            *acc.entry(self.seat_of.clone()).or_insert_with(BigRational::zero) += p;
        } else {
            let options: Vec<u32> = self.pool.empty_seats().to_vec();
            let e = BigInt::from(options.len());
            *denom *= &e;
            for &seat in &options {
                self.pool.take(seat);
                self.seat_of[(m - 1) as usize] = seat;
                self.expand(m + 1, denom, acc);
                self.pool.put_back(seat);
            }
            *denom /= &e;
        }
        self.unwind(from, m);
    }
}

/// Exact `Pr(D_m)` via the bitmask DP; `m` must not be in the lost set.
pub fn event_prob(instance: &Instance, m: u32) -> Result<ExactProb, ExactError> {
    joint_prob(instance, &[m])
}

/// Exact `Pr(⋂_{m ∈ M} D_m)` via the bitmask DP.
pub fn joint_prob(instance: &Instance, passengers: &[u32]) -> Result<ExactProb, ExactError> {
    let n = instance.n();
    if n > MAX_DP_SEATS {
        return Err(ExactError::TooManySeats { n, max: MAX_DP_SEATS });
    }
    if passengers.is_empty() {
        return Err(ExactError::DomainError("event subset must be nonempty".into()));
    }
    let mut event_mask = 0u64;
    for &m in passengers {
        if m < 1 || m > n {
            return Err(ExactError::DomainError(format!(
                "passenger {m} outside 1..={n}"
            )));
        }
        if instance.is_lost(m) {
            return Err(ExactError::DomainError(format!(
                "D_{m} is undefined: passenger {m} has no boarding pass"
            )));
        }
        event_mask |= 1 << (m - 1);
    }

    let mut lost_mask = 0u64;
    for &m in instance.lost() {
        lost_mask |= 1 << (m - 1);
    }

    let mut dp = JointDp {
        n,
        lost_mask,
        event_mask,
        memo: HashMap::new(),
    };
    Ok(ExactProb::from_big_rational(dp.go(0)))
}

struct JointDp {
    n: u32,
    lost_mask: u64,
    event_mask: u64,
    memo: HashMap<u64, BigRational>,
}

impl JointDp {
    /// Probability that every remaining tracked event holds, given the
    /// occupied set `mask`. Passenger `m = popcount(mask) + 1` boards next.
    fn go(&mut self, mask: u64) -> BigRational {
        let m = mask.count_ones() + 1;
        if m > self.n {
            return BigRational::one();
        }
        if let Some(hit) = self.memo.get(&mask) {
            return hit.clone();
        }
        let bit = 1u64 << (m - 1);
        let tracked = self.event_mask & bit != 0;
        let lost = self.lost_mask & bit != 0;
        let seat_taken = mask & bit != 0;

        let value = if !lost && !seat_taken {
            if tracked {
                // D_m requires seat m occupied on arrival; it is free.
                BigRational::zero()
            } else {
                self.go(mask | bit)
            }
        } else {
            // Uniform choice over all empty seats. (A tracked, non-lost
            // passenger only reaches here with their seat taken, i.e. with
            // D_m satisfied.)
            let empty = self.n - (m - 1);
            let mut sum = BigRational::zero();
            for seat in 0..self.n {
                let seat_bit = 1u64 << seat;
                if mask & seat_bit == 0 {
                    sum += self.go(mask | seat_bit);
                }
            }
            sum / BigRational::from(BigInt::from(empty))
        };

        self.memo.insert(mask, value.clone());
        value
    }
}

/// The consecutive-lost-set closed form: for lost passengers `{1..k}` and
/// `k < m <= n`, seat `m` is occupied on arrival with probability
/// `k/(n-m+k+1)`. At `k = 1` this is the harmonic `1/(n-m+2)`.
pub fn closed_form(n: u32, k: u32, m: u32) -> Result<ExactProb, ExactError> {
    if k < 1 || k >= m || m > n {
        return Err(ExactError::DomainError(format!(
            "closed form needs 1 <= k < m <= n, got n={n} k={k} m={m}"
        )));
    }
    Ok(ExactProb::ratio(u64::from(k), u64::from(n - m + k + 1)))
}

/// Probability the last passenger gets their own seat: `1/(k+1)` for a
/// consecutive lost set, independent of `n`.
pub fn last_passenger_correct(n: u32, k: u32) -> Result<ExactProb, ExactError> {
    Ok(closed_form(n, k, n)?.complement())
}

#[derive(Debug, Clone, Serialize)]
pub struct IndependenceViolation {
    pub subset: Vec<u32>,
    pub joint: ExactProb,
    pub product: ExactProb,
}

/// Result of checking every nonempty subset of occupancy events for exact
/// factorization.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub n: u32,
    pub lost: Vec<u32>,
    pub subsets_checked: u64,
    pub violations: Vec<IndependenceViolation>,
}

impl IndependenceReport {
    pub fn all_independent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `Pr(⋂_{m ∈ M} D_m) == ∏_{m ∈ M} Pr(D_m)` with exact rational
/// equality for every nonempty subset `M` of passengers outside the lost
/// set. For consecutive lost sets the report must come back empty; for
/// arbitrary lost sets it records whatever the enumeration says.
pub fn verify_independence(instance: &Instance) -> Result<IndependenceReport, ExactError> {
    let n = instance.n();
    let eligible: Vec<u32> = (1..=n).filter(|&m| !instance.is_lost(m)).collect();
    if eligible.len() > 24 {
        return Err(ExactError::TooManySeats { n, max: MAX_DP_SEATS });
    }

    let singles: HashMap<u32, ExactProb> = eligible
        .iter()
        .map(|&m| Ok((m, event_prob(instance, m)?)))
        .collect::<Result<_, ExactError>>()?;

    let mut report = IndependenceReport {
        n,
        lost: instance.lost().iter().copied().collect(),
        subsets_checked: 0,
        violations: Vec::new(),
    };

    for choice in 1u64..(1 << eligible.len()) {
        let subset: Vec<u32> = eligible
            .iter()
            .enumerate()
            .filter(|&(i, _)| choice & (1 << i) != 0)
            .map(|(_, &m)| m)
            .collect();
        let joint = joint_prob(instance, &subset)?;
        let product = subset
            .iter()
            .fold(ExactProb::one(), |acc, m| &acc * &singles[m]);
        report.subsets_checked += 1;
        if joint != product {
            report.violations.push(IndependenceViolation {
                subset,
                joint,
                product,
            });
        }
    }
    Ok(report)
}
