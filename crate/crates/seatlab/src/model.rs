//! Domain types and the rule-replay referee.
//!
//! The boarding rule: passengers `1..=n` board in label order. A passenger
//! whose pass is lost picks a uniformly random empty seat (their own seat
//! included, when still free). Everyone else sits in their own seat if it is
//! empty and otherwise picks a uniformly random empty seat.
//!
//! [`replay`] re-executes that rule deterministically against a recorded
//! [`Trace`], auditing each choice: the chosen seat must have been empty and
//! the recorded option count must match the number of empty seats at that
//! moment. Every sampler and enumerator in this crate is checked against it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("seat count must be at least 1, got {0}")]
    EmptySeatCount(u64),
    #[error("lost passenger label {label} outside 1..={n}")]
    LostOutOfRange { label: u32, n: u32 },
    #[error("seat assignment is not a bijection: {0}")]
    NotBijection(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("passenger {passenger} cannot take occupied seat {seat}")]
    IllegalChoice { passenger: u32, seat: u32 },
    #[error("trace records {recorded} options for passenger {passenger}, but {actual} seats were empty")]
    OptionCountMismatch {
        passenger: u32,
        recorded: u32,
        actual: u32,
    },
    #[error("trace ended before passenger {passenger} chose a seat")]
    TraceTooShort { passenger: u32 },
    #[error("{0} trace entries left over after boarding completed")]
    TraceTooLong(usize),
}

/// Problem parameters: `n` seats and the set of passengers with lost passes.
///
/// Constructed through [`Instance::new`], which enforces `n >= 1` and
/// `lost ⊆ 1..=n`. An empty lost set is legal and makes the process
/// deterministic (everyone sits in their own seat).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    n: u32,
    lost: BTreeSet<u32>,
}

impl Instance {
    pub fn new(n: u32, lost: impl IntoIterator<Item = u32>) -> Result<Self, ModelError> {
        if n < 1 {
            return Err(ModelError::EmptySeatCount(u64::from(n)));
        }
        let lost: BTreeSet<u32> = lost.into_iter().collect();
        for &label in &lost {
            if label < 1 || label > n {
                return Err(ModelError::LostOutOfRange { label, n });
            }
        }
        Ok(Self { n, lost })
    }

    /// The classic setup: the first `k` passengers lose their passes.
    pub fn consecutive(n: u32, k: u32) -> Result<Self, ModelError> {
        Self::new(n, 1..=k)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lost(&self) -> &BTreeSet<u32> {
        &self.lost
    }

    pub fn is_lost(&self, passenger: u32) -> bool {
        self.lost.contains(&passenger)
    }

    /// Returns `Some(k)` when the lost set is exactly `{1, …, k}` (`k = 0`
    /// for the empty set). The closed-form occupancy probabilities and the
    /// displacement-profile machinery apply only in this regime.
    pub fn consecutive_k(&self) -> Option<u32> {
        let k = self.lost.len() as u32;
        if self.lost.iter().enumerate().all(|(i, &p)| p == i as u32 + 1) {
            Some(k)
        } else {
            None
        }
    }

    /// Seat relabeling for a consecutive lost set `{1..k}`: seat `j <= k`
    /// becomes `n + j`, so every displaced passenger moves strictly
    /// rightward in the relabeled seat set `{k+1, …, n+k}`.
    pub fn relabel_seat(&self, k: u32, seat: u32) -> u32 {
        debug_assert!(self.consecutive_k() == Some(k));
        if seat <= k {
            self.n + seat
        } else {
            seat
        }
    }
}

/// A completed seating: `seat_of(m)` is the seat passenger `m` ended up in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Outcome {
    seat_of: Vec<u32>,
}

impl Outcome {
    /// Wraps a seat assignment, verifying it is a bijection `1..=n -> 1..=n`.
    pub fn from_seats(seat_of: Vec<u32>) -> Result<Self, ModelError> {
        let n = seat_of.len() as u32;
        let mut taken = vec![false; seat_of.len()];
        for (i, &s) in seat_of.iter().enumerate() {
            if s < 1 || s > n {
                return Err(ModelError::NotBijection(format!(
                    "passenger {} assigned seat {} outside 1..={}",
                    i + 1,
                    s,
                    n
                )));
            }
            if taken[(s - 1) as usize] {
                return Err(ModelError::NotBijection(format!("seat {s} assigned twice")));
            }
            taken[(s - 1) as usize] = true;
        }
        Ok(Self { seat_of })
    }

    pub fn identity(n: u32) -> Self {
        Self {
            seat_of: (1..=n).collect(),
        }
    }

    /// For samplers and enumerators whose construction already guarantees a
    /// bijection.
    pub(crate) fn from_seats_unchecked(seat_of: Vec<u32>) -> Self {
        debug_assert!(Self::from_seats(seat_of.clone()).is_ok());
        Self { seat_of }
    }

    pub fn n(&self) -> u32 {
        self.seat_of.len() as u32
    }

    pub fn seat_of(&self, passenger: u32) -> u32 {
        self.seat_of[(passenger - 1) as usize]
    }

    pub fn seats(&self) -> &[u32] {
        &self.seat_of
    }

    pub fn is_identity(&self) -> bool {
        self.seat_of.iter().enumerate().all(|(i, &s)| s == i as u32 + 1)
    }
}

/// One audited random choice: who chose, what they took, and how many empty
/// seats they chose among. The probability of a trace is the product of
/// `1/options` over its entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub passenger: u32,
    pub seat: u32,
    pub options: u32,
}

/// The ordered list of random choices behind an [`Outcome`]. Only lost-pass
/// passengers and displaced passengers appear.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn new(entries: Vec<TraceEntry>) -> Self {
        Self { entries }
    }
}

/// The occupancy indicators `D_m`: for each passenger `m` outside the lost
/// set, whether seat `m` was already taken when `m` boarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyEvents {
    occupied: Vec<Option<bool>>,
}

impl OccupancyEvents {
    /// `Some(D_m)` for `m` outside the lost set, `None` for lost passengers
    /// (the event is not defined for them).
    pub fn get(&self, passenger: u32) -> Option<bool> {
        self.occupied[(passenger - 1) as usize]
    }

    /// Iterates `(m, D_m)` over passengers with a defined event.
    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|d| (i as u32 + 1, d)))
    }
}

/// Tracks the set of empty seats with O(1) uniform pick and O(1) targeted
/// removal: a dense array of empty seats plus a seat -> position index.
#[derive(Debug, Clone)]
pub(crate) struct SeatPool {
    empty: Vec<u32>,
    // pos[seat - 1] = index into `empty`, or NONE when occupied
    pos: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl SeatPool {
    pub fn new(n: u32) -> Self {
        Self {
            empty: (1..=n).collect(),
            pos: (0..n).collect(),
        }
    }

    /// Refills to all-empty without reallocating.
    pub fn reset(&mut self, n: u32) {
        self.empty.clear();
        self.empty.extend(1..=n);
        self.pos.clear();
        self.pos.extend(0..n);
    }

    pub fn len(&self) -> u32 {
        self.empty.len() as u32
    }

    pub fn is_empty_seat(&self, seat: u32) -> bool {
        self.pos[(seat - 1) as usize] != NONE
    }

    pub fn nth(&self, idx: u32) -> u32 {
        self.empty[idx as usize]
    }

    pub fn empty_seats(&self) -> &[u32] {
        &self.empty
    }

    /// Removes `seat` by swapping it with the last element.
    pub fn take(&mut self, seat: u32) {
        let idx = self.pos[(seat - 1) as usize];
        debug_assert!(idx != NONE, "seat {seat} already occupied");
        let last = *self.empty.last().expect("pool not empty");
        self.empty[idx as usize] = last;
        self.pos[(last - 1) as usize] = idx;
        self.empty.pop();
        self.pos[(seat - 1) as usize] = NONE;
    }

    /// Reverses a `take` during enumeration backtracking. The seat set is
    /// restored exactly; the internal order may differ.
    pub fn put_back(&mut self, seat: u32) {
        debug_assert!(self.pos[(seat - 1) as usize] == NONE, "seat {seat} empty");
        self.pos[(seat - 1) as usize] = self.empty.len() as u32;
        self.empty.push(seat);
    }
}

/// Deterministically reconstructs the outcome encoded by `trace`, consuming
/// one entry exactly when the boarding rule calls for a random choice.
pub fn replay(instance: &Instance, trace: &Trace) -> Result<Outcome, ReplayError> {
    let n = instance.n();
    let mut pool = SeatPool::new(n);
    let mut seat_of = vec![0u32; n as usize];
    let mut entries = trace.entries.iter();

    for m in 1..=n {
        let must_choose = instance.is_lost(m) || !pool.is_empty_seat(m);
        let seat = if must_choose {
            let entry = *entries
                .next()
                .ok_or(ReplayError::TraceTooShort { passenger: m })?;
            if entry.passenger != m {
                // A choice recorded for somebody else cannot be this
                // passenger's pick.
                return Err(ReplayError::IllegalChoice {
                    passenger: m,
                    seat: entry.seat,
                });
            }
            if entry.options != pool.len() {
                return Err(ReplayError::OptionCountMismatch {
                    passenger: m,
                    recorded: entry.options,
                    actual: pool.len(),
                });
            }
            if entry.seat < 1 || entry.seat > n || !pool.is_empty_seat(entry.seat) {
                return Err(ReplayError::IllegalChoice {
                    passenger: m,
                    seat: entry.seat,
                });
            }
            entry.seat
        } else {
            m
        };
        pool.take(seat);
        seat_of[(m - 1) as usize] = seat;
    }

    let leftover = entries.count();
    if leftover > 0 {
        return Err(ReplayError::TraceTooLong(leftover));
    }
    Ok(Outcome { seat_of })
}

/// Computes the occupancy events of an outcome: `D_m` holds exactly when
/// passenger `m` (not in the lost set) did not get seat `m`.
pub fn events_of(instance: &Instance, outcome: &Outcome) -> OccupancyEvents {
    let occupied = (1..=instance.n())
        .map(|m| {
            if instance.is_lost(m) {
                None
            } else {
                Some(outcome.seat_of(m) != m)
            }
        })
        .collect();
    OccupancyEvents { occupied }
}
