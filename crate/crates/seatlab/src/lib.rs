//! Exact and Monte Carlo analysis of the lost-boarding-pass seating process.
//!
//! A fully booked plane with seats `1..=n` boards in label order. Passengers
//! in the *lost* set have no boarding pass and pick a uniformly random empty
//! seat; everyone else sits in their own seat if it is free and otherwise
//! picks a uniformly random empty seat. This crate provides:
//!
//! - [`model`]: the domain types ([`Instance`], [`Outcome`], [`Trace`]) and a
//!   deterministic rule-replay checker that audits every random choice.
//! - [`sim`]: a seed-reproducible batch sampler of the forward process whose
//!   results are independent of the worker count.
//! - [`exact`]: exact rational distributions over outcomes, occupancy
//!   probabilities `Pr(D_m)` via bitmask dynamic programming, the closed form
//!   `k/(n-m+k+1)` for consecutive lost sets, and an exhaustive independence
//!   checker for the occupancy events.
//! - [`backward`]: the seat-coloring construction that samples the seating
//!   plan backwards (color seats black/red, then walk same-shade chains), the
//!   record-value coupling for a single lost pass, and exact distributional
//!   equivalence checks against the forward process.
//! - [`pd`]: normalized displacement profiles per chain and a stick-breaking
//!   sampler used as the reference for their large-`n` limit.
//! - [`stats`]: Wilson intervals, chi-square tests and the two-sample
//!   Kolmogorov-Smirnov test backing the statistical checks.
//! - [`rednow`]: the Red Now card game, with exact exhaustive evaluation
//!   showing every calling strategy wins with probability `r/(r+b)`.
//!
//! All probability-carrying APIs return [`ExactProb`], an arbitrary-precision
//! rational; floating point appears only in `pd` and `stats`.

#![forbid(unsafe_code)]

pub mod backward;
pub mod exact;
pub mod model;
pub mod pd;
pub mod prob;
pub mod rednow;
pub mod rng;
pub mod sim;
pub mod stats;

pub use model::{Instance, OccupancyEvents, Outcome, Trace};
pub use prob::ExactProb;
