//! The backward seat-coloring construction.
//!
//! Instead of boarding passengers one by one, color the relabeled seat set
//! `{k+1, …, n+k}` first: seat `m <= n` is red with probability
//! `k/(n-m+k+1)` (black otherwise), every red seat gets an independent
//! uniform shade in `{1..k}`, and the `k` terminal seats `n+1..n+k` are red
//! with their shades assigned by a uniform random permutation. Seating is
//! then deterministic: passenger `i` sits in the earliest seat of shade
//! `i`, the passenger displaced from there sits in the next seat of that
//! shade, and so on into the terminal seat; black seats keep their own
//! passengers. The resulting outcome distribution equals the forward
//! process exactly, which [`backward_distribution`] verifies by exhaustive
//! rational enumeration.
//!
//! For `k = 1` the red marginals are the harmonic `1/s` for `s = n-m+2`,
//! which is also the law of record values: [`sample_coloring_via_records`]
//! colors seat `m` red exactly when `n-m+2` is a record in a fresh uniform
//! sequence, and the coupling is exact, not approximate (records at
//! distinct indices are independent). [`record_red_pattern_distribution`]
//! proves that over all `n!` relative orders.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::ExactDistribution;
use crate::model::Outcome;
use crate::prob::ExactProb;
use crate::rng::SplitMix64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BackwardError {
    #[error("malformed coloring: {0}")]
    MalformedColoring(String),
    #[error("backward enumeration needs {needed} weighted colorings, over the bound of {bound}")]
    TooLarge { bound: u128, needed: u128 },
}

/// A colored relabeled seat set. Index `i` of `shades` is seat `k + 1 + i`;
/// `None` is black, `Some(s)` is red with shade `s ∈ 1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ColoredSeatsRepr", into = "ColoredSeatsRepr")]
pub struct ColoredSeats {
    n: u32,
    k: u32,
    shades: Vec<Option<u32>>,
}

impl ColoredSeats {
    pub fn new(n: u32, k: u32, shades: Vec<Option<u32>>) -> Result<Self, BackwardError> {
        let colored = Self { n, k, shades };
        colored.validate()?;
        Ok(colored)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Seat labels in the relabeled space, `k+1 ..= n+k`.
    pub fn seats(&self) -> impl Iterator<Item = u32> + '_ {
        self.k + 1..=self.n + self.k
    }

    pub fn shade_of(&self, seat: u32) -> Option<u32> {
        self.shades[(seat - self.k - 1) as usize]
    }

    fn validate(&self) -> Result<(), BackwardError> {
        if self.k < 1 || self.n < self.k + 1 {
            return Err(BackwardError::MalformedColoring(format!(
                "need n >= k+1 >= 2, got n={} k={}",
                self.n, self.k
            )));
        }
        if self.shades.len() != self.n as usize {
            return Err(BackwardError::MalformedColoring(format!(
                "expected {} seats, got {}",
                self.n,
                self.shades.len()
            )));
        }
        for (i, shade) in self.shades.iter().enumerate() {
            if let Some(s) = shade {
                if *s < 1 || *s > self.k {
                    return Err(BackwardError::MalformedColoring(format!(
                        "seat {} has shade {} outside 1..={}",
                        self.k + 1 + i as u32,
                        s,
                        self.k
                    )));
                }
            }
        }
        // terminal seats n+1..n+k: all red, shades a bijection onto 1..=k
        let mut seen = vec![false; self.k as usize];
        for seat in self.n + 1..=self.n + self.k {
            match self.shade_of(seat) {
                None => {
                    return Err(BackwardError::MalformedColoring(format!(
                        "terminal seat {seat} is black"
                    )))
                }
                Some(s) => {
                    if seen[(s - 1) as usize] {
                        return Err(BackwardError::MalformedColoring(format!(
                            "shade {s} appears on two terminal seats"
                        )));
                    }
                    seen[(s - 1) as usize] = true;
                }
            }
        }
        Ok(())
    }
}

/// Serialized form pinned by the coloring JSON interface:
/// `{"n":…,"k":…,"colors":[{"seat":m,"shade":i|null},…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ColoredSeatsRepr {
    n: u32,
    k: u32,
    colors: Vec<SeatColorRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeatColorRepr {
    seat: u32,
    shade: Option<u32>,
}

impl From<ColoredSeats> for ColoredSeatsRepr {
    fn from(c: ColoredSeats) -> Self {
        let colors = c
            .seats()
            .map(|seat| SeatColorRepr {
                seat,
                shade: c.shade_of(seat),
            })
            .collect();
        Self { n: c.n, k: c.k, colors }
    }
}

impl TryFrom<ColoredSeatsRepr> for ColoredSeats {
    type Error = String;

    fn try_from(repr: ColoredSeatsRepr) -> Result<Self, String> {
        let mut shades = vec![None; repr.n as usize];
        for c in &repr.colors {
            let idx = c
                .seat
                .checked_sub(repr.k + 1)
                .filter(|&i| i < repr.n)
                .ok_or_else(|| format!("seat {} outside {}..={}", c.seat, repr.k + 1, repr.n + repr.k))?;
            shades[idx as usize] = c.shade;
        }
        ColoredSeats::new(repr.n, repr.k, shades).map_err(|e| e.to_string())
    }
}

/// Samples a coloring from the product law. Draw order is fixed for
/// reproducibility: seats `k+1..=n` ascending (one bounded draw for the
/// color, one more for the shade only when red), then a Fisher-Yates
/// shuffle of the terminal shades.
pub fn sample_coloring(n: u32, k: u32, rng: &mut SplitMix64) -> ColoredSeats {
    assert!(k >= 1 && n > k, "need k >= 1 and n >= k+1");
    let mut shades: Vec<Option<u32>> = Vec::with_capacity(n as usize);
    for m in k + 1..=n {
        let span = u64::from(n - m + k + 1);
        if rng.next_below(span) < u64::from(k) {
            let shade = 1 + rng.next_below(u64::from(k)) as u32;
            shades.push(Some(shade));
        } else {
            shades.push(None);
        }
    }
    let mut terminal: Vec<u32> = (1..=k).collect();
    rng.shuffle(&mut terminal);
    shades.extend(terminal.into_iter().map(Some));
    ColoredSeats { n, k, shades }
}

/// The record-value coupling, `k = 1` only: draw `U_1..U_n` uniform, call
/// `s` a record when `U_s` beats every earlier draw, and color seat `m` red
/// iff `s = n-m+2` is a record. `s = 1` is always a record, so the terminal
/// seat `n+1` is always red, and `Pr(seat m red) = 1/(n-m+2)` with the
/// records (hence the seat colors) independent across seats.
pub fn sample_coloring_via_records(n: u32, rng: &mut SplitMix64) -> ColoredSeats {
    assert!(n >= 2, "need n >= 2 for k = 1");
    let mut record = vec![false; n as usize + 1];
    let mut running_max = f64::NEG_INFINITY;
    for s in 1..=n {
        let u = rng.next_f64();
        if u > running_max {
            record[s as usize] = true;
            running_max = u;
        }
    }
    // seat m <-> s = n - m + 2, for m in 2..=n+1
    let shades = (2..=n + 1)
        .map(|m| record[(n + 2 - m) as usize].then_some(1))
        .collect();
    ColoredSeats { n, k: 1, shades }
}

/// Deterministic seating from a coloring, expressed in original seat
/// labels (`terminal seat n+j` maps back to seat `j`).
pub fn seat_from_coloring(colored: &ColoredSeats) -> Result<Outcome, BackwardError> {
    colored.validate()?;
    let (n, k) = (colored.n, colored.k);
    let mut seat_of = vec![0u32; n as usize];

    for shade in 1..=k {
        let chain: Vec<u32> = colored
            .seats()
            .filter(|&seat| colored.shade_of(seat) == Some(shade))
            .collect();
        // ends at the unique terminal seat of this shade
        let mut passenger = shade;
        for &seat in &chain {
            let original = if seat > n { seat - n } else { seat };
            seat_of[(passenger - 1) as usize] = original;
            if seat <= n {
                passenger = seat;
            }
        }
    }

    for m in 1..=n {
        if seat_of[(m - 1) as usize] == 0 {
            seat_of[(m - 1) as usize] = m;
        }
    }

    Outcome::from_seats(seat_of)
        .map_err(|e| BackwardError::MalformedColoring(format!("chains collided: {e}")))
}

/// Exhaustive distribution of [`seat_from_coloring`] over all colorings,
/// shade assignments and terminal permutations, with exact rational
/// weights: seat `m <= n` is black with weight `(n-m+1)/(n-m+k+1)` and red
/// in a given shade with weight `1/(n-m+k+1)`; each terminal permutation
/// carries `1/k!`.
pub fn backward_distribution(n: u32, k: u32) -> Result<ExactDistribution, BackwardError> {
    backward_distribution_bounded(n, k, crate::exact::DEFAULT_MAX_LEAVES)
}

pub fn backward_distribution_bounded(
    n: u32,
    k: u32,
    bound: u128,
) -> Result<ExactDistribution, BackwardError> {
    assert!(k >= 1 && n > k, "need k >= 1 and n >= k+1");
    let free_seats = (n - k) as usize;
    let mut needed: u128 = 1;
    for _ in 0..free_seats {
        needed = needed.saturating_mul(u128::from(k) + 1);
    }
    for i in 1..=u128::from(k) {
        needed = needed.saturating_mul(i);
    }
    if needed > bound {
        return Err(BackwardError::TooLarge { bound, needed });
    }

    let factorial: BigInt = (1..=u64::from(k)).map(BigInt::from).product();
    let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();

    // digits[i] encodes seat k+1+i: 0 = black, s = red with shade s
    let mut digits = vec![0u32; free_seats];
    loop {
        let mut weight_denom = BigInt::one();
        let mut shades: Vec<Option<u32>> = Vec::with_capacity(n as usize);
        let mut numer = BigInt::one();
        for (i, &digit) in digits.iter().enumerate() {
            let m = k + 1 + i as u32;
            let span = BigInt::from(n - m + k + 1);
            weight_denom *= &span;
            if digit == 0 {
                shades.push(None);
                numer *= BigInt::from(n - m + 1);
            } else {
                shades.push(Some(digit));
            }
        }

        let coloring_weight = BigRational::new(numer, weight_denom * &factorial);
        visit_permutations(k, |perm| {
            let mut full = shades.clone();
            full.extend(perm.iter().map(|&s| Some(s)));
            let colored = ColoredSeats { n, k, shades: full };
            let outcome = seat_from_coloring(&colored).expect("constructed coloring is valid");
            *acc.entry(outcome.seats().to_vec())
                .or_insert_with(BigRational::zero) += &coloring_weight;
        });

        // next mixed-radix value, base k+1 per digit
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(ExactDistribution::from_map(acc));
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

/// Calls `f` with every permutation of `1..=k` (Heap's algorithm).
fn visit_permutations(k: u32, mut f: impl FnMut(&[u32])) {
    let mut items: Vec<u32> = (1..=k).collect();
    let len = items.len();
    let mut stack = vec![0usize; len];
    f(&items);
    let mut i = 1;
    while i < len {
        if stack[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(stack[i], i);
            }
            f(&items);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
}

/// Red-pattern distribution of the record coupling, exhaustively over all
/// `n!` relative orders of the uniforms (records only depend on relative
/// order, so this is exact). Key `i` of the pattern is seat `i + 2`.
pub fn record_red_pattern_distribution(n: u32) -> BTreeMap<Vec<bool>, ExactProb> {
    assert!(n >= 2, "need n >= 2");
    let factorial: BigInt = (1..=u64::from(n)).map(BigInt::from).product();
    let weight = BigRational::new(BigInt::one(), factorial);
    let mut acc: BTreeMap<Vec<bool>, BigRational> = BTreeMap::new();

    visit_permutations(n, |ranks| {
        // ranks[s-1] is the relative rank of U_s; s is a record iff its
        // rank beats every earlier one
        let mut record = vec![false; n as usize + 1];
        let mut best = 0u32;
        for (i, &r) in ranks.iter().enumerate() {
            if r > best {
                record[i + 1] = true;
                best = r;
            }
        }
        let pattern: Vec<bool> = (2..=n + 1).map(|m| record[(n + 2 - m) as usize]).collect();
        *acc.entry(pattern).or_insert_with(BigRational::zero) += &weight;
    });

    acc.into_iter()
        .map(|(pattern, p)| (pattern, ExactProb::from_big_rational(p)))
        .collect()
}

/// Red-pattern distribution of independent marginals `Pr(seat m red) =
/// 1/(n-m+2)` for `m <= n`, seat `n+1` always red. Same keying as
/// [`record_red_pattern_distribution`].
pub fn independent_red_pattern_distribution(n: u32) -> BTreeMap<Vec<bool>, ExactProb> {
    assert!(n >= 2, "need n >= 2");
    let mut acc = BTreeMap::new();
    // patterns over seats 2..=n; seat n+1 is forced red
    for bits in 0u64..(1 << (n - 1)) {
        let mut pattern = Vec::with_capacity(n as usize);
        let mut p = BigRational::one();
        for (i, m) in (2..=n).enumerate() {
            let s = BigInt::from(n - m + 2);
            let red = bits & (1 << i) != 0;
            if red {
                p *= BigRational::new(BigInt::one(), s);
            } else {
                p *= BigRational::new(&s - BigInt::one(), s);
            }
            pattern.push(red);
        }
        pattern.push(true);
        acc.insert(pattern, ExactProb::from_big_rational(p));
    }
    acc
}
