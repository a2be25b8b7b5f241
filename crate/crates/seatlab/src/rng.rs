//! Deterministic random number generation.
//!
//! Every stochastic routine in this crate draws from [`SplitMix64`], seeded
//! per trial through [`mix64`]. The exact bit-level contract matters: batch
//! results are compared byte-for-byte across runs and across worker counts,
//! so all sampling primitives are pinned here.
//!
//! The generator state advances by the 64-bit golden-ratio constant
//! `0x9E3779B97F4A7C15` and each output is the "mix13" finalizer of the new
//! state:
//!
//! ```text
//! z  = state += 0x9E3779B97F4A7C15
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//! z ^= z >> 27;  z *= 0x94D049BB133111EB
//! z ^= z >> 31
//! ```
//!
//! Because the state walk is a plain counter, the `t`-th output is a pure
//! function of `(seed, t)`; [`mix64`] evaluates it directly, which is what
//! makes per-trial seeding order-independent and therefore parallel-safe.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for trial `t` from a master seed.
///
/// This is output `t + 1` of the SplitMix64 stream started at `master_seed`,
/// computed in O(1): `finalize(master_seed + (t + 1) * GAMMA)`. Trials seeded
/// this way can be processed in any order, by any number of workers, without
/// changing the numbers drawn in each trial.
#[inline]
pub fn mix64(master_seed: u64, t: u64) -> u64 {
    finalize(master_seed.wrapping_add(t.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// SplitMix64 generator (public-domain algorithm by Sebastiano Vigna).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Per-trial generator: `SplitMix64::new(mix64(master_seed, t))`.
    pub fn for_trial(master_seed: u64, t: u64) -> Self {
        Self::new(mix64(master_seed, t))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        finalize(self.state)
    }

    /// Uniform integer in `[0, bound)` by the multiply-shift interval trick:
    /// `(next_u64() * bound) >> 64` on 128 bits. Rejection-free; the bias is
    /// below `bound / 2^64` and the mapping is fixed so that every
    /// implementation of this contract draws identical values.
    ///
    /// Panics if `bound == 0`.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    /// Uniform `f64` in `[0, 1)` from the top 53 bits of one output.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle: for `i` from `len-1` down to `1`,
    /// swap `slice[i]` with `slice[next_below(i + 1)]`.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            slice.swap(i, j);
        }
    }
}
