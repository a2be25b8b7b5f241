//! The Red Now card game.
//!
//! A deck of `r` red and `b` black cards is revealed one at a time. Exactly
//! once, just before a card is exposed (possibly before the very first),
//! the player must say "Red Now"; they win when that next card is red. A
//! player who never calls is force-called before the final card.
//!
//! The headline identity, checked exhaustively here: *every* strategy wins
//! with probability exactly `r/(r+b)`, because the game is unchanged if the
//! called-for card is taken from the bottom of the deck instead of the top,
//! and the bottom card is red with probability `r/(r+b)` no matter what the
//! player does. [`win_probability_exact`] evaluates both readings
//! ([`Mode::NextCard`] and [`Mode::BottomCard`]) so the equivalence itself
//! is a machine-checked rational identity rather than an argument.
//!
//! Strategies observe the full color prefix, not just counts, so the
//! invariance is exercised in its strongest form; [`Strategy::Seeded`]
//! supplies arbitrary reproducible decision tables for property tests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::ExactProb;
use crate::rng::{mix64, SplitMix64};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RednowError {
    #[error("deck must hold at least one card")]
    EmptyDeck,
    #[error("deck has {sequences} color sequences, over the bound of {bound}")]
    TooLarge { bound: u128, sequences: u128 },
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("malformed strategy table: {0}")]
    MalformedTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Black,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deck {
    reds: u32,
    blacks: u32,
}

impl Deck {
    pub fn new(reds: u32, blacks: u32) -> Result<Self, RednowError> {
        if u64::from(reds) + u64::from(blacks) < 1 {
            return Err(RednowError::EmptyDeck);
        }
        Ok(Self { reds, blacks })
    }

    pub fn reds(&self) -> u32 {
        self.reds
    }

    pub fn blacks(&self) -> u32 {
        self.blacks
    }

    pub fn size(&self) -> u32 {
        self.reds + self.blacks
    }

    /// Number of distinct color sequences, `C(r+b, r)`.
    pub fn sequence_count(&self) -> u128 {
        let (n, k) = (u128::from(self.size()), u128::from(self.reds.min(self.blacks)));
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Call,
    Wait,
}

/// Whether the called-for card comes from the top of the remaining deck or
/// from its bottom. The whole reason every strategy ties at `r/(r+b)` is
/// that these two games are the same game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    NextCard,
    BottomCard,
}

/// A calling strategy: a total function from the observed color prefix to
/// call-or-wait. All variants are deterministic values, so plays are
/// reproducible.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Call before the first card.
    Immediate,
    /// Wait until the forced call before the last card.
    LastChance,
    /// Call once `remaining reds / remaining cards >= theta`.
    Threshold(f64),
    /// Call once the prefix ends with `j` consecutive black cards
    /// (`j = 0` calls immediately).
    FirstBlackRun(u32),
    /// Pseudo-random decision table keyed by the prefix, reproducible from
    /// the seed.
    Seeded(u64),
    /// Explicit decision table; prefixes not listed fall back to `default`.
    Table {
        entries: BTreeMap<Vec<Color>, Action>,
        default: Action,
    },
}

impl Strategy {
    /// The decision on a given prefix. `deck` supplies the initial counts
    /// so count-based strategies can derive the remaining composition.
    pub fn decide(&self, deck: &Deck, prefix: &[Color]) -> Action {
        match self {
            Strategy::Immediate => Action::Call,
            Strategy::LastChance => Action::Wait,
            Strategy::Threshold(theta) => {
                let seen_reds = prefix.iter().filter(|&&c| c == Color::Red).count() as u32;
                let remaining_reds = deck.reds - seen_reds;
                let remaining = deck.size() - prefix.len() as u32;
                if f64::from(remaining_reds) / f64::from(remaining) >= *theta {
                    Action::Call
                } else {
                    Action::Wait
                }
            }
            Strategy::FirstBlackRun(j) => {
                let run = prefix
                    .iter()
                    .rev()
                    .take_while(|&&c| c == Color::Black)
                    .count() as u32;
                if run >= *j {
                    Action::Call
                } else {
                    Action::Wait
                }
            }
            Strategy::Seeded(seed) => {
                // prefix encoded with a leading 1 bit so lengths disambiguate
                let mut key = 1u64;
                for &c in prefix {
                    key = (key << 1) | u64::from(c == Color::Red);
                }
                if mix64(*seed, key) & 1 == 0 {
                    Action::Call
                } else {
                    Action::Wait
                }
            }
            Strategy::Table { entries, default } => {
                entries.get(prefix).copied().unwrap_or(*default)
            }
        }
    }

    /// Parses a builtin name: `immediate`, `last-chance`, `threshold:0.6`,
    /// `first-black-run:2`, or `random:7`.
    pub fn parse(name: &str) -> Result<Self, RednowError> {
        let unknown = || RednowError::UnknownStrategy(name.to_owned());
        match name {
            "immediate" => return Ok(Strategy::Immediate),
            "last-chance" => return Ok(Strategy::LastChance),
            _ => {}
        }
        if let Some((kind, arg)) = name.split_once(':') {
            return match kind {
                "threshold" => arg.parse().map(Strategy::Threshold).map_err(|_| unknown()),
                "first-black-run" => arg.parse().map(Strategy::FirstBlackRun).map_err(|_| unknown()),
                "random" => arg.parse().map(Strategy::Seeded).map_err(|_| unknown()),
                _ => Err(unknown()),
            };
        }
        Err(unknown())
    }

    /// Loads the JSON decision-table format:
    /// `{"type":"table","entries":[{"prefix":"RBR","action":"call"}],"default":"wait"}`.
    pub fn from_json(json: &str) -> Result<Self, RednowError> {
        let spec: TableSpec =
            serde_json::from_str(json).map_err(|e| RednowError::MalformedTable(e.to_string()))?;
        if spec.kind != "table" {
            return Err(RednowError::MalformedTable(format!(
                "unsupported type {:?}",
                spec.kind
            )));
        }
        let mut entries = BTreeMap::new();
        for e in spec.entries {
            let prefix = e
                .prefix
                .chars()
                .map(|c| match c {
                    'R' => Ok(Color::Red),
                    'B' => Ok(Color::Black),
                    other => Err(RednowError::MalformedTable(format!(
                        "bad color {other:?} in prefix {:?}",
                        e.prefix
                    ))),
                })
                .collect::<Result<Vec<Color>, _>>()?;
            entries.insert(prefix, parse_action(&e.action)?);
        }
        Ok(Strategy::Table {
            entries,
            default: parse_action(&spec.default)?,
        })
    }
}

#[derive(Deserialize)]
struct TableSpec {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    entries: Vec<TableEntry>,
    default: String,
}

#[derive(Deserialize)]
struct TableEntry {
    prefix: String,
    action: String,
}

fn parse_action(s: &str) -> Result<Action, RednowError> {
    match s {
        "call" => Ok(Action::Call),
        "wait" => Ok(Action::Wait),
        other => Err(RednowError::MalformedTable(format!("bad action {other:?}"))),
    }
}

/// Named strategies exercised by the test suite and the CLI.
pub fn strategy_library() -> Vec<(String, Strategy)> {
    let mut lib = vec![
        ("immediate".to_owned(), Strategy::Immediate),
        ("last-chance".to_owned(), Strategy::LastChance),
    ];
    for theta in [0.25, 0.5, 0.75] {
        lib.push((format!("threshold:{theta}"), Strategy::Threshold(theta)));
    }
    for j in [1, 2, 3] {
        lib.push((format!("first-black-run:{j}"), Strategy::FirstBlackRun(j)));
    }
    lib
}

/// Plays one revealed sequence; returns the call position `p` (the call is
/// voiced just before card `p + 1` is exposed). The strategy is consulted
/// on prefixes of length `0..=len-1` and a non-call at `len - 1` becomes
/// the forced call, so `p <= len - 1` always holds and every play calls
/// exactly once.
pub fn play(deck: &Deck, sequence: &[Color], strategy: &Strategy) -> usize {
    let last = sequence.len() - 1;
    for p in 0..last {
        if strategy.decide(deck, &sequence[..p]) == Action::Call {
            return p;
        }
    }
    last
}

fn wins(deck: &Deck, sequence: &[Color], strategy: &Strategy, mode: Mode) -> bool {
    let p = play(deck, sequence, strategy);
    match mode {
        Mode::NextCard => sequence[p] == Color::Red,
        Mode::BottomCard => *sequence.last().expect("nonempty deck") == Color::Red,
    }
}

/// Default cap on `C(r+b, r)` for exhaustive evaluation.
pub const DEFAULT_MAX_SEQUENCES: u128 = 1_000_000;

/// Exact win probability by enumerating every distinct color sequence with
/// equal weight `1/C(r+b, r)`.
pub fn win_probability_exact(
    deck: &Deck,
    strategy: &Strategy,
    mode: Mode,
) -> Result<ExactProb, RednowError> {
    win_probability_exact_bounded(deck, strategy, mode, DEFAULT_MAX_SEQUENCES)
}

pub fn win_probability_exact_bounded(
    deck: &Deck,
    strategy: &Strategy,
    mode: Mode,
    bound: u128,
) -> Result<ExactProb, RednowError> {
    let sequences = deck.sequence_count();
    if sequences > bound {
        return Err(RednowError::TooLarge { bound, sequences });
    }

    // lexicographically first arrangement (Red < Black): all reds up front
    let mut sequence = vec![Color::Red; deck.reds as usize];
    sequence.extend(std::iter::repeat_n(Color::Black, deck.blacks as usize));

    let mut seen: u64 = 0;
    let mut won: u64 = 0;
    loop {
        seen += 1;
        if wins(deck, &sequence, strategy, mode) {
            won += 1;
        }
        if !next_multiset_permutation(&mut sequence) {
            break;
        }
    }
    debug_assert_eq!(u128::from(seen), sequences);
    Ok(ExactProb::ratio(won, seen))
}

/// Advances to the lexicographic successor among multiset permutations;
/// `false` once the sequence is the last (non-increasing) arrangement.
fn next_multiset_permutation<T: Ord>(seq: &mut [T]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let pivot = i - 1;
    let mut j = seq.len() - 1;
    while seq[j] <= seq[pivot] {
        j -= 1;
    }
    seq.swap(pivot, j);
    seq[pivot + 1..].reverse();
    true
}

/// Outcome of a Monte Carlo run; deterministic in `(deck, strategy,
/// trials, master_seed)` by the same per-trial seeding as the boarding
/// simulator.
#[derive(Debug, Clone, Serialize)]
pub struct WinCount {
    pub trials: u64,
    pub wins: u64,
    pub master_seed: u64,
}

impl WinCount {
    pub fn frequency(&self) -> f64 {
        self.wins as f64 / self.trials as f64
    }
}

/// Estimates the win probability by Fisher-Yates shuffling the deck each
/// trial (trial `t` draws from `SplitMix64::for_trial(master_seed, t)`).
pub fn win_frequency_mc(
    deck: &Deck,
    strategy: &Strategy,
    mode: Mode,
    trials: u64,
    master_seed: u64,
) -> WinCount {
    assert!(trials >= 1, "trials must be at least 1");
    let mut base = vec![Color::Red; deck.reds as usize];
    base.extend(std::iter::repeat_n(Color::Black, deck.blacks as usize));

    let mut sequence = base.clone();
    let mut won = 0u64;
    for t in 0..trials {
        let mut rng = SplitMix64::for_trial(master_seed, t);
        sequence.copy_from_slice(&base);
        rng.shuffle(&mut sequence);
        if wins(deck, &sequence, strategy, mode) {
            won += 1;
        }
    }
    WinCount {
        trials,
        wins: won,
        master_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(deck: &Deck, strategy: &Strategy) -> ExactProb {
        win_probability_exact(deck, strategy, Mode::NextCard).unwrap()
    }

    #[test]
    fn immediate_call_on_balanced_deck_is_half() {
        let deck = Deck::new(4, 4).unwrap();
        assert_eq!(exact(&deck, &Strategy::Immediate), ExactProb::ratio(1, 2));
    }

    #[test]
    fn single_red_card_always_wins() {
        let deck = Deck::new(1, 0).unwrap();
        for (_, s) in strategy_library() {
            assert_eq!(exact(&deck, &s), ExactProb::one());
        }
    }

    #[test]
    fn three_reds_one_black_any_strategy_three_quarters() {
        let deck = Deck::new(3, 1).unwrap();
        for (name, s) in strategy_library() {
            assert_eq!(exact(&deck, &s), ExactProb::ratio(3, 4), "strategy {name}");
        }
        for seed in 0..20 {
            assert_eq!(exact(&deck, &Strategy::Seeded(seed)), ExactProb::ratio(3, 4));
        }
    }

    #[test]
    fn invariance_and_bottom_card_equivalence_small_sweep() {
        for total in 1..=6u32 {
            for reds in 0..=total {
                let deck = Deck::new(reds, total - reds).unwrap();
                let expected = ExactProb::ratio(u64::from(reds), u64::from(total));
                let mut strategies: Vec<Strategy> =
                    strategy_library().into_iter().map(|(_, s)| s).collect();
                strategies.extend((0..10).map(Strategy::Seeded));
                for s in &strategies {
                    let next = win_probability_exact(&deck, s, Mode::NextCard).unwrap();
                    let bottom = win_probability_exact(&deck, s, Mode::BottomCard).unwrap();
                    assert_eq!(next, expected, "deck ({reds},{}) {s:?}", total - reds);
                    assert_eq!(next, bottom);
                }
            }
        }
    }

    #[test]
    fn threshold_calls_on_majority() {
        // prefix "B" from deck (1,1): 1 red of 1 remaining card
        let deck = Deck::new(1, 1).unwrap();
        let s = Strategy::Threshold(0.5);
        assert_eq!(s.decide(&deck, &[Color::Black]), Action::Call);
        assert_eq!(s.decide(&deck, &[]), Action::Call); // 1/2 >= 0.5
        let picky = Strategy::Threshold(0.9);
        assert_eq!(picky.decide(&deck, &[]), Action::Wait);
    }

    #[test]
    fn immediate_calls_on_empty_prefix() {
        let deck = Deck::new(2, 2).unwrap();
        assert_eq!(Strategy::Immediate.decide(&deck, &[]), Action::Call);
    }

    #[test]
    fn seeded_strategy_reproducible() {
        let deck = Deck::new(3, 3).unwrap();
        let a = Strategy::Seeded(7);
        let b = Strategy::Seeded(7);
        let mut prefix = Vec::new();
        for &c in &[Color::Red, Color::Black, Color::Black, Color::Red] {
            assert_eq!(a.decide(&deck, &prefix), b.decide(&deck, &prefix));
            prefix.push(c);
        }
    }

    #[test]
    fn play_calls_exactly_once_within_bounds() {
        let deck = Deck::new(2, 2).unwrap();
        let never = Strategy::Table {
            entries: BTreeMap::new(),
            default: Action::Wait,
        };
        let mut sequence = vec![Color::Red, Color::Red, Color::Black, Color::Black];
        loop {
            // a never-calling strategy is forced exactly before the last card
            assert_eq!(play(&deck, &sequence, &never), 3);
            assert!(play(&deck, &sequence, &Strategy::Immediate) == 0);
            if !next_multiset_permutation(&mut sequence) {
                break;
            }
        }
    }

    #[test]
    fn table_strategy_from_json() {
        let json = r#"{
            "type": "table",
            "entries": [
                {"prefix": "RB", "action": "call"},
                {"prefix": "", "action": "wait"}
            ],
            "default": "wait"
        }"#;
        let s = Strategy::from_json(json).unwrap();
        let deck = Deck::new(2, 2).unwrap();
        assert_eq!(s.decide(&deck, &[Color::Red, Color::Black]), Action::Call);
        assert_eq!(s.decide(&deck, &[Color::Red]), Action::Wait);
        // still r/(r+b)
        assert_eq!(exact(&deck, &s), ExactProb::ratio(1, 2));
        assert!(Strategy::from_json("{\"type\":\"oops\",\"default\":\"wait\"}").is_err());
    }

    #[test]
    fn sequence_bound_enforced() {
        let deck = Deck::new(15, 15).unwrap();
        assert!(matches!(
            win_probability_exact(&deck, &Strategy::Immediate, Mode::NextCard),
            Err(RednowError::TooLarge { .. })
        ));
    }

    #[test]
    fn sequence_count_examples() {
        assert_eq!(Deck::new(3, 1).unwrap().sequence_count(), 4);
        assert_eq!(Deck::new(5, 3).unwrap().sequence_count(), 56);
        assert_eq!(Deck::new(26, 26).unwrap().sequence_count(), 495918532948104);
    }

    #[test]
    fn mc_matches_exact_for_small_deck() {
        let deck = Deck::new(5, 3).unwrap();
        let s = Strategy::Threshold(0.5);
        let mc = win_frequency_mc(&deck, &s, Mode::NextCard, 100_000, 11);
        let expected = 5.0f64 / 8.0;
        let sigma = (expected * (1.0 - expected) / 100_000.0).sqrt();
        assert!((mc.frequency() - expected).abs() < 4.0 * sigma, "freq {}", mc.frequency());
        // byte-level determinism
        let again = win_frequency_mc(&deck, &s, Mode::NextCard, 100_000, 11);
        assert_eq!(mc.wins, again.wins);
    }

    #[test]
    fn full_deck_frequency_lands_near_half() {
        // the conventional 52-card pack: a million shuffles per strategy,
        // each within the 3-sigma band 0.5 +/- 0.0015; theta > 0.5 makes
        // the threshold player genuinely wait for a red majority
        let deck = Deck::new(26, 26).unwrap();
        for s in [Strategy::Threshold(0.51), Strategy::Immediate] {
            let mc = win_frequency_mc(&deck, &s, Mode::NextCard, 1_000_000, 3);
            assert!(
                (mc.frequency() - 0.5).abs() < 0.0015,
                "{s:?} freq {}",
                mc.frequency()
            );
        }
    }

    #[test]
    fn parse_builtin_names() {
        assert_eq!(Strategy::parse("immediate").unwrap(), Strategy::Immediate);
        assert_eq!(Strategy::parse("last-chance").unwrap(), Strategy::LastChance);
        assert_eq!(Strategy::parse("threshold:0.6").unwrap(), Strategy::Threshold(0.6));
        assert_eq!(
            Strategy::parse("first-black-run:2").unwrap(),
            Strategy::FirstBlackRun(2)
        );
        assert_eq!(Strategy::parse("random:7").unwrap(), Strategy::Seeded(7));
        assert!(Strategy::parse("nope").is_err());
    }
}
