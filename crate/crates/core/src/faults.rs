//! Error sequences that drive the channel.
//!
//! The primary representation is [`InterleavedTrace`]: one flag per receive
//! event, 1-based, odd events hit terminal A and even events hit terminal B.
//! [`PerRoundTraces`] is the per-terminal view used by the legacy round-based
//! runner.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest trace length accepted by exhaustive enumeration.
pub const MAX_ENUM_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("invalid error-trace character {ch:?} at index {pos}")]
    Parse { pos: usize, ch: char },
    #[error("trace length {requested} exceeds the enumeration bound {max}")]
    BoundExceeded { requested: usize, max: usize },
    #[error("trace lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

/// Per-round error flags for each terminal. Index `k` (0-based here, round
/// `k + 1`) refers to the message arriving at that terminal in that round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerRoundTraces {
    pub err_a: Vec<bool>,
    pub err_b: Vec<bool>,
}

const CANONICAL_A: [bool; 11] = [
    false, false, true, false, false, false, true, false, true, false, false,
];
const CANONICAL_B: [bool; 11] = [
    false, false, true, true, false, true, true, false, true, false, false,
];

impl PerRoundTraces {
    /// The eleven-round error pattern used throughout the reference runs.
    pub fn canonical() -> Self {
        PerRoundTraces {
            err_a: CANONICAL_A.to_vec(),
            err_b: CANONICAL_B.to_vec(),
        }
    }

    pub fn error_free(rounds: usize) -> Self {
        PerRoundTraces {
            err_a: vec![false; rounds],
            err_b: vec![false; rounds],
        }
    }

    pub fn rounds(&self) -> usize {
        self.err_a.len()
    }

    /// 1-based accessor, `false` outside the defined range.
    pub fn a(&self, round: usize) -> bool {
        round >= 1 && self.err_a.get(round - 1).copied().unwrap_or(false)
    }

    pub fn b(&self, round: usize) -> bool {
        round >= 1 && self.err_b.get(round - 1).copied().unwrap_or(false)
    }

    pub fn to_interleaved(&self) -> InterleavedTrace {
        let n = self.err_a.len().max(self.err_b.len());
        let mut bits = Vec::with_capacity(2 * n);
        for k in 1..=n {
            bits.push(self.a(k));
            bits.push(self.b(k));
        }
        InterleavedTrace::new(bits)
    }
}

/// Shorthand for [`PerRoundTraces::canonical`].
pub fn canonical() -> PerRoundTraces {
    PerRoundTraces::canonical()
}

/// One error flag per receive event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InterleavedTrace {
    bits: Vec<bool>,
}

impl InterleavedTrace {
    pub fn new(bits: Vec<bool>) -> Self {
        InterleavedTrace { bits }
    }

    pub fn error_free(n: usize) -> Self {
        InterleavedTrace::new(vec![false; n])
    }

    /// Single error at the given 1-based event.
    pub fn single_error(n: usize, event: usize) -> Self {
        let mut bits = vec![false; n];
        if (1..=n).contains(&event) {
            bits[event - 1] = true;
        }
        InterleavedTrace::new(bits)
    }

    /// Trace number `index` in binary-counting order: event 1 is the least
    /// significant bit.
    pub fn from_index(index: u64, n: usize) -> Self {
        InterleavedTrace::new((0..n).map(|k| (index >> k) & 1 == 1).collect())
    }

    /// Inverse of [`from_index`](Self::from_index). Only meaningful for
    /// `len() <= 64`.
    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| acc | ((b as u64) << k))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// 1-based event accessor.
    pub fn event(&self, k: usize) -> Option<bool> {
        k.checked_sub(1).and_then(|i| self.bits.get(i).copied())
    }

    pub fn error_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Splits back into per-terminal views; an odd trailing event goes to A
    /// and B gets a trailing `false`.
    pub fn to_per_round(&self) -> PerRoundTraces {
        let mut err_a = Vec::new();
        let mut err_b = Vec::new();
        for pair in self.bits.chunks(2) {
            err_a.push(pair[0]);
            err_b.push(pair.get(1).copied().unwrap_or(false));
        }
        PerRoundTraces { err_a, err_b }
    }

    /// Pads with `false` (or truncates) to exactly `n` events.
    pub fn resized(&self, n: usize) -> Self {
        let mut bits = self.bits.clone();
        bits.resize(n, false);
        InterleavedTrace::new(bits)
    }

    /// Pointwise XOR.
    pub fn xor(&self, other: &InterleavedTrace) -> Result<InterleavedTrace, TraceError> {
        if self.len() != other.len() {
            return Err(TraceError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(InterleavedTrace::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        ))
    }
}

impl fmt::Display for InterleavedTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InterleavedTrace {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bits(s)
    }
}

impl Serialize for InterleavedTrace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InterleavedTrace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_bits(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses an error string. `0 f F .` mean no error, `1 t T E e` mean error,
/// `-` is a separator and is skipped. Positions in errors are character
/// indices into the input.
pub fn parse_bits(s: &str) -> Result<InterleavedTrace, TraceError> {
    let mut bits = Vec::with_capacity(s.len());
    for (pos, ch) in s.chars().enumerate() {
        match ch {
            '0' | 'f' | 'F' | '.' => bits.push(false),
            '1' | 't' | 'T' | 'E' | 'e' => bits.push(true),
            '-' => {}
            _ => return Err(TraceError::Parse { pos, ch }),
        }
    }
    Ok(InterleavedTrace::new(bits))
}

fn check_bound(n: usize) -> Result<(), TraceError> {
    if n > MAX_ENUM_LEN {
        return Err(TraceError::BoundExceeded {
            requested: n,
            max: MAX_ENUM_LEN,
        });
    }
    Ok(())
}

/// Every trace of length `n`, in binary-counting order.
pub fn enumerate(n: usize) -> Result<Enumeration, TraceError> {
    check_bound(n)?;
    Ok(Enumeration {
        n,
        indices: 0..(1u64 << n),
    })
}

/// A sub-range of [`enumerate`], for splitting work across workers.
pub fn enumerate_range(n: usize, indices: Range<u64>) -> Result<Enumeration, TraceError> {
    check_bound(n)?;
    let total = 1u64 << n;
    let indices = indices.start.min(total)..indices.end.min(total);
    Ok(Enumeration { n, indices })
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    n: usize,
    indices: Range<u64>,
}

impl Enumeration {
    pub fn len_events(&self) -> usize {
        self.n
    }

    /// Partitions the remaining index range into at most `parts` contiguous
    /// chunks.
    pub fn split(&self, parts: usize) -> Vec<Enumeration> {
        let parts = parts.max(1) as u64;
        let start = self.indices.start;
        let total = self.indices.end - start;
        let chunk = total.div_ceil(parts).max(1);
        (0..parts)
            .map(|p| {
                let lo = (start + p * chunk).min(self.indices.end);
                let hi = (lo + chunk).min(self.indices.end);
                Enumeration {
                    n: self.n,
                    indices: lo..hi,
                }
            })
            .filter(|e| !e.indices.is_empty())
            .collect()
    }
}

impl Iterator for Enumeration {
    type Item = InterleavedTrace;

    fn next(&mut self) -> Option<Self::Item> {
        self.indices
            .next()
            .map(|i| InterleavedTrace::from_index(i, self.n))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.indices.end - self.indices.start) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Enumeration {}

/// SplitMix64 generator.
///
/// `state += 0x9E3779B97F4A7C15`, then the output is mixed with two
/// xor-shift-multiply rounds (constants `0xBF58476D1CE4E5B9`,
/// `0x94D049BB133111EB`). Each event draws one 64-bit output; its top 53 bits
/// form a uniform `u` in `[0, 1)` and the event is an error iff `u < p`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Reproducible random trace; see [`SplitMix64`] for the exact algorithm.
pub fn random(n: usize, seed: u64, p: f64) -> Result<InterleavedTrace, TraceError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TraceError::Probability(p));
    }
    let mut rng = SplitMix64::new(seed);
    Ok(InterleavedTrace::new(
        (0..n).map(|_| rng.next_unit() < p).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn canonical_entries() {
        let c = canonical();
        assert_eq!(c.rounds(), 11);
        assert!(c.a(3));
        assert!(c.b(4));
        assert!(!c.a(1));
    }

    #[test]
    fn interleave_mapping() {
        let free = PerRoundTraces::error_free(4).to_interleaved();
        assert_eq!(free, InterleavedTrace::error_free(8));

        let c = canonical().to_interleaved();
        assert_eq!(c.len(), 22);
        assert_eq!(c.event(5), Some(true));
        assert_eq!(c.event(6), Some(true));
        for k in 1..=11 {
            assert_eq!(c.event(2 * k - 1), Some(canonical().a(k)));
            assert_eq!(c.event(2 * k), Some(canonical().b(k)));
        }

        let one = PerRoundTraces {
            err_a: vec![true],
            err_b: vec![false],
        };
        assert_eq!(one.to_interleaved().bits(), &[true, false]);
    }

    #[test]
    fn enumerate_counts() {
        let zero: Vec<_> = enumerate(0).unwrap().collect();
        assert_eq!(zero, vec![InterleavedTrace::default()]);
        assert_eq!(enumerate(2).unwrap().count(), 4);
        assert!(matches!(
            enumerate(31),
            Err(TraceError::BoundExceeded { requested: 31, .. })
        ));
    }

    #[test]
    fn enumerate_is_binary_counting_event_one_lsb() {
        let v: Vec<String> = enumerate(2).unwrap().map(|t| t.to_string()).collect();
        assert_eq!(v, ["00", "10", "01", "11"]);
    }

    #[test]
    fn enumerate_distinct_up_to_twelve() {
        for n in 0..=12 {
            let set: HashSet<_> = enumerate(n).unwrap().collect();
            assert_eq!(set.len(), 1 << n);
        }
    }

    #[test]
    #[ignore = "slow: walks 2^22 traces"]
    fn enumerate_twenty_two() {
        assert_eq!(enumerate(22).unwrap().count(), 4_194_304);
    }

    #[test]
    fn split_covers_range() {
        let e = enumerate(7).unwrap();
        let parts = e.split(5);
        let joined: Vec<_> = parts.into_iter().flatten().collect();
        let direct: Vec<_> = enumerate(7).unwrap().collect();
        assert_eq!(joined, direct);
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_bits("0000").unwrap(), InterleavedTrace::error_free(4));
        let t = parse_bits("00E0").unwrap();
        assert_eq!(t, InterleavedTrace::single_error(4, 3));
        assert_eq!(
            parse_bits("00X0").unwrap_err(),
            TraceError::Parse { pos: 2, ch: 'X' }
        );
        assert_eq!(parse_bits("0-1-.-T").unwrap().to_string(), "0101");
    }

    #[test]
    fn random_extremes_and_determinism() {
        assert_eq!(random(50, 7, 0.0).unwrap().error_count(), 0);
        assert_eq!(random(50, 7, 1.0).unwrap().error_count(), 50);
        assert_eq!(random(64, 42, 0.3).unwrap(), random(64, 42, 0.3).unwrap());
        assert!(random(4, 1, 1.5).is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0, as published with the reference implementation.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn index_roundtrip() {
        for i in 0..64u64 {
            assert_eq!(InterleavedTrace::from_index(i, 6).index(), i);
        }
    }

    proptest::proptest! {
        #[test]
        fn per_round_roundtrip(bits in proptest::collection::vec(proptest::bool::ANY, 0..40)) {
            let mut bits = bits;
            if bits.len() % 2 == 1 { bits.pop(); }
            let t = InterleavedTrace::new(bits);
            proptest::prop_assert_eq!(t.to_per_round().to_interleaved(), t);
        }
    }
}
