//! Finite binary words.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// A finite word over `{0,1}`.
///
/// Ordering is shortlex (length first, then lexicographic), which is the
/// order of the string/number bijection in [`crate::codes`].
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit string character {0:?}")]
pub struct ParseBitsError(pub char);

impl BitString {
    pub const fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        BitString {
            bits: bits.into_iter().collect(),
        }
    }

    /// `n` copies of `bit`.
    pub fn repeat(bit: bool, n: usize) -> Self {
        BitString {
            bits: alloc::vec![bit; n],
        }
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        debug_assert!(width <= 64);
        BitString::from_bits((0..width).rev().map(|i| (value >> i) & 1 == 1))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        self.bits.iter().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// Bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString::from_bits(self.bits[start..end].iter().copied())
    }

    /// True if `self` is a prefix of `other` (including equality).
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// Big-endian value of the word, if it fits in 64 bits.
    pub fn to_uint(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
    }

    /// Plain lexicographic comparison (not shortlex).
    pub fn lex_cmp(&self, other: &BitString) -> Ordering {
        self.bits.cmp(&other.bits)
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

/// Accepts ASCII `0`/`1`. The empty string, `-` and `ε` all denote the
/// empty word.
impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s == "ε" {
            return Ok(BitString::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitsError(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| BitString { bits })
    }
}

impl From<&BitString> for String {
    fn from(b: &BitString) -> String {
        alloc::format!("{b}")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString::from_bits(iter)
    }
}

/// Shorthand for tests and fixtures: panics on anything but `0`/`1`.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("literal bit string")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn shortlex_order() {
        let mut v = alloc::vec![bits("1"), bits("00"), bits(""), bits("0"), bits("01")];
        v.sort();
        assert_eq!(v, alloc::vec![bits(""), bits("0"), bits("1"), bits("00"), bits("01")]);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(bits("1011").to_string(), "1011");
        assert!(bits("-").is_empty());
        assert!("012".parse::<BitString>().is_err());
        assert_eq!(BitString::from_uint(5, 4), bits("0101"));
        assert_eq!(bits("0101").to_uint(), Some(5));
    }

    #[test]
    fn prefixes() {
        assert!(bits("").is_prefix_of(&bits("10")));
        assert!(bits("1").is_proper_prefix_of(&bits("10")));
        assert!(!bits("10").is_proper_prefix_of(&bits("10")));
        assert!(!bits("11").is_prefix_of(&bits("10")));
    }
}
