//! The string/number bijection, self-delimiting codes, pairing and Kraft
//! auditing.
//!
//! Natural numbers and binary strings are identified in shortlex order:
//! `0 ↔ ε, 1 ↔ 0, 2 ↔ 1, 3 ↔ 00, 4 ↔ 01, …`. The number `n` corresponds
//! to the binary expansion of `n + 1` with its leading `1` removed.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arith::Dyadic;
use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("malformed code stream at bit {at}: {what}")]
    Malformed { at: usize, what: &'static str },
}

/// The `n`-th binary string in shortlex order.
pub fn nat_to_string(n: u64) -> BitString {
    let v = n as u128 + 1;
    let width = 127 - v.leading_zeros() as usize;
    BitString::from_bits((0..width).rev().map(|i| (v >> i) & 1 == 1))
}

/// Inverse of [`nat_to_string`]; `None` if the index does not fit in `u64`.
pub fn string_to_nat(s: &BitString) -> Option<u64> {
    if s.len() > 64 {
        return None;
    }
    let v = s.iter().fold(1u128, |acc, b| (acc << 1) | b as u128);
    u64::try_from(v - 1).ok()
}

/// `x̄ = 1^|x| 0 x`, of length `2|x| + 1`.
pub fn bar_encode(x: &BitString) -> BitString {
    let mut out = BitString::repeat(true, x.len());
    out.push(false);
    out.extend_from(x);
    out
}

/// Reads one `x̄` codeword starting at bit `start` in a single left-to-right
/// pass. Returns the decoded word and the number of bits consumed.
pub fn bar_decode(stream: &BitString, start: usize) -> Result<(BitString, usize), CodeError> {
    let mut pos = start;
    let mut n = 0usize;
    loop {
        match stream.get(pos) {
            Some(true) => n += 1,
            Some(false) => break,
            None => {
                return Err(CodeError::Malformed {
                    at: pos,
                    what: "unterminated length prefix",
                })
            }
        }
        pos += 1;
    }
    pos += 1;
    if pos + n > stream.len() {
        return Err(CodeError::Malformed {
            at: stream.len(),
            what: "payload shorter than announced",
        });
    }
    Ok((stream.slice(pos, pos + n), pos + n - start))
}

/// The standard self-delimiting code `x' = bar(nat_to_string(|x|)) x`.
///
/// Its length is exactly `|x| + 2·|nat_to_string(|x|)| + 1`.
pub fn std_encode(x: &BitString) -> BitString {
    let mut out = bar_encode(&nat_to_string(x.len() as u64));
    out.extend_from(x);
    out
}

/// Reads one `x'` codeword starting at `start`.
pub fn std_decode(stream: &BitString, start: usize) -> Result<(BitString, usize), CodeError> {
    let (len_word, used) = bar_decode(stream, start)?;
    let n = string_to_nat(&len_word).ok_or(CodeError::Malformed {
        at: start,
        what: "length field overflows",
    })? as usize;
    let body = start + used;
    if body + n > stream.len() {
        return Err(CodeError::Malformed {
            at: stream.len(),
            what: "payload shorter than announced",
        });
    }
    Ok((stream.slice(body, body + n), used + n))
}

/// `⟨x, y⟩ = x' y`.
pub fn pair_strings(x: &BitString, y: &BitString) -> BitString {
    let mut out = std_encode(x);
    out.extend_from(y);
    out
}

pub fn unpair_strings(p: &BitString) -> Result<(BitString, BitString), CodeError> {
    let (x, used) = std_decode(p, 0)?;
    Ok((x, p.slice(used, p.len())))
}

/// `⟨x, ⟨y, z⟩⟩`.
pub fn pair3(x: &BitString, y: &BitString, z: &BitString) -> BitString {
    pair_strings(x, &pair_strings(y, z))
}

pub fn unpair3(p: &BitString) -> Result<(BitString, BitString, BitString), CodeError> {
    let (x, rest) = unpair_strings(p)?;
    let (y, z) = unpair_strings(&rest)?;
    Ok((x, y, z))
}

/// `⟨i, j⟩ = (i+j)(i+j+1)/2 + j`.
pub fn cantor_pair(i: u64, j: u64) -> u128 {
    let s = i as u128 + j as u128;
    s * (s + 1) / 2 + j as u128
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(z: u128) -> (u64, u64) {
    // Largest s with s(s+1)/2 <= z: start near sqrt(2z), then correct.
    let mut s = 2 * (z / 2).isqrt();
    while (s + 1) * (s + 2) / 2 <= z {
        s += 1;
    }
    while s * (s + 1) / 2 > z {
        s -= 1;
    }
    let j = z - s * (s + 1) / 2;
    ((s - j) as u64, j as u64)
}

/// No word of the set is a proper prefix of another (duplicates collapse).
pub fn is_prefix_free<'a, I>(words: I) -> bool
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut sorted: Vec<&BitString> = words.into_iter().collect();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    sorted.dedup();
    // In plain lexicographic order a prefix sorts immediately before some
    // extension of it, so adjacent pairs suffice.
    sorted.windows(2).all(|w| !w[0].is_prefix_of(w[1]))
}

/// `Σ 2^-|w|` over the distinct words, exactly.
pub fn kraft_sum<'a, I>(words: I) -> Dyadic
where
    I: IntoIterator<Item = &'a BitString>,
{
    let set: BTreeSet<&BitString> = words.into_iter().collect();
    set.into_iter().map(|w| Dyadic::pow2_neg(w.len() as u64)).sum()
}
