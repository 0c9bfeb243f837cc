//! Exact dyadic arithmetic and subinterval geometry of `[0,1)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul};
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::bits::BitString;

/// A nonnegative rational `numerator / 2^exponent`.
///
/// Always canonical: the numerator is odd, or the value is `0/2^0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("cannot parse dyadic {0:?}: expected \"num/2^exp\"")]
    Parse(String),
    #[error("interval [{lo}, {hi}) is not inside [0,1) with lo <= hi")]
    BadInterval { lo: Dyadic, hi: Dyadic },
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(n: u64) -> Self {
        Dyadic::new(BigUint::from(n), 0)
    }

    /// `num / 2^exp`, canonicalized.
    pub fn new(num: BigUint, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.canonicalize();
        d
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        Dyadic {
            num: BigUint::one(),
            exp: k,
        }
    }

    /// `n / 2^k` for small numerators.
    pub fn ratio(n: u64, k: u64) -> Self {
        Dyadic::new(BigUint::from(n), k)
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True if the value is `2^n` for some integer `n` (possibly negative).
    pub fn is_power_of_two(&self) -> bool {
        self.num.is_one() || (!self.num.is_zero() && self.exp == 0 && self.num.count_ones() == 1)
    }

    /// Numerators of `self` and `other` over the common denominator
    /// `2^max(exp)`.
    fn aligned(&self, other: &Dyadic) -> (BigUint, BigUint, u64) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }

    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let (a, b, e) = self.aligned(other);
        (a >= b).then(|| Dyadic::new(a - b, e))
    }

    /// `self * 2^-k`.
    pub fn shr(&self, k: u64) -> Dyadic {
        Dyadic::new(self.num.clone(), self.exp + k)
    }

    /// `self * 2^k`.
    pub fn shl(&self, k: u64) -> Dyadic {
        if k <= self.exp {
            Dyadic::new(self.num.clone(), self.exp - k)
        } else {
            Dyadic::new(&self.num << (k - self.exp), 0)
        }
    }

    /// `floor(self * 2^level)`.
    pub fn scaled_floor(&self, level: u64) -> BigUint {
        if level >= self.exp {
            &self.num << (level - self.exp)
        } else {
            &self.num >> (self.exp - level)
        }
    }

    /// `ceil(self * 2^level)`.
    pub fn scaled_ceil(&self, level: u64) -> BigUint {
        let f = self.scaled_floor(level);
        if level >= self.exp || (&f << (self.exp - level)) == self.num {
            f
        } else {
            f + 1u32
        }
    }

    /// The integer `n` with `2^n <= self < 2^(n+1)`; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.num.bits() as i64 - 1 - self.exp as i64)
    }

    /// `ceil(log2(1/self))`; `None` for zero. Negative when `self > 1`.
    pub fn ceil_neg_log2(&self) -> Option<i64> {
        self.floor_log2().map(|n| -n)
    }

    /// Largest power of two not exceeding `self`, as its exponent `k`
    /// (`2^-k <= self < 2^(1-k)`). `None` for zero.
    pub fn bracket_exponent(&self) -> Option<i64> {
        self.ceil_neg_log2()
    }

    pub fn to_f64_lossy(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::INFINITY);
        let mut v = n;
        for _ in 0..self.exp {
            v /= 2.0;
        }
        v
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, d| &acc + d)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, d| &acc + &d)
    }
}

/// Canonical text form `num/2^exp`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `num/2^exp`; a bare integer `num` is also accepted.
impl FromStr for Dyadic {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(String::from(s));
        let s = s.trim();
        let (num, exp) = match s.split_once('/') {
            Some((n, rest)) => {
                let e = rest.strip_prefix("2^").ok_or_else(bad)?;
                (n, e.parse::<u64>().map_err(|_| bad())?)
            }
            None => (s, 0),
        };
        if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num = BigUint::parse_bytes(num.as_bytes(), 10).ok_or_else(bad)?;
        Ok(Dyadic::new(num, exp))
    }
}

/// Half-open `[lo, hi)` with `0 <= lo <= hi <= 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, ArithError> {
        if lo > hi || hi > Dyadic::one() {
            return Err(ArithError::BadInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Dyadic::zero(),
            hi: Dyadic::one(),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn length(&self) -> Dyadic {
        self.hi.checked_sub(&self.lo).expect("lo <= hi")
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// The cylinder `[0.w, 0.w + 2^-|w|)` of a binary word `w`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct BinaryInterval {
    word: BitString,
}

impl BinaryInterval {
    pub fn new(word: BitString) -> Self {
        BinaryInterval { word }
    }

    /// The aligned interval `[index / 2^level, (index+1) / 2^level)`.
    pub fn aligned(index: &BigUint, level: u64) -> Self {
        let word = (0..level)
            .rev()
            .map(|i| index.bit(i))
            .collect::<BitString>();
        BinaryInterval { word }
    }

    pub fn word(&self) -> &BitString {
        &self.word
    }

    pub fn into_word(self) -> BitString {
        self.word
    }

    pub fn level(&self) -> u64 {
        self.word.len() as u64
    }

    pub fn length(&self) -> Dyadic {
        Dyadic::pow2_neg(self.level())
    }

    pub fn to_interval(&self) -> Interval {
        let mut index = BigUint::zero();
        for b in self.word.iter() {
            index <<= 1u32;
            if b {
                index += 1u32;
            }
        }
        let lo = Dyadic::new(index.clone(), self.level());
        let hi = Dyadic::new(index + 1u32, self.level());
        Interval { lo, hi }
    }

    /// The word whose cylinder is exactly `i`, if there is one.
    pub fn from_interval(i: &Interval) -> Option<Self> {
        let len = i.length();
        if !len.numerator().is_one() {
            return None;
        }
        let level = len.exponent();
        let start = i.lo().scaled_floor(level);
        if Dyadic::new(start.clone(), level) != *i.lo() {
            return None;
        }
        Some(BinaryInterval::aligned(&start, level))
    }
}

/// The leftmost among the longest binary intervals inside `i`.
///
/// Returns `None` only for a degenerate (empty) interval.
pub fn largest_binary_subinterval(i: &Interval) -> Option<BinaryInterval> {
    if i.length().is_zero() {
        return None;
    }
    // The longest fitting cylinder has level at most ceil(log2(1/len)) + 2,
    // so the scan below terminates; the bound is only a sanity limit.
    let limit = i.length().ceil_neg_log2().expect("nonzero").max(0) as u64 + 2;
    for level in 0..=limit {
        let start = i.lo().scaled_ceil(level);
        let end = Dyadic::new(&start + 1u32, level);
        if end <= *i.hi() {
            return Some(BinaryInterval::aligned(&start, level));
        }
    }
    unreachable!("a binary interval of length >= len/4 always fits")
}

/// All binary intervals of the maximal fitting length that meet `i`; their
/// union covers `i` and there are never more than four of them.
pub fn cover_by_binary(i: &Interval) -> Vec<BinaryInterval> {
    let Some(best) = largest_binary_subinterval(i) else {
        return Vec::new();
    };
    let level = best.level();
    let first = i.lo().scaled_floor(level);
    let past = i.hi().scaled_ceil(level);
    let mut out = Vec::new();
    let mut idx = first;
    while idx < past {
        out.push(BinaryInterval::aligned(&idx, level));
        idx += 1u32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn iv(lo: &str, hi: &str) -> Interval {
        Interval::new(d(lo), d(hi)).unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(Dyadic::ratio(4, 3).to_string(), "1/2^1");
        assert_eq!(Dyadic::ratio(0, 9).to_string(), "0/2^0");
        assert_eq!(d("6/2^2"), Dyadic::ratio(3, 1));
        assert_eq!(d("1"), Dyadic::one());
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("x/2^1".parse::<Dyadic>().is_err());
    }

    #[test]
    fn log_helpers() {
        assert_eq!(d("3/2^3").ceil_neg_log2(), Some(2));
        assert_eq!(d("1/2^3").ceil_neg_log2(), Some(3));
        assert_eq!(d("1").ceil_neg_log2(), Some(0));
        assert_eq!(d("3").floor_log2(), Some(1));
        assert!(Dyadic::zero().floor_log2().is_none());
        assert!(d("1/2^5").is_power_of_two());
        assert!(d("4").is_power_of_two());
        assert!(!d("3/2^2").is_power_of_two());
    }

    #[test]
    fn largest_binary_examples() {
        let whole = largest_binary_subinterval(&Interval::unit()).unwrap();
        assert!(whole.word().is_empty());
        let quarter = largest_binary_subinterval(&iv("1/2^2", "1/2^1")).unwrap();
        assert_eq!(quarter.word(), &bits("01"));
        let skew = largest_binary_subinterval(&iv("1/2^2", "5/2^3")).unwrap();
        assert_eq!(skew.word(), &bits("01"));
        assert!(largest_binary_subinterval(&iv("1/2^2", "1/2^2")).is_none());
    }

    #[test]
    fn largest_binary_matches_exhaustive_scan() {
        // Exhaustive oracle: every binary interval with level <= 6.
        for e in 1..=4u64 {
            let n = 1u64 << e;
            for a in 0..n {
                for b in (a + 1)..=n {
                    let i = iv(&alloc::format!("{a}/2^{e}"), &alloc::format!("{b}/2^{e}"));
                    let mut best: Option<BitString> = None;
                    for level in 0..=6u64 {
                        for idx in 0..(1u64 << level) {
                            let w = BitString::from_uint(idx, level as usize);
                            let c = BinaryInterval::new(w.clone()).to_interval();
                            if i.contains_interval(&c) && best.as_ref().is_none_or(|b| w.len() < b.len()) {
                                best = Some(w);
                            }
                        }
                    }
                    assert_eq!(largest_binary_subinterval(&i).unwrap().into_word(), best.unwrap(), "{i}");
                }
            }
        }
    }

    #[test]
    fn cover_examples() {
        let half = cover_by_binary(&iv("0", "1/2^1"));
        assert_eq!(half, alloc::vec![BinaryInterval::new(bits("0"))]);
        let skew: Vec<_> = cover_by_binary(&iv("1/2^2", "5/2^3")).into_iter().map(|b| b.into_word()).collect();
        assert_eq!(skew, alloc::vec![bits("01"), bits("10")]);
    }

    #[test]
    fn binary_interval_roundtrip() {
        for w in ["", "0", "1", "0110", "111"] {
            let b = BinaryInterval::new(bits(w));
            assert_eq!(BinaryInterval::from_interval(&b.to_interval()), Some(b.clone()));
            assert_eq!(b.to_interval().length(), Dyadic::pow2_neg(w.len() as u64));
        }
        assert!(BinaryInterval::from_interval(&iv("1/2^2", "5/2^3")).is_none());
        assert!(BinaryInterval::from_interval(&iv("1/2^3", "3/2^3")).is_none());
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (0u64..100_000, 0u64..40).prop_map(|(n, e)| Dyadic::ratio(n, e))
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!((&a + &b).checked_sub(&b), Some(a.clone()));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn text_roundtrip(a in arb_dyadic()) {
            prop_assert_eq!(a.to_string().parse::<Dyadic>().unwrap(), a);
        }

        #[test]
        fn order_matches_floats(a in arb_dyadic(), b in arb_dyadic()) {
            let (fa, fb) = (a.to_f64_lossy(), b.to_f64_lossy());
            if fa != fb {
                prop_assert_eq!(a < b, fa < fb);
            }
        }

        #[test]
        fn largest_binary_is_at_least_a_quarter(lo in 0u64..4096, len in 1u64..4096) {
            prop_assume!(lo + len <= 4096);
            let i = Interval::new(Dyadic::ratio(lo, 12), Dyadic::ratio(lo + len, 12)).unwrap();
            let b = largest_binary_subinterval(&i).unwrap();
            prop_assert!(i.contains_interval(&b.to_interval()));
            prop_assert!(b.length().shl(2) >= i.length());
            let cover = cover_by_binary(&i);
            prop_assert!(cover.len() <= 4);
            prop_assert!(cover.first().unwrap().to_interval().lo() <= i.lo());
            prop_assert!(cover.last().unwrap().to_interval().hi() >= i.hi());
        }
    }
}
