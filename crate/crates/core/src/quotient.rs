//! Quotient-style conditionals: conditioning a semiprobability on a finite
//! event, and the conditional of a joint table obtained by dividing by a
//! marginal. Quotients of dyadics need not be dyadic, so results carry
//! both parts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::apriori::{approx_apriori, complete_stage};
use crate::arith::Dyadic;
use crate::bits::BitString;
use crate::codes::{nat_to_string, pair_strings, string_to_nat, unpair_strings};
use crate::complexity::{approx_k, SearchBounds};
use crate::vm::Machine;

/// `num / den` with `den > 0`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub num: Dyadic,
    pub den: Dyadic,
}

impl Quotient {
    pub fn new(num: Dyadic, den: Dyadic) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Quotient { num, den })
        }
    }

    pub fn zero() -> Self {
        Quotient {
            num: Dyadic::zero(),
            den: Dyadic::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Integer numerator and denominator in lowest terms.
    pub fn reduced(&self) -> (BigUint, BigUint) {
        // (a / 2^e) / (b / 2^f) = a 2^f / (b 2^e)
        let a = self.num.numerator() << self.den.exponent();
        let b = self.den.numerator() << self.num.exponent();
        if a.is_zero() {
            return (a, BigUint::one());
        }
        let g = a.gcd(&b);
        (a / &g, b / g)
    }

    pub fn add(&self, other: &Quotient) -> Quotient {
        Quotient {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    /// `-log2` of the quotient, as exact integer bounds.
    pub fn neg_log2(&self) -> NegLog2 {
        if self.num.is_zero() {
            return NegLog2::Infinite;
        }
        // Work with r = den / num = n / d.
        let (d, n) = self.reduced();
        let bits = |v: &BigUint| v.bits() as i64;
        // floor(log2 r): largest f with 2^f <= r.
        let mut f = bits(&n) - bits(&d);
        let le = |f: i64| {
            if f >= 0 {
                (&d << f as u64) <= n
            } else {
                d <= (&n << (-f) as u64)
            }
        };
        while !le(f) {
            f -= 1;
        }
        while le(f + 1) {
            f += 1;
        }
        let exact = if f >= 0 { (&d << f as u64) == n } else { d == (&n << (-f) as u64) };
        NegLog2::Finite {
            floor: f,
            ceil: if exact { f } else { f + 1 },
        }
    }
}

impl PartialEq for Quotient {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Quotient {}

impl Ord for Quotient {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Quotient {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Dyadic> for Quotient {
    fn from(d: Dyadic) -> Self {
        Quotient {
            num: d,
            den: Dyadic::one(),
        }
    }
}

impl fmt::Display for Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.reduced();
        write!(f, "{a}/{b}")
    }
}

/// `-log2` of a nonnegative quantity; zero maps to the explicit sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NegLog2 {
    Infinite,
    Finite { floor: i64, ceil: i64 },
}

impl fmt::Display for NegLog2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegLog2::Infinite => f.write_str("inf"),
            NegLog2::Finite { floor, ceil } if floor == ceil => write!(f, "{floor}"),
            NegLog2::Finite { floor, ceil } => write!(f, "({floor},{ceil})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuotientError {
    #[error("the conditioning event has zero mass")]
    ZeroMarginal,
    #[error("masses sum to {0}, more than 1")]
    MassExceedsOne(Dyadic),
    #[error("member {0} lies outside the index range")]
    OutOfRange(BitString),
}

/// A finite event `B` inside the first `range` words (in shortlex order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditioningSet {
    members: BTreeSet<BitString>,
    range: u64,
}

impl ConditioningSet {
    pub fn new(members: impl IntoIterator<Item = BitString>, range: u64) -> Result<Self, QuotientError> {
        let members: BTreeSet<BitString> = members.into_iter().collect();
        for m in &members {
            if string_to_nat(m).is_none_or(|i| i >= range) {
                return Err(QuotientError::OutOfRange(m.clone()));
            }
        }
        Ok(ConditioningSet { members, range })
    }

    pub fn members(&self) -> &BTreeSet<BitString> {
        &self.members
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.members.contains(x)
    }

    /// `χ_B`: bit `i` is 1 iff the `i`-th word is in `B`.
    pub fn characteristic(&self) -> BitString {
        (0..self.range).map(|i| self.members.contains(&nat_to_string(i))).collect()
    }
}

/// `P(x|B)`: 0 outside `B`, `p(x)/p(B)` inside. Covers every key of `p`
/// and every member of `B`.
pub fn conditional_on_set(
    p: &BTreeMap<BitString, Dyadic>,
    b: &ConditioningSet,
) -> Result<BTreeMap<BitString, Quotient>, QuotientError> {
    let total: Dyadic = p.values().sum();
    if total > Dyadic::one() {
        return Err(QuotientError::MassExceedsOne(total));
    }
    let pb: Dyadic = b.members.iter().filter_map(|x| p.get(x)).sum();
    if pb.is_zero() {
        return Err(QuotientError::ZeroMarginal);
    }
    let keys: BTreeSet<&BitString> = p.keys().chain(b.members.iter()).collect();
    Ok(keys
        .into_iter()
        .map(|x| {
            let v = if b.contains(x) {
                Quotient::new(p.get(x).cloned().unwrap_or_else(Dyadic::zero), pb.clone()).expect("pb > 0")
            } else {
                Quotient::zero()
            };
            (x.clone(), v)
        })
        .collect())
}

/// A joint semiprobability `j(x, y)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JointTable {
    entries: BTreeMap<(BitString, BitString), Dyadic>,
}

impl JointTable {
    pub fn new(entries: BTreeMap<(BitString, BitString), Dyadic>) -> Result<Self, QuotientError> {
        let total: Dyadic = entries.values().sum();
        if total > Dyadic::one() {
            return Err(QuotientError::MassExceedsOne(total));
        }
        Ok(JointTable { entries })
    }

    pub fn entries(&self) -> &BTreeMap<(BitString, BitString), Dyadic> {
        &self.entries
    }

    pub fn get(&self, x: &BitString, y: &BitString) -> Dyadic {
        self.entries.get(&(x.clone(), y.clone())).cloned().unwrap_or_else(Dyadic::zero)
    }

    /// `Σ_z j(z, y)`.
    pub fn marginal_y(&self, y: &BitString) -> Dyadic {
        self.entries.iter().filter(|((_, yy), _)| yy == y).map(|(_, v)| v).sum()
    }

    pub fn xs(&self) -> BTreeSet<BitString> {
        self.entries.keys().map(|(x, _)| x.clone()).collect()
    }

    pub fn ys(&self) -> BTreeSet<BitString> {
        self.entries.keys().map(|(_, y)| y.clone()).collect()
    }
}

/// `j(x, y) / Σ_z j(z, y)`.
pub fn quotient_conditional(j: &JointTable, x: &BitString, y: &BitString) -> Result<Quotient, QuotientError> {
    Quotient::new(j.get(x, y), j.marginal_y(y)).ok_or(QuotientError::ZeroMarginal)
}

/// `Σ_j 2^-w_j Q_j` over joint component tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointMixture {
    pub components: Vec<(u64, JointTable)>,
}

impl JointMixture {
    /// The pre-summed table.
    pub fn summed(&self) -> Result<JointTable, QuotientError> {
        let mut entries: BTreeMap<(BitString, BitString), Dyadic> = BTreeMap::new();
        for (w, t) in &self.components {
            for (k, v) in &t.entries {
                *entries.entry(k.clone()).or_insert_with(Dyadic::zero) += &v.shr(*w);
            }
        }
        JointTable::new(entries)
    }

    /// `Σ_j α_j Q_j(x,y) / Σ_z Σ_j α_j Q_j(z,y)`: the inner sum runs over
    /// components for each `z`.
    pub fn conditional_sum_inside(&self, x: &BitString, y: &BitString) -> Result<Quotient, QuotientError> {
        let num: Dyadic = self.components.iter().map(|(w, t)| t.get(x, y).shr(*w)).sum();
        let zs: BTreeSet<BitString> = self.components.iter().flat_map(|(_, t)| t.xs()).collect();
        let den: Dyadic = zs
            .iter()
            .map(|z| self.components.iter().map(|(w, t)| t.get(z, y).shr(*w)).sum::<Dyadic>())
            .sum();
        Quotient::new(num, den).ok_or(QuotientError::ZeroMarginal)
    }

    /// `Σ_j α_j Q_j(x,y) / Σ_j α_j Σ_z Q_j(z,y)`: each component's
    /// marginal first.
    pub fn conditional_marginals_first(&self, x: &BitString, y: &BitString) -> Result<Quotient, QuotientError> {
        let num: Dyadic = self.components.iter().map(|(w, t)| t.get(x, y).shr(*w)).sum();
        let den: Dyadic = self.components.iter().map(|(w, t)| t.marginal_y(y).shr(*w)).sum();
        Quotient::new(num, den).ok_or(QuotientError::ZeroMarginal)
    }
}

/// One row of the single-event report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleGapRow {
    pub x: BitString,
    pub in_b: bool,
    /// `m̂(x)/m̂(B)` with `m̂(B) = Σ_{z∈B} m̂(z)`, 0 outside `B`.
    pub direct: Option<Quotient>,
    /// `m̂(x)/m̂(χ_B)` inside `B`, 0 outside.
    pub conditional: Option<Quotient>,
    pub neg_log: Option<NegLog2>,
    /// `K̂(x|χ_B)`.
    pub k_given_chi: Option<usize>,
}

impl SingleGapRow {
    pub fn is_complete(&self) -> bool {
        self.neg_log.is_some() && self.k_given_chi.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleGapReport {
    pub set: ConditioningSet,
    pub chi: BitString,
    pub m_chi: Dyadic,
    pub rows: Vec<SingleGapRow>,
}

/// For each set, tabulates `-log2(m̂(x)/m̂(χ_B))` against `K̂(x|χ_B)` for
/// every word in the set's range. `m̂` is the a priori lower bound of the
/// machine with empty aux. Descriptive only.
pub fn single_gap_report<M: Machine>(m: &M, family: &[ConditioningSet], bounds: SearchBounds) -> Vec<SingleGapReport> {
    let stage = complete_stage(bounds.length_bound, bounds.step_bound);
    let q = approx_apriori(m, &BitString::empty(), stage, bounds.length_bound);
    family
        .iter()
        .map(|b| {
            let chi = b.characteristic();
            let m_chi = q.get(&chi);
            let m_b: Dyadic = b.members.iter().map(|z| q.get(z)).sum();
            let rows = (0..b.range)
                .map(|i| {
                    let x = nat_to_string(i);
                    let in_b = b.contains(&x);
                    let direct = if !in_b {
                        Some(Quotient::zero())
                    } else {
                        Quotient::new(q.get(&x), m_b.clone())
                    };
                    let conditional = if !in_b {
                        Some(Quotient::zero())
                    } else {
                        Quotient::new(q.get(&x), m_chi.clone())
                    };
                    SingleGapRow {
                        neg_log: conditional.as_ref().map(Quotient::neg_log2),
                        k_given_chi: approx_k(m, &x, &chi, bounds).map(|e| e.bits),
                        x,
                        in_b,
                        direct,
                        conditional,
                    }
                })
                .collect();
            SingleGapReport {
                set: b.clone(),
                chi,
                m_chi,
                rows,
            }
        })
        .collect()
}

/// One row of the joint-table report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointGapRow {
    pub x: BitString,
    /// `m̂(x,y) = Q̂(⟨x,y⟩)`.
    pub joint: Dyadic,
    /// `m̂(x,y) / Σ_z m̂(z,y)`.
    pub conditional: Quotient,
    /// `K̂(x | ⟨y, K̂(y)⟩)`.
    pub k_given_y_ky: Option<usize>,
}

/// Conditioning the joint estimate on `y`, next to the complexity of `x`
/// given `y` and the estimate `K̂(y)`. `K(y)` itself is out of reach, so
/// the aux word is `⟨y, word(K̂(y))⟩`: an approximation of the exact object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointGapReport {
    pub y: BitString,
    pub k_y: Option<usize>,
    pub marginal: Dyadic,
    pub rows: Vec<JointGapRow>,
}

pub fn joint_gap_report<M: Machine>(m: &M, y: &BitString, bounds: SearchBounds) -> JointGapReport {
    let stage = complete_stage(bounds.length_bound, bounds.step_bound);
    let q = approx_apriori(m, &BitString::empty(), stage, bounds.length_bound);
    let joint: BTreeMap<BitString, Dyadic> = q
        .entries
        .iter()
        .filter_map(|(w, v)| match unpair_strings(w) {
            Ok((x, yy)) if yy == *y => Some((x, v.clone())),
            _ => None,
        })
        .collect();
    let marginal: Dyadic = joint.values().sum();
    let k_y = approx_k(m, y, &BitString::empty(), bounds).map(|e| e.bits);
    let aux = k_y.map(|k| pair_strings(y, &nat_to_string(k as u64)));
    let rows = joint
        .into_iter()
        .map(|(x, v)| JointGapRow {
            k_given_y_ky: aux.as_ref().and_then(|a| approx_k(m, &x, a, bounds)).map(|e| e.bits),
            conditional: Quotient::new(v.clone(), marginal.clone()).expect("v > 0"),
            joint: v,
            x,
        })
        .collect();
    JointGapReport {
        y: y.clone(),
        k_y,
        marginal,
        rows,
    }
}

/// `1/1`, `1/2`, ... for reports.
pub fn quotient_text(q: &Quotient) -> String {
    alloc::format!("{q}")
}
