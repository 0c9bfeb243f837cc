//! Lower approximations of the conditional a priori probability
//! `Q_T(x|y)`: the chance that `T`, fed fair coin flips, halts with output
//! `x` when `y` is on its auxiliary tape.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::arith::Dyadic;
use crate::bits::BitString;
use crate::complexity::KTable;
use crate::vm::{DovetailConfig, Dovetailer, HaltEvent, Machine};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AprioriTable {
    pub machine_id: String,
    pub aux: BitString,
    pub entries: BTreeMap<BitString, Dyadic>,
    pub stage: u64,
    pub length_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AprioriError {
    #[error("machine mismatch: table from {table}, estimates from {estimates}")]
    MachineMismatch { table: String, estimates: String },
    #[error("aux mismatch: table for {table}, estimates for {estimates}")]
    AuxMismatch { table: BitString, estimates: BitString },
    #[error("table bounds (stage {stage}, length {length}) cannot contain every witness of length <= {need_len} and steps <= {need_steps}")]
    IncompatibleBounds {
        stage: u64,
        length: usize,
        need_len: usize,
        need_steps: u64,
    },
    #[error("table extension must not shrink bounds")]
    Shrink,
}

impl AprioriTable {
    pub fn empty(machine_id: String, aux: BitString, length_bound: usize) -> Self {
        AprioriTable {
            machine_id,
            aux,
            entries: BTreeMap::new(),
            stage: 0,
            length_bound,
        }
    }

    pub fn get(&self, x: &BitString) -> Dyadic {
        self.entries.get(x).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn total(&self) -> Dyadic {
        self.entries.values().sum()
    }

    fn absorb(&mut self, e: &HaltEvent) {
        if e.program.len() <= self.length_bound {
            *self.entries.entry(e.output.clone()).or_insert_with(Dyadic::zero) += &Dyadic::pow2_neg(e.program.len() as u64);
        }
    }

    /// Pointwise `self <= other`.
    pub fn is_below(&self, other: &AprioriTable) -> bool {
        self.entries.iter().all(|(x, q)| *q <= other.get(x))
    }
}

/// Runs the dovetail for `max_stage` stages and adds `2^-|p|` to `Q̂(x)`
/// for every halting program `p` with output `x` and `|p| <= length_bound`.
pub fn approx_apriori<M: Machine>(m: &M, y: &BitString, max_stage: u64, length_bound: usize) -> AprioriTable {
    let mut t = AprioriTable::empty(m.id(), y.clone(), length_bound);
    let cfg = DovetailConfig::new(max_stage).with_max_len(length_bound);
    for e in Dovetailer::new(m, y.clone(), cfg).finish() {
        t.absorb(&e);
    }
    t.stage = max_stage;
    t
}

/// Tables for several auxiliary words from one interleaved run: round `r`
/// advances each unfinished `y` by one stage, in the given order.
pub fn approx_apriori_merged<M: Machine>(
    m: &M,
    ys: &[BitString],
    max_stage: u64,
    length_bound: usize,
) -> Vec<AprioriTable> {
    let cfg = DovetailConfig::new(max_stage).with_max_len(length_bound);
    let mut runs: Vec<_> = ys.iter().map(|y| Dovetailer::new(m, y.clone(), cfg)).collect();
    let mut tables: Vec<_> = ys
        .iter()
        .map(|y| AprioriTable::empty(m.id(), y.clone(), length_bound))
        .collect();
    loop {
        let mut progressed = false;
        for (run, table) in runs.iter_mut().zip(tables.iter_mut()) {
            if run.is_exhausted() {
                continue;
            }
            if let Some(events) = run.advance_stage() {
                progressed = true;
                for e in &events {
                    table.absorb(e);
                }
            }
        }
        if !progressed {
            break;
        }
    }
    for t in &mut tables {
        t.stage = max_stage;
    }
    tables
}

/// Smallest stage by which every program of length `<= length_bound`
/// halting within `steps` steps has been reported.
pub fn complete_stage(length_bound: usize, steps: u64) -> u64 {
    ((1u64 << (length_bound + 1)) - 1).saturating_add(steps)
}

/// One row of the `Q̂` versus `K̂` comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AprioriKRow {
    pub x: BitString,
    pub k_bits: usize,
    pub q: Dyadic,
    /// `2^-K̂ <= Q̂`, compared exactly.
    pub holds: bool,
    /// `floor(log2(Q̂ · 2^K̂))`, the gap in whole bits; `None` when `Q̂ = 0`.
    pub gap_bits: Option<i64>,
}

/// Checks `2^-K̂(x|y) <= Q̂(x|y)` for every `x` in the estimates.
///
/// The table must come from the same machine and aux, with a length bound
/// and stage large enough to have seen every witness.
pub fn apriori_vs_k(table: &AprioriTable, k: &KTable) -> Result<Vec<AprioriKRow>, AprioriError> {
    if table.machine_id != k.machine_id {
        return Err(AprioriError::MachineMismatch {
            table: table.machine_id.clone(),
            estimates: k.machine_id.clone(),
        });
    }
    if table.aux != k.aux {
        return Err(AprioriError::AuxMismatch {
            table: table.aux.clone(),
            estimates: k.aux.clone(),
        });
    }
    let need_len = k.bounds.length_bound;
    let need_steps = k.bounds.step_bound;
    if table.length_bound < need_len || table.stage < complete_stage(need_len, need_steps) {
        return Err(AprioriError::IncompatibleBounds {
            stage: table.stage,
            length: table.length_bound,
            need_len,
            need_steps,
        });
    }
    Ok(k.estimates
        .iter()
        .map(|(x, e)| {
            let q = table.get(x);
            let scaled = q.shl(e.bits as u64);
            AprioriKRow {
                x: x.clone(),
                k_bits: e.bits,
                holds: Dyadic::pow2_neg(e.bits as u64) <= q,
                gap_bits: scaled.floor_log2(),
                q,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::complexity::{k_table, SearchBounds};
    use crate::vm::{enumerate_machines, fixtures, run, RunOutcome};

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn fixture_tables() {
        let t = approx_apriori(&fixtures::halt_immediately(), &bits("0"), 50, 4);
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.get(&bits("")), Dyadic::one());
        let t = approx_apriori(&fixtures::echo_one(), &bits(""), 50, 4);
        assert_eq!(t.get(&bits("0")), d("1/2^1"));
        assert_eq!(t.get(&bits("1")), d("1/2^1"));
        assert_eq!(t.total(), Dyadic::one());
        let t = approx_apriori(&fixtures::copy_two(), &bits(""), 50, 4);
        assert_eq!(t.entries.len(), 4);
        assert!(t.entries.values().all(|q| *q == d("1/2^2")));
        let t = approx_apriori(&fixtures::two_routes(), &bits(""), 80, 4);
        assert_eq!(t.get(&bits("0")), d("3/2^3"));
    }

    #[test]
    fn two_routes_gap() {
        let m = fixtures::two_routes();
        let b = SearchBounds::new(4, 50);
        let k = k_table(&m, &bits(""), b);
        let t = approx_apriori(&m, &bits(""), complete_stage(4, 50), 4);
        let rows = apriori_vs_k(&t, &k).unwrap();
        let zero = rows.iter().find(|r| r.x == bits("0")).unwrap();
        assert!(zero.holds);
        assert_eq!((zero.k_bits, zero.gap_bits), (2, Some(0)));
        assert!(zero.q > Dyadic::pow2_neg(2));
        // Copy-2: equality everywhere.
        let m = fixtures::copy_two();
        let k = k_table(&m, &bits(""), b);
        let t = approx_apriori(&m, &bits(""), complete_stage(4, 50), 4);
        for r in apriori_vs_k(&t, &k).unwrap() {
            assert_eq!(r.q, Dyadic::pow2_neg(r.k_bits as u64));
        }
    }

    #[test]
    fn provenance_errors() {
        let m = fixtures::copy_two();
        let b = SearchBounds::new(4, 50);
        let k = k_table(&m, &bits(""), b);
        let t = approx_apriori(&m, &bits("1"), 200, 4);
        assert!(matches!(apriori_vs_k(&t, &k), Err(AprioriError::AuxMismatch { .. })));
        let t = approx_apriori(&fixtures::echo_one(), &bits(""), 200, 4);
        assert!(matches!(apriori_vs_k(&t, &k), Err(AprioriError::MachineMismatch { .. })));
        let t = approx_apriori(&m, &bits(""), 20, 4);
        assert!(matches!(apriori_vs_k(&t, &k), Err(AprioriError::IncompatibleBounds { .. })));
    }

    /// Independent oracle: sum `2^-|p|` over a direct sweep of programs.
    #[test]
    fn matches_direct_sweep() {
        for i in 1..=40 {
            let m = enumerate_machines(i);
            for y in [bits(""), bits("1")] {
                let (len, steps) = (6usize, 40u64);
                let t = approx_apriori(&m, &y, complete_stage(len, steps), len);
                let mut oracle: BTreeMap<BitString, Dyadic> = BTreeMap::new();
                for l in 0..=len {
                    for v in 0..(1u64 << l) {
                        let p = BitString::from_uint(v, l);
                        if let RunOutcome::Halted { output, .. } = run(&m, &p, &y, steps) {
                            *oracle.entry(output).or_insert_with(Dyadic::zero) += &Dyadic::pow2_neg(l as u64);
                        }
                    }
                }
                for (x, q) in &oracle {
                    assert!(*q <= t.get(x));
                }
                assert!(t.total() <= Dyadic::one());
            }
        }
    }

    #[test]
    fn monotone_in_both_bounds() {
        let m = fixtures::aux_or_bar();
        let y = bits("1");
        for stage in (10..200).step_by(17) {
            for len in 1..8 {
                let t = approx_apriori(&m, &y, stage, len);
                assert!(t.is_below(&approx_apriori(&m, &y, stage + 1, len)));
                assert!(t.is_below(&approx_apriori(&m, &y, stage, len + 1)));
            }
        }
    }

    #[test]
    fn merged_equals_separate() {
        let m = fixtures::aux_or_bar();
        let ys = [bits(""), bits("1"), bits("01"), bits("110")];
        let merged = approx_apriori_merged(&m, &ys, 150, 7);
        for (y, t) in ys.iter().zip(&merged) {
            assert_eq!(*t, approx_apriori(&m, y, 150, 7));
        }
    }
}
