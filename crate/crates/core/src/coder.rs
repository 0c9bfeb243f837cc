//! Interval coding: the direct Shannon-Fano construction for a known mass
//! list, and the construction for a semimeasure that is only approximable
//! from below, via power-of-two discretization of its approximations.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::apriori::{approx_apriori, complete_stage};
use crate::arith::{largest_binary_subinterval, Dyadic, Interval};
use crate::bits::BitString;
use crate::complexity::{k_table, SearchBounds};
use crate::semimeasure::{index_word, word_index, Diverged, MonotoneApproximator, TableApproximator};
use crate::vm::{dovetail, AuxBranch, DovetailConfig, HaltEvent, Instr, InputBranch, Machine, Move, PrefixMachine};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoderError {
    #[error("masses sum to {0}, more than 1")]
    MassExceedsOne(Dyadic),
    #[error("mass for {0} is not positive")]
    ZeroMass(BitString),
    #[error("approximation decreases at x={x}, y={y}, t={t}")]
    NonMonotone { x: u64, y: u64, t: u64 },
    #[error("approximation value {value} at x={x}, y={y} exceeds 1")]
    AboveOne { x: u64, y: u64, value: Dyadic },
    #[error("allocation for {x} would pass the right end of [0,1)")]
    AllocationOverflow { x: BitString },
    #[error("codebook is for aux {book}, queried with {query}")]
    AuxMismatch { book: BitString, query: BitString },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleEntry {
    pub x: BitString,
    pub codeword: BitString,
    pub interval: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleCodeBook {
    pub entries: Vec<SimpleEntry>,
}

/// Cuts consecutive intervals of length `p(x)` off `[0,1)` in list order
/// and gives `x` the word of the leftmost largest binary interval inside.
pub fn shannon_fano(masses: &[(BitString, Dyadic)]) -> Result<SimpleCodeBook, CoderError> {
    let total: Dyadic = masses.iter().map(|(_, p)| p).sum();
    if total > Dyadic::one() {
        return Err(CoderError::MassExceedsOne(total));
    }
    if let Some((x, _)) = masses.iter().find(|(_, p)| p.is_zero()) {
        return Err(CoderError::ZeroMass(x.clone()));
    }
    let mut cursor = Dyadic::zero();
    let mut entries = Vec::with_capacity(masses.len());
    for (x, p) in masses {
        let hi = &cursor + p;
        let interval = Interval::new(cursor, hi.clone()).expect("positive length");
        let codeword = largest_binary_subinterval(&interval)
            .expect("nonempty interval")
            .into_word();
        entries.push(SimpleEntry {
            x: x.clone(),
            codeword,
            interval,
        });
        cursor = hi;
    }
    Ok(SimpleCodeBook { entries })
}

/// A first crossing of a power-of-two threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiEvent {
    pub x: BitString,
    pub y: BitString,
    /// Approximation step at which the threshold was crossed.
    pub t: u64,
    /// `2^-k` with `2^-k <= φ(x,y,t) < 2^(1-k)`.
    pub mass: Dyadic,
    /// Position in the event stream.
    pub order: u64,
}

/// Which evaluations the discretization performs: in round `r`, for each
/// column `y` in order and each `x = 1..=min(r, max_x)`, it evaluates
/// `φ(x, y, r - x + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSchedule {
    pub ys: Vec<u64>,
    pub max_x: u64,
    pub max_rounds: u64,
    pub max_events: Option<usize>,
}

impl PsiSchedule {
    pub fn new(ys: Vec<u64>, max_x: u64, max_rounds: u64) -> Self {
        PsiSchedule {
            ys,
            max_x,
            max_rounds,
            max_events: None,
        }
    }

    pub fn id(&self) -> String {
        let ys: Vec<String> = self.ys.iter().map(|y| alloc::format!("{y}")).collect();
        alloc::format!(
            "diagonal;ys={};max_x={};rounds={};events={}",
            ys.join(","),
            self.max_x,
            self.max_rounds,
            self.max_events.map_or(String::from("all"), |n| alloc::format!("{n}"))
        )
    }
}

#[derive(Clone, Debug, Default)]
struct Track {
    value: Dyadic,
    exponent: Option<i64>,
    diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiRun {
    pub events: Vec<PsiEvent>,
    /// `m̂(x|y)`: the last value evaluated for each `(x, y)`.
    pub m_hat: BTreeMap<(BitString, BitString), Dyadic>,
    /// Pairs whose evaluation stopped returning.
    pub diverged: Vec<(BitString, BitString)>,
    pub rounds: u64,
    pub truncated: bool,
    pub schedule: PsiSchedule,
}

impl PsiRun {
    pub fn m_hat(&self, x: &BitString, y: &BitString) -> Dyadic {
        self.m_hat.get(&(x.clone(), y.clone())).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn events_for<'a>(&'a self, y: &'a BitString) -> impl Iterator<Item = &'a PsiEvent> + 'a {
        self.events.iter().filter(move |e| &e.y == y)
    }
}

/// Discretizes `φ` along the schedule. Natural `n` is reported as the word
/// [`index_word`]`(n)`.
pub fn psi_discretize<A: MonotoneApproximator>(phi: &A, schedule: &PsiSchedule) -> Result<PsiRun, CoderError> {
    let mut tracks: BTreeMap<(u64, u64), Track> = BTreeMap::new();
    let mut events = Vec::new();
    let mut truncated = false;
    let mut rounds = 0;
    'outer: for r in 1..=schedule.max_rounds {
        rounds = r;
        for &y in &schedule.ys {
            for x in 1..=r.min(schedule.max_x) {
                let t = r - x + 1;
                let track = tracks.entry((x, y)).or_default();
                if track.diverged {
                    continue;
                }
                let v = match phi.eval(x, y, t) {
                    Ok(v) => v,
                    Err(Diverged) => {
                        track.diverged = true;
                        continue;
                    }
                };
                if v < track.value {
                    return Err(CoderError::NonMonotone { x, y, t });
                }
                if v > Dyadic::one() {
                    return Err(CoderError::AboveOne { x, y, value: v });
                }
                let crossing = v.floor_log2().filter(|&e| track.exponent.is_none_or(|old| e > old));
                if crossing.is_some() && schedule.max_events.is_some_and(|n| events.len() >= n) {
                    truncated = true;
                    break 'outer;
                }
                track.value = v;
                if let Some(e) = crossing {
                    track.exponent = Some(e);
                    events.push(PsiEvent {
                        x: index_word(x),
                        y: index_word(y),
                        t,
                        mass: Dyadic::pow2_neg((-e) as u64),
                        order: events.len() as u64,
                    });
                }
            }
        }
    }
    let mut m_hat = BTreeMap::new();
    let mut diverged = Vec::new();
    for (&(x, y), tr) in &tracks {
        let key = (index_word(x), index_word(y));
        if tr.diverged {
            diverged.push(key.clone());
        }
        if !tr.value.is_zero() {
            m_hat.insert(key, tr.value.clone());
        }
    }
    Ok(PsiRun {
        events,
        m_hat,
        diverged,
        rounds,
        truncated,
        schedule: schedule.clone(),
    })
}

/// Sum of event masses for one `(x, y)` against `2 m̂(x|y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSumRow {
    pub x: BitString,
    pub y: BitString,
    pub sum: Dyadic,
    pub m_hat: Dyadic,
    /// `sum < 2 m̂`.
    pub strict: bool,
    /// `m̂` is a power of two, the only case where the limit can reach `2 m̂`.
    pub exact_power: bool,
}

pub fn psi_sums(run: &PsiRun) -> Vec<PsiSumRow> {
    let mut sums: BTreeMap<(BitString, BitString), Dyadic> = BTreeMap::new();
    for e in &run.events {
        *sums.entry((e.x.clone(), e.y.clone())).or_insert_with(Dyadic::zero) += &e.mass;
    }
    sums.into_iter()
        .map(|((x, y), sum)| {
            let m_hat = run.m_hat(&x, &y);
            PsiSumRow {
                strict: sum < m_hat.shl(1),
                exact_power: m_hat.is_power_of_two(),
                x,
                y,
                sum,
                m_hat,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeEntry {
    pub x: BitString,
    pub codeword: BitString,
    pub interval: Interval,
    /// Absent for books read back from a file.
    pub source: Option<PsiEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBook {
    pub aux: BitString,
    pub schedule_id: String,
    pub budget: u64,
    pub entries: Vec<CodeEntry>,
    pub cursor: Dyadic,
    by_codeword: BTreeMap<BitString, usize>,
}

impl CodeBook {
    pub fn from_entries(aux: BitString, schedule_id: String, budget: u64, entries: Vec<CodeEntry>) -> Self {
        let cursor = entries
            .last()
            .map(|e| e.interval.hi().clone())
            .unwrap_or_else(Dyadic::zero);
        let by_codeword = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.codeword.clone(), i))
            .collect();
        CodeBook {
            aux,
            schedule_id,
            budget,
            entries,
            cursor,
            by_codeword,
        }
    }

    pub fn codewords(&self) -> impl Iterator<Item = &BitString> {
        self.entries.iter().map(|e| &e.codeword)
    }

    /// Consecutive, adjacent intervals from 0, each holding its codeword's
    /// binary interval.
    pub fn is_well_laid_out(&self) -> bool {
        let mut at = Dyadic::zero();
        for e in &self.entries {
            if *e.interval.lo() != at {
                return false;
            }
            let gamma = crate::arith::BinaryInterval::new(e.codeword.clone()).to_interval();
            if !e.interval.contains_interval(&gamma) {
                return false;
            }
            at = e.interval.hi().clone();
        }
        at <= Dyadic::one()
    }

    /// The shortest codeword of `x`, first allocated among equals.
    pub fn encode(&self, x: &BitString) -> Option<&BitString> {
        self.entries
            .iter()
            .filter(|e| &e.x == x)
            .map(|e| &e.codeword)
            .min_by_key(|c| c.len())
    }

    /// `Some(x)` when `p` is exactly the codeword of an allocated interval,
    /// `None` otherwise (the decoding machine runs forever).
    pub fn decode(&self, p: &BitString, y: &BitString) -> Result<Option<&BitString>, CoderError> {
        if *y != self.aux {
            return Err(CoderError::AuxMismatch {
                book: self.aux.clone(),
                query: y.clone(),
            });
        }
        Ok(self.by_codeword.get(p).map(|&i| &self.entries[i].x))
    }

    /// A machine with the same input/output behaviour as [`decode`]:
    /// a binary trie over the codewords whose leaves print `x` and halt.
    /// Paths leaving the trie enter a state that spins forever.
    ///
    /// [`decode`]: CodeBook::decode
    pub fn to_machine(&self) -> PrefixMachine {
        const SPIN: usize = 0;
        let spin = AuxBranch {
            out: None,
            aux_move: Move::Stay,
            next: SPIN,
        };
        let mut states: Vec<Instr> = vec![Instr::Aux([spin; 3])];
        // Trie nodes, built breadth-first from the root.
        #[derive(Default)]
        struct Node {
            child: [Option<usize>; 2],
            leaf: Option<usize>,
        }
        let mut nodes = vec![Node::default()];
        for (i, e) in self.entries.iter().enumerate() {
            let mut at = 0;
            for b in e.codeword.iter() {
                let slot = b as usize;
                at = match nodes[at].child[slot] {
                    Some(n) => n,
                    None => {
                        nodes.push(Node::default());
                        let n = nodes.len() - 1;
                        nodes[at].child[slot] = Some(n);
                        n
                    }
                };
            }
            nodes[at].leaf = Some(i);
        }
        if self.entries.is_empty() {
            return PrefixMachine::new(states).expect("valid");
        }
        // State of node n is 1 + n; output chains follow.
        let base = 1 + nodes.len();
        let mut chains: Vec<Instr> = Vec::new();
        let mut node_states = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let instr = match node.leaf {
                Some(i) => {
                    let x = &self.entries[i].x;
                    if x.is_empty() {
                        Instr::Halt
                    } else {
                        let first = base + chains.len();
                        for (k, b) in x.iter().enumerate() {
                            let br = AuxBranch {
                                out: Some(b),
                                aux_move: Move::Stay,
                                next: first + k + 1,
                            };
                            chains.push(Instr::Aux([br; 3]));
                        }
                        chains.push(Instr::Halt);
                        // Jump into the chain through a silent aux step.
                        let br = AuxBranch {
                            out: None,
                            aux_move: Move::Stay,
                            next: first,
                        };
                        Instr::Aux([br; 3])
                    }
                }
                None => {
                    let go = |c: Option<usize>| InputBranch {
                        out: None,
                        next: c.map_or(SPIN, |n| 1 + n),
                    };
                    Instr::Input([go(node.child[0]), go(node.child[1])])
                }
            };
            node_states.push(instr);
        }
        states.extend(node_states);
        states.extend(chains);
        // Machines start in state 0; swap the root in and patch targets.
        let n = states.len();
        let remap = |s: usize| match s {
            0 => 1,
            1 => 0,
            s => s,
        };
        states.swap(0, 1);
        let states = states
            .into_iter()
            .map(|ins| match ins {
                Instr::Input(bs) => Instr::Input(bs.map(|b| InputBranch { next: remap(b.next), ..b })),
                Instr::Aux(bs) => Instr::Aux(bs.map(|b| AuxBranch { next: remap(b.next), ..b })),
                Instr::Work(bs) => Instr::Work(bs.map(|b| crate::vm::WorkBranch { next: remap(b.next), ..b })),
                Instr::Halt => Instr::Halt,
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(states.len(), n);
        PrefixMachine::new(states).expect("valid trie machine")
    }
}

/// Allocates `mass/2` per event for column `y`, in event order.
pub fn build_codebook(run: &PsiRun, y: &BitString) -> Result<CodeBook, CoderError> {
    let mut cursor = Dyadic::zero();
    let mut entries = Vec::new();
    for e in run.events_for(y) {
        let hi = &cursor + &e.mass.shr(1);
        if hi > Dyadic::one() {
            return Err(CoderError::AllocationOverflow { x: e.x.clone() });
        }
        let interval = Interval::new(cursor, hi.clone()).expect("positive length");
        let codeword = largest_binary_subinterval(&interval)
            .expect("nonempty interval")
            .into_word();
        entries.push(CodeEntry {
            x: e.x.clone(),
            codeword,
            interval,
            source: Some(e.clone()),
        });
        cursor = hi;
    }
    Ok(CodeBook::from_entries(
        y.clone(),
        run.schedule.id(),
        run.schedule.max_rounds,
        entries,
    ))
}

/// `φ(x, y, t)`: the mass of programs with output `index_word(x)` reported
/// by stage `t` of a dovetail with aux `index_word(y)`.
pub fn approximator_from_events(y: &BitString, events: &[HaltEvent]) -> Option<TableApproximator> {
    let yi = word_index(y)?;
    let mut cum: BTreeMap<u64, BTreeMap<u64, Dyadic>> = BTreeMap::new();
    for e in events {
        let xi = word_index(&e.output)?;
        let stages = cum.entry(xi).or_default();
        *stages.entry(e.stage).or_insert_with(Dyadic::zero) += &Dyadic::pow2_neg(e.program.len() as u64);
    }
    let mut t = TableApproximator::new();
    for (xi, stages) in cum {
        let mut acc = Dyadic::zero();
        for (stage, add) in stages {
            acc += &add;
            t.insert(xi, yi, stage, Some(acc.clone()));
        }
    }
    Some(t)
}

/// One row of the coding-gap table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingGapRow {
    pub x: BitString,
    pub k_bits: Option<usize>,
    pub q: Option<Dyadic>,
    pub m_hat: Dyadic,
    /// `ceil(log2(1/m̂))`.
    pub log_inv_m: i64,
    pub code_len: Option<usize>,
    /// `2^-K̂ <= Q̂`, when both exist.
    pub k_within_q: Option<bool>,
    /// `code_len <= ceil(log2(1/m̂)) + 3`.
    pub code_within_bound: Option<bool>,
}

impl CodingGapRow {
    pub fn code_gap(&self) -> Option<i64> {
        self.code_len.map(|l| l as i64 - self.log_inv_m)
    }

    pub fn holds(&self) -> bool {
        self.k_within_q != Some(false) && self.code_within_bound != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingGapReport {
    pub rows: Vec<CodingGapRow>,
    /// Largest `K̂ - floor(-log2 Q̂)` seen; descriptive only.
    pub max_k_q_gap: Option<i64>,
    pub book: CodeBook,
}

/// Rows for every `x` with a positive `m̂` in column `y`.
pub fn codebook_gap_rows(run: &PsiRun, book: &CodeBook) -> Vec<CodingGapRow> {
    run.m_hat
        .iter()
        .filter(|((_, y), _)| *y == book.aux)
        .map(|((x, _), m)| {
            let log_inv_m = m.ceil_neg_log2().expect("positive");
            let code_len = book.encode(x).map(|c| c.len());
            CodingGapRow {
                x: x.clone(),
                k_bits: None,
                q: None,
                m_hat: m.clone(),
                log_inv_m,
                code_len,
                k_within_q: None,
                code_within_bound: code_len.map(|l| l as i64 <= log_inv_m + 3),
            }
        })
        .collect()
}

/// Discretizes the machine's own halting stream on aux `y`, read as the
/// lower approximation `m̂ = Q̂` with stage as time.
pub fn machine_psi_run<M: Machine>(m: &M, y: &BitString, bounds: SearchBounds) -> Result<PsiRun, CoderError> {
    let stage = complete_stage(bounds.length_bound, bounds.step_bound);
    let cfg = DovetailConfig::new(stage).with_max_len(bounds.length_bound);
    let events = dovetail(m, y, cfg);
    let phi = approximator_from_events(y, &events).expect("word indices fit");
    let max_x = phi.support().map(|(x, _)| x).max().unwrap_or(0);
    let schedule = PsiSchedule::new(vec![word_index(y).expect("fits")], max_x, max_x + phi.horizon());
    psi_discretize(&phi, &schedule)
}

/// Compares `K̂`, `Q̂` and the codebook built from [`machine_psi_run`].
pub fn coding_gap_report<M: Machine>(m: &M, y: &BitString, bounds: SearchBounds) -> Result<CodingGapReport, CoderError> {
    let stage = complete_stage(bounds.length_bound, bounds.step_bound);
    let k = k_table(m, y, bounds);
    let q = approx_apriori(m, y, stage, bounds.length_bound);
    let run = machine_psi_run(m, y, bounds)?;
    let book = build_codebook(&run, y)?;
    let mut rows = codebook_gap_rows(&run, &book);
    let mut max_gap: Option<i64> = None;
    for row in &mut rows {
        let qx = q.get(&row.x);
        if let Some(e) = k.get(&row.x) {
            row.k_bits = Some(e.bits);
            row.k_within_q = Some(Dyadic::pow2_neg(e.bits as u64) <= qx);
            let g = e.bits as i64 + qx.floor_log2().expect("positive");
            max_gap = Some(max_gap.map_or(g, |m| m.max(g)));
        }
        row.q = Some(qx);
    }
    Ok(CodingGapReport {
        rows,
        max_k_q_gap: max_gap,
        book,
    })
}
