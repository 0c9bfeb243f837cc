use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use super::{Machine, RunOutcome};
use crate::bits::BitString;
use crate::codes::nat_to_string;

/// Head movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Stay,
    Right,
    Left,
}

/// What a work-tape transition writes under the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Work {
    Zero,
    One,
    Blank,
    Keep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InputBranch {
    pub out: Option<bool>,
    pub next: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AuxBranch {
    pub out: Option<bool>,
    pub aux_move: Move,
    pub next: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WorkBranch {
    pub out: Option<bool>,
    pub write: Work,
    pub work_move: Move,
    pub next: usize,
}

/// The behaviour of one state. Each non-halting state senses exactly one
/// source and branches on the symbol it sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    /// Consume the next input bit; branch on `0` / `1`.
    Input([InputBranch; 2]),
    /// Branch on the auxiliary symbol under the head: `0` / `1` / end marker.
    Aux([AuxBranch; 3]),
    /// Branch on the work symbol under the head: `0` / `1` / blank.
    Work([WorkBranch; 3]),
    Halt,
}

/// A deterministic prefix machine given by a state table; state 0 starts.
///
/// # Description format
///
/// Machines are enumerated through a fixed binary description:
///
/// ```text
/// description := 1^(n-1) 0  state_0 … state_(n-1)
/// state       := 00 in  in          (input)
///              | 01 ax  ax  ax      (aux: 0, 1, end marker)
///              | 10 wk  wk  wk      (work: 0, 1, blank)
///              | 11                 (halt)
/// in          := out target
/// ax          := out move target
/// wk          := out write move target
/// out         := 00 none | 01 emit 0 | 10 emit 1
/// move        := 00 stay | 01 right  | 10 left
/// write       := 00 '0'  | 01 '1'    | 10 blank | 11 keep
/// target      := ceil(log2 n) bits, big-endian, value < n
/// ```
///
/// Any other bit pattern (code `11` for out or move, a target `>= n`,
/// trailing or missing bits) is not a valid description.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrefixMachine {
    states: Vec<Instr>,
}

const MAX_STATES: usize = 1 << 12;

fn target_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl PrefixMachine {
    /// Builds a machine, checking that every target names a state.
    pub fn new(states: Vec<Instr>) -> Option<Self> {
        let n = states.len();
        if n == 0 || n > MAX_STATES {
            return None;
        }
        let ok = states.iter().all(|s| match s {
            Instr::Input(b) => b.iter().all(|b| b.next < n),
            Instr::Aux(b) => b.iter().all(|b| b.next < n),
            Instr::Work(b) => b.iter().all(|b| b.next < n),
            Instr::Halt => true,
        });
        ok.then_some(PrefixMachine { states })
    }

    pub fn states(&self) -> &[Instr] {
        &self.states
    }

    pub fn encode(&self) -> BitString {
        let n = self.states.len();
        let w = target_width(n);
        let mut out = BitString::repeat(true, n - 1);
        out.push(false);
        let put = |out: &mut BitString, v: u64, width: usize| out.extend_from(&BitString::from_uint(v, width));
        let out_code = |o: Option<bool>| match o {
            None => 0,
            Some(false) => 1,
            Some(true) => 2,
        };
        let move_code = |m: Move| match m {
            Move::Stay => 0,
            Move::Right => 1,
            Move::Left => 2,
        };
        for s in &self.states {
            match s {
                Instr::Input(bs) => {
                    put(&mut out, 0, 2);
                    for b in bs {
                        put(&mut out, out_code(b.out), 2);
                        put(&mut out, b.next as u64, w);
                    }
                }
                Instr::Aux(bs) => {
                    put(&mut out, 1, 2);
                    for b in bs {
                        put(&mut out, out_code(b.out), 2);
                        put(&mut out, move_code(b.aux_move), 2);
                        put(&mut out, b.next as u64, w);
                    }
                }
                Instr::Work(bs) => {
                    put(&mut out, 2, 2);
                    for b in bs {
                        put(&mut out, out_code(b.out), 2);
                        let wc = match b.write {
                            Work::Zero => 0,
                            Work::One => 1,
                            Work::Blank => 2,
                            Work::Keep => 3,
                        };
                        put(&mut out, wc, 2);
                        put(&mut out, move_code(b.work_move), 2);
                        put(&mut out, b.next as u64, w);
                    }
                }
                Instr::Halt => put(&mut out, 3, 2),
            }
        }
        out
    }

    /// Parses a description; `None` unless it is valid and fully consumed.
    pub fn decode(desc: &BitString) -> Option<Self> {
        let mut r = Reader { bits: desc, pos: 0 };
        let mut n = 1;
        while r.bit()? {
            n += 1;
            if n > MAX_STATES {
                return None;
            }
        }
        let w = target_width(n);
        let mut states = Vec::with_capacity(n);
        for _ in 0..n {
            let instr = match r.uint(2)? {
                0 => Instr::Input([r.input_branch(w, n)?, r.input_branch(w, n)?]),
                1 => Instr::Aux([r.aux_branch(w, n)?, r.aux_branch(w, n)?, r.aux_branch(w, n)?]),
                2 => Instr::Work([r.work_branch(w, n)?, r.work_branch(w, n)?, r.work_branch(w, n)?]),
                _ => Instr::Halt,
            };
            states.push(instr);
        }
        (r.pos == desc.len()).then_some(PrefixMachine { states })
    }

    /// First 16 hex digits of the SHA-256 of the description text.
    pub fn fingerprint(&self) -> String {
        let desc = alloc::format!("{}", self.encode());
        let digest = Sha256::digest(desc.as_bytes());
        let mut s = String::new();
        for b in digest.iter().take(8) {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub(crate) fn step_from(
        &self,
        exec: &mut MachineExec,
        input: &BitString,
        offset: usize,
        aux: &BitString,
    ) -> Option<RunOutcome> {
        match self.states[exec.state] {
            Instr::Halt => {
                let output = exec.output.clone();
                let bits_read = exec.read;
                if offset + exec.read == input.len() {
                    Some(RunOutcome::Halted { output, bits_read })
                } else {
                    Some(RunOutcome::Unconsumed { output, bits_read })
                }
            }
            Instr::Input(branches) => {
                let Some(bit) = input.get(offset + exec.read) else {
                    return Some(RunOutcome::RequestedPastEnd);
                };
                exec.read += 1;
                let b = branches[bit as usize];
                exec.emit(b.out);
                exec.state = b.next;
                None
            }
            Instr::Aux(branches) => {
                let sym = usize::try_from(exec.aux_head)
                    .ok()
                    .and_then(|h| aux.get(h))
                    .map_or(2, |b| b as usize);
                let b = branches[sym];
                exec.emit(b.out);
                let len = aux.len() as isize;
                exec.aux_head = match b.aux_move {
                    Move::Stay => exec.aux_head,
                    Move::Right => (exec.aux_head + 1).min(len),
                    Move::Left => (exec.aux_head - 1).max(-1),
                };
                exec.state = b.next;
                None
            }
            Instr::Work(branches) => {
                let b = branches[exec.work.read() as usize];
                exec.emit(b.out);
                exec.work.write(b.write);
                exec.work.shift(b.work_move);
                exec.state = b.next;
                None
            }
        }
    }
}

struct Reader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl Reader<'_> {
    fn bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    fn uint(&mut self, width: usize) -> Option<u64> {
        let mut v = 0;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Some(v)
    }

    fn out(&mut self) -> Option<Option<bool>> {
        match self.uint(2)? {
            0 => Some(None),
            1 => Some(Some(false)),
            2 => Some(Some(true)),
            _ => None,
        }
    }

    fn mv(&mut self) -> Option<Move> {
        match self.uint(2)? {
            0 => Some(Move::Stay),
            1 => Some(Move::Right),
            2 => Some(Move::Left),
            _ => None,
        }
    }

    fn target(&mut self, w: usize, n: usize) -> Option<usize> {
        let t = self.uint(w)? as usize;
        (t < n).then_some(t)
    }

    fn input_branch(&mut self, w: usize, n: usize) -> Option<InputBranch> {
        Some(InputBranch {
            out: self.out()?,
            next: self.target(w, n)?,
        })
    }

    fn aux_branch(&mut self, w: usize, n: usize) -> Option<AuxBranch> {
        Some(AuxBranch {
            out: self.out()?,
            aux_move: self.mv()?,
            next: self.target(w, n)?,
        })
    }

    fn work_branch(&mut self, w: usize, n: usize) -> Option<WorkBranch> {
        let out = self.out()?;
        let write = match self.uint(2)? {
            0 => Work::Zero,
            1 => Work::One,
            2 => Work::Blank,
            _ => Work::Keep,
        };
        Some(WorkBranch {
            out,
            write,
            work_move: self.mv()?,
            next: self.target(w, n)?,
        })
    }
}

/// Work tape symbols: 0, 1, 2 = blank.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct WorkTape {
    cells: VecDeque<u8>,
    head: usize,
}

impl WorkTape {
    fn read(&self) -> u8 {
        self.cells.get(self.head).copied().unwrap_or(2)
    }

    fn write(&mut self, w: Work) {
        let sym = match w {
            Work::Zero => 0,
            Work::One => 1,
            Work::Blank => 2,
            Work::Keep => return,
        };
        while self.cells.len() <= self.head {
            self.cells.push_back(2);
        }
        self.cells[self.head] = sym;
    }

    fn shift(&mut self, m: Move) {
        match m {
            Move::Stay => {}
            Move::Right => self.head += 1,
            Move::Left => {
                if self.head == 0 {
                    self.cells.push_front(2);
                } else {
                    self.head -= 1;
                }
            }
        }
    }
}

/// Execution state of a [`PrefixMachine`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineExec {
    state: usize,
    read: usize,
    aux_head: isize,
    work: WorkTape,
    output: BitString,
}

impl MachineExec {
    pub(crate) fn new() -> Self {
        MachineExec {
            state: 0,
            read: 0,
            aux_head: 0,
            work: WorkTape::default(),
            output: BitString::empty(),
        }
    }

    pub fn bits_read(&self) -> usize {
        self.read
    }

    fn emit(&mut self, out: Option<bool>) {
        if let Some(b) = out {
            self.output.push(b);
        }
    }
}

impl Machine for PrefixMachine {
    type Exec = MachineExec;

    fn id(&self) -> String {
        self.fingerprint()
    }

    fn boot(&self) -> MachineExec {
        MachineExec::new()
    }

    fn step(&self, exec: &mut MachineExec, input: &BitString, aux: &BitString) -> Option<RunOutcome> {
        self.step_from(exec, input, 0, aux)
    }
}

/// Valid descriptions in shortlex order, numbered from 1.
#[derive(Clone, Debug, Default)]
pub struct MachineEnumeration {
    next_candidate: u64,
    found: u64,
}

impl MachineEnumeration {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Iterator for MachineEnumeration {
    /// `(index, description, machine)`
    type Item = (u64, BitString, PrefixMachine);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let desc = nat_to_string(self.next_candidate);
            self.next_candidate += 1;
            if let Some(m) = PrefixMachine::decode(&desc) {
                self.found += 1;
                return Some((self.found, desc, m));
            }
        }
    }
}

/// Machine `i` (from 1) of the standard enumeration.
pub fn enumerate_machines(i: u64) -> PrefixMachine {
    assert!(i >= 1, "machines are numbered from 1");
    MachineEnumeration::new()
        .nth((i - 1) as usize)
        .expect("the enumeration is infinite")
        .2
}
