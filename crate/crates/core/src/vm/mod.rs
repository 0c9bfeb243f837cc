//! A toy prefix machine model and the machinery around it.
//!
//! A machine reads its program from a one-way input tape, one bit per
//! explicit request, may consult a read-only auxiliary tape holding the
//! conditional `y`, owns an unbounded work tape, and appends to a one-way
//! output tape. A run only counts as a halting computation on program `p`
//! when the machine halts having read exactly the bits of `p`: this makes
//! the set of halting programs prefix-free by construction.

mod dovetail;
pub mod fixtures;
mod machine;
mod universal;

pub use dovetail::{dovetail, DovetailConfig, Dovetailer, HaltEvent};
pub use machine::{
    enumerate_machines, AuxBranch, Instr, InputBranch, MachineEnumeration, MachineExec, Move,
    PrefixMachine, Work, WorkBranch,
};
pub use universal::{universal_run, UniversalExec, UniversalMachine};

use alloc::string::String;

use crate::bits::BitString;

/// How a bounded run ended.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    /// Halted after reading exactly the whole program.
    Halted { output: BitString, bits_read: usize },
    /// The step budget ran out first.
    OutOfFuel,
    /// The machine asked for an input bit beyond the end of the program.
    RequestedPastEnd,
    /// Halted with program bits left unread. Not a computation on the
    /// supplied program: the program that actually ran is the consumed
    /// prefix.
    Unconsumed { output: BitString, bits_read: usize },
}

impl RunOutcome {
    pub fn halted_output(&self) -> Option<&BitString> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

/// A stepping interface shared by table machines and the universal machine.
pub trait Machine {
    /// Resumable execution state.
    type Exec: Clone;

    /// Stable identifier used in provenance headers.
    fn id(&self) -> String;

    fn boot(&self) -> Self::Exec;

    /// Executes one step. Returns `None` while the run continues.
    ///
    /// When the result is [`RunOutcome::RequestedPastEnd`] the state is left
    /// untouched, so the caller may extend `input` and step again.
    fn step(&self, exec: &mut Self::Exec, input: &BitString, aux: &BitString)
        -> Option<RunOutcome>;
}

/// Runs `m` on `program` with `aux` on the auxiliary tape for at most
/// `budget` steps. Also returns the number of steps executed.
pub fn run_traced<M: Machine + ?Sized>(
    m: &M,
    program: &BitString,
    aux: &BitString,
    budget: u64,
) -> (RunOutcome, u64) {
    let mut exec = m.boot();
    for step in 1..=budget {
        if let Some(outcome) = m.step(&mut exec, program, aux) {
            return (outcome, step);
        }
    }
    (RunOutcome::OutOfFuel, budget)
}

/// [`run_traced`] without the step count.
pub fn run<M: Machine + ?Sized>(
    m: &M,
    program: &BitString,
    aux: &BitString,
    budget: u64,
) -> RunOutcome {
    run_traced(m, program, aux, budget).0
}
