use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::machine::{MachineEnumeration, MachineExec, PrefixMachine};
use super::{run, Machine, RunOutcome};
use crate::bits::BitString;
use crate::codes::string_to_nat;

/// The reference machine `U`: on input `bar(nat_to_string(i)) p` it
/// simulates machine `i` of the enumeration on `p`, step for step.
///
/// Reading each bit of the index prefix costs one step, so a run of
/// machine `i` within `b` steps corresponds to a run of `U` within
/// `b + |bar(i)|` steps. An index prefix naming 0 is not a machine: `U`
/// diverges on it.
#[derive(Clone, Debug)]
pub struct UniversalMachine {
    table: Vec<Arc<PrefixMachine>>,
}

#[derive(Clone, Debug)]
pub enum UniversalExec {
    Unary { ones: usize },
    Index { remaining: usize, acc: BitString },
    Diverged,
    Simulating {
        offset: usize,
        machine: Arc<PrefixMachine>,
        inner: MachineExec,
    },
}

impl UniversalMachine {
    /// Precomputes machines `1..=cached`; higher indices are decoded on
    /// demand.
    pub fn new(cached: usize) -> Self {
        let table = MachineEnumeration::new()
            .take(cached)
            .map(|(_, _, m)| Arc::new(m))
            .collect();
        UniversalMachine { table }
    }

    fn machine(&self, i: u64) -> Arc<PrefixMachine> {
        match self.table.get((i - 1) as usize) {
            Some(m) => m.clone(),
            None => Arc::new(super::machine::enumerate_machines(i)),
        }
    }
}

impl Default for UniversalMachine {
    fn default() -> Self {
        UniversalMachine::new(1024)
    }
}

impl Machine for UniversalMachine {
    type Exec = UniversalExec;

    fn id(&self) -> String {
        String::from("universal")
    }

    fn boot(&self) -> UniversalExec {
        UniversalExec::Unary { ones: 0 }
    }

    fn step(&self, exec: &mut UniversalExec, input: &BitString, aux: &BitString) -> Option<RunOutcome> {
        match exec {
            UniversalExec::Unary { ones } => {
                let Some(bit) = input.get(*ones) else {
                    return Some(RunOutcome::RequestedPastEnd);
                };
                if bit {
                    *ones += 1;
                } else if *ones == 0 {
                    *exec = UniversalExec::Diverged;
                } else {
                    *exec = UniversalExec::Index {
                        remaining: *ones,
                        acc: BitString::empty(),
                    };
                }
                None
            }
            UniversalExec::Index { remaining, acc } => {
                let pos = 2 * (acc.len() + *remaining) + 1 - *remaining;
                let Some(bit) = input.get(pos) else {
                    return Some(RunOutcome::RequestedPastEnd);
                };
                acc.push(bit);
                *remaining -= 1;
                if *remaining == 0 {
                    let offset = 2 * acc.len() + 1;
                    *exec = match string_to_nat(acc) {
                        Some(i) if i >= 1 => UniversalExec::Simulating {
                            offset,
                            machine: self.machine(i),
                            inner: MachineExec::new(),
                        },
                        _ => UniversalExec::Diverged,
                    };
                }
                None
            }
            UniversalExec::Diverged => None,
            UniversalExec::Simulating { offset, machine, inner } => {
                let offset = *offset;
                machine
                    .step_from(inner, input, offset, aux)
                    .map(|outcome| match outcome {
                        RunOutcome::Halted { output, bits_read } => RunOutcome::Halted {
                            output,
                            bits_read: bits_read + offset,
                        },
                        RunOutcome::Unconsumed { output, bits_read } => RunOutcome::Unconsumed {
                            output,
                            bits_read: bits_read + offset,
                        },
                        other => other,
                    })
            }
        }
    }
}

/// Runs `U` on `⟨i, p⟩ = bar(nat_to_string(i)) p`.
pub fn universal_run(u: &UniversalMachine, pair: &BitString, aux: &BitString, budget: u64) -> RunOutcome {
    run(u, pair, aux, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::codes::{bar_encode, nat_to_string};
    use crate::vm::enumerate_machines;

    fn index_prefix(i: u64) -> BitString {
        bar_encode(&nat_to_string(i))
    }

    #[test]
    fn simulates_halting_machine_one() {
        let u = UniversalMachine::new(32);
        // Machine 1 halts immediately; bar("0") = "100".
        let pair = index_prefix(1);
        assert_eq!(pair, bits("100"));
        assert_eq!(
            universal_run(&u, &pair, &bits(""), 10),
            RunOutcome::Halted { output: bits(""), bits_read: 3 }
        );
    }

    #[test]
    fn index_zero_diverges() {
        let u = UniversalMachine::new(4);
        assert_eq!(universal_run(&u, &bits("0"), &bits(""), 50), RunOutcome::OutOfFuel);
        assert_eq!(universal_run(&u, &bits(""), &bits(""), 50), RunOutcome::RequestedPastEnd);
        assert_eq!(universal_run(&u, &bits("110"), &bits(""), 50), RunOutcome::RequestedPastEnd);
    }

    #[test]
    fn agrees_with_direct_runs() {
        let u = UniversalMachine::new(32);
        for i in 1..=20u64 {
            let m = enumerate_machines(i);
            let prefix = index_prefix(i);
            for n in 0..(1u64 << 7) - 1 {
                let p = nat_to_string(n);
                for aux in [bits(""), bits("1")] {
                    let budget = 64;
                    let direct = run(&m, &p, &aux, budget);
                    let via_u = universal_run(&u, &prefix.concat(&p), &aux, budget + prefix.len() as u64);
                    let expected = match direct {
                        RunOutcome::Halted { output, bits_read } => RunOutcome::Halted {
                            output,
                            bits_read: bits_read + prefix.len(),
                        },
                        RunOutcome::Unconsumed { output, bits_read } => RunOutcome::Unconsumed {
                            output,
                            bits_read: bits_read + prefix.len(),
                        },
                        other => other,
                    };
                    assert_eq!(via_u, expected, "machine {i} program {p:?}");
                }
            }
        }
    }

    #[test]
    fn lazily_decodes_uncached_indices() {
        let small = UniversalMachine::new(2);
        let big = UniversalMachine::new(64);
        let pair = index_prefix(40).concat(&bits("1011"));
        assert_eq!(universal_run(&small, &pair, &bits(""), 100), universal_run(&big, &pair, &bits(""), 100));
    }
}
