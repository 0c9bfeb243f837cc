//! Hand-built machines with hand-derivable behaviour.

use alloc::vec;

use super::{AuxBranch, Instr, InputBranch, Move, PrefixMachine, Work, WorkBranch};

fn input(on0: (Option<bool>, usize), on1: (Option<bool>, usize)) -> Instr {
    Instr::Input([
        InputBranch { out: on0.0, next: on0.1 },
        InputBranch { out: on1.0, next: on1.1 },
    ])
}

fn work_all(write: Work, work_move: Move, next: usize) -> Instr {
    let b = WorkBranch { out: None, write, work_move, next };
    Instr::Work([b; 3])
}

/// Halts at once: the empty program outputs the empty word.
pub fn halt_immediately() -> PrefixMachine {
    PrefixMachine::new(vec![Instr::Halt]).unwrap()
}

/// Reads one bit, echoes it, halts.
pub fn echo_one() -> PrefixMachine {
    PrefixMachine::new(vec![input((Some(false), 1), (Some(true), 1)), Instr::Halt]).unwrap()
}

/// Reads two bits, echoing each, halts.
pub fn copy_two() -> PrefixMachine {
    PrefixMachine::new(vec![
        input((Some(false), 1), (Some(true), 1)),
        input((Some(false), 2), (Some(true), 2)),
        Instr::Halt,
    ])
    .unwrap()
}

/// Programs `00 → 0`, `01 → 1`, `100 → 0`, `101 → 1`, `11 → ε`: every
/// one-bit output has one program of length 2 and one of length 3.
pub fn two_routes() -> PrefixMachine {
    const H: usize = 4;
    PrefixMachine::new(vec![
        input((None, 1), (None, 2)),
        input((Some(false), H), (Some(true), H)),
        input((None, 3), (None, H)),
        input((Some(false), H), (Some(true), H)),
        Instr::Halt,
    ])
    .unwrap()
}

/// Never halts and never reads.
pub fn looping() -> PrefixMachine {
    let b = AuxBranch { out: None, aux_move: Move::Stay, next: 0 };
    PrefixMachine::new(vec![Instr::Aux([b; 3])]).unwrap()
}

/// Program `0` copies the auxiliary word to the output; program `1 x̄`
/// (with `x̄ = 1^|x| 0 x`) outputs `x`, counting `|x|` on the work tape.
pub fn aux_or_bar() -> PrefixMachine {
    const H: usize = 7;
    let copy = |bit: bool| AuxBranch { out: Some(bit), aux_move: Move::Right, next: 1 };
    PrefixMachine::new(vec![
        // 0: choose mode
        input((None, 1), (None, 2)),
        // 1: copy aux until the end marker
        Instr::Aux([
            copy(false),
            copy(true),
            AuxBranch { out: None, aux_move: Move::Stay, next: H },
        ]),
        // 2: unary length, one mark per 1
        input((None, 4), (None, 3)),
        // 3: mark
        work_all(Work::One, Move::Right, 2),
        // 4: step back onto the last mark
        work_all(Work::Keep, Move::Left, 5),
        // 5: consume a mark or stop
        Instr::Work([
            WorkBranch { out: None, write: Work::Keep, work_move: Move::Stay, next: H },
            WorkBranch { out: None, write: Work::Blank, work_move: Move::Left, next: 6 },
            WorkBranch { out: None, write: Work::Keep, work_move: Move::Stay, next: H },
        ]),
        // 6: copy one payload bit
        input((Some(false), 5), (Some(true), 5)),
        Instr::Halt,
    ])
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::codes::{bar_encode, nat_to_string};
    use crate::vm::{run, RunOutcome};

    #[test]
    fn aux_or_bar_decodes_bar_codes_and_copies_aux() {
        let m = aux_or_bar();
        for n in 0..64 {
            let x = nat_to_string(n);
            let p = bits("1").concat(&bar_encode(&x));
            assert_eq!(run(&m, &p, &bits("01"), 10_000), RunOutcome::Halted { output: x, bits_read: p.len() });
        }
        for aux in ["", "1", "0110"] {
            assert_eq!(
                run(&m, &bits("0"), &bits(aux), 100),
                RunOutcome::Halted { output: bits(aux), bits_read: 1 }
            );
        }
    }

    #[test]
    fn two_routes_programs() {
        let m = two_routes();
        for (p, x) in [("00", "0"), ("01", "1"), ("100", "0"), ("101", "1"), ("11", "")] {
            assert_eq!(run(&m, &bits(p), &bits(""), 10).halted_output(), Some(&bits(x)));
        }
    }
}
