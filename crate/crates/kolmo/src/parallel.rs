//! Parallel evaluation of the dovetail schedule.
//!
//! Program `j` runs alone for `max_stage - j` steps; a halt after `s`
//! steps lands at stage `j + s`. Sorting by `(stage, j)` reproduces the
//! sequential event order exactly.

use kolmo_core::bits::BitString;
use kolmo_core::codes::nat_to_string;
use kolmo_core::vm::{run_traced, DovetailConfig, HaltEvent, Machine, RunOutcome};
use rayon::prelude::*;

pub fn par_dovetail<M: Machine + Sync>(machine: &M, aux: &BitString, cfg: DovetailConfig) -> Vec<HaltEvent> {
    let mut found: Vec<(u64, u64, HaltEvent)> = (1..=cfg.program_count())
        .into_par_iter()
        .filter_map(|j| {
            let program = nat_to_string(j - 1);
            let (outcome, steps) = run_traced(machine, &program, aux, cfg.max_stage - j);
            match outcome {
                RunOutcome::Halted { output, .. } => Some((
                    j + steps,
                    j,
                    HaltEvent {
                        program,
                        output,
                        stage: j + steps,
                        machine_index: cfg.machine_index,
                    },
                )),
                _ => None,
            }
        })
        .collect();
    found.sort_by_key(|(stage, j, _)| (*stage, *j));
    found.into_iter().map(|(_, _, e)| e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use kolmo_core::vm::{dovetail, enumerate_machines, fixtures, UniversalMachine};

    #[test]
    fn equals_sequential() {
        let aux: BitString = "10".parse().unwrap();
        for stage in [1, 2, 7, 60, 400] {
            let cfg = DovetailConfig::new(stage);
            let m = fixtures::aux_or_bar();
            assert_eq!(par_dovetail(&m, &aux, cfg), dovetail(&m, &aux, cfg));
            let cfg = cfg.with_max_len(7).with_index(3);
            let u = UniversalMachine::new(64);
            assert_eq!(par_dovetail(&u, &aux, cfg), dovetail(&u, &aux, cfg));
        }
        for i in 1..=30 {
            let m = enumerate_machines(i);
            let cfg = DovetailConfig::new(300).with_max_len(6);
            assert_eq!(par_dovetail(&m, &aux, cfg), dovetail(&m, &aux, cfg));
        }
    }
}
