use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{Machine, RunOutcome};
use crate::bits::BitString;
use crate::codes::nat_to_string;

/// A halting computation found by the scheduler.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HaltEvent {
    pub program: BitString,
    pub output: BitString,
    pub stage: u64,
    /// Enumeration index of the machine, when it has one.
    pub machine_index: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DovetailConfig {
    pub max_stage: u64,
    /// Programs longer than this are never started. Their events would be
    /// independent of everything else, so this only filters the stream.
    pub max_program_len: Option<usize>,
    pub machine_index: Option<u64>,
}

impl DovetailConfig {
    pub fn new(max_stage: u64) -> Self {
        DovetailConfig {
            max_stage,
            max_program_len: None,
            machine_index: None,
        }
    }

    pub fn with_max_len(mut self, len: usize) -> Self {
        self.max_program_len = Some(len);
        self
    }

    pub fn with_index(mut self, index: u64) -> Self {
        self.machine_index = Some(index);
        self
    }

    /// Number of programs that can ever be started: program `j` gets its
    /// first step at stage `j + 1`.
    pub fn program_count(&self) -> u64 {
        let by_stage = self.max_stage.saturating_sub(1);
        match self.max_program_len {
            Some(len) if len < 63 => by_stage.min((1u64 << (len + 1)) - 1),
            _ => by_stage,
        }
    }
}

struct Live<E> {
    program: BitString,
    exec: E,
}

/// Stage-by-stage scheduler over all programs in shortlex order.
///
/// Program `j` (from 1, the `j`-th string in shortlex order) receives its
/// `(k - j)`-th step at stage `k`; within a stage programs advance in
/// increasing `j`. Each halting program is reported once, at the stage of
/// its halting step.
pub struct Dovetailer<'m, M: Machine> {
    machine: &'m M,
    aux: BitString,
    cfg: DovetailConfig,
    stage: u64,
    started: u64,
    live: Vec<Live<M::Exec>>,
    pending: VecDeque<HaltEvent>,
}

impl<'m, M: Machine> Dovetailer<'m, M> {
    pub fn new(machine: &'m M, aux: BitString, cfg: DovetailConfig) -> Self {
        Dovetailer {
            machine,
            aux,
            cfg,
            stage: 0,
            started: 0,
            live: Vec::new(),
            pending: VecDeque::new(),
        }
    }

    /// Last completed stage.
    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn aux(&self) -> &BitString {
        &self.aux
    }

    /// No event can occur at any later stage.
    pub fn is_exhausted(&self) -> bool {
        self.stage >= self.cfg.max_stage
            || (self.live.is_empty() && self.started >= self.cfg.program_count() && self.cfg.max_program_len.is_some())
    }

    /// Runs the next stage and returns its events, or `None` once
    /// `max_stage` has been completed.
    pub fn advance_stage(&mut self) -> Option<Vec<HaltEvent>> {
        if self.stage >= self.cfg.max_stage {
            return None;
        }
        self.stage += 1;
        let k = self.stage;
        if k >= 2 && self.started < self.cfg.program_count() {
            // Program j = k - 1 enters the schedule.
            self.live.push(Live {
                program: nat_to_string(self.started),
                exec: self.machine.boot(),
            });
            self.started += 1;
        }
        let mut events = Vec::new();
        let (machine, aux) = (self.machine, &self.aux);
        self.live.retain_mut(|l| match machine.step(&mut l.exec, &l.program, aux) {
            None => true,
            Some(RunOutcome::Halted { output, .. }) => {
                events.push(HaltEvent {
                    program: l.program.clone(),
                    output,
                    stage: k,
                    machine_index: self.cfg.machine_index,
                });
                false
            }
            Some(_) => false,
        });
        Some(events)
    }

    /// Runs every remaining stage, skipping the idle tail once no program
    /// can produce an event.
    pub fn finish(mut self) -> Vec<HaltEvent> {
        let mut all: Vec<HaltEvent> = self.pending.drain(..).collect();
        while !self.is_exhausted() {
            match self.advance_stage() {
                Some(ev) => all.extend(ev),
                None => break,
            }
        }
        all
    }
}

impl<M: Machine> Iterator for Dovetailer<'_, M> {
    type Item = HaltEvent;

    fn next(&mut self) -> Option<HaltEvent> {
        loop {
            if let Some(e) = self.pending.pop_front() {
                return Some(e);
            }
            if self.is_exhausted() {
                return None;
            }
            let events = self.advance_stage()?;
            self.pending.extend(events);
        }
    }
}

/// All halting events up to `cfg.max_stage`, in schedule order.
pub fn dovetail<M: Machine>(machine: &M, aux: &BitString, cfg: DovetailConfig) -> Vec<HaltEvent> {
    Dovetailer::new(machine, aux.clone(), cfg).finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::codes::is_prefix_free;
    use crate::vm::{fixtures, run_traced, UniversalMachine};

    #[test]
    fn halt_immediately_single_event() {
        let ev = dovetail(&fixtures::halt_immediately(), &bits(""), DovetailConfig::new(20));
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].program.clone(), ev[0].output.clone(), ev[0].stage), (bits(""), bits(""), 2));
    }

    #[test]
    fn copy_two_has_four_events() {
        let ev = dovetail(&fixtures::copy_two(), &bits(""), DovetailConfig::new(40));
        let programs: Vec<_> = ev.iter().map(|e| e.program.clone()).collect();
        let mut sorted = programs.clone();
        sorted.sort();
        assert_eq!(sorted, [bits("00"), bits("01"), bits("10"), bits("11")]);
        for e in &ev {
            assert_eq!(e.program, e.output);
        }
        // Program "00" is j = 4 and halts on its third step: stage 7.
        assert_eq!(ev[0].program, bits("00"));
        assert_eq!(ev[0].stage, 7);
    }

    #[test]
    fn truncation_is_monotone() {
        let m = fixtures::aux_or_bar();
        let full = dovetail(&m, &bits("10"), DovetailConfig::new(300));
        for s in 1..300 {
            let part = dovetail(&m, &bits("10"), DovetailConfig::new(s));
            assert_eq!(&full[..part.len()], &part[..]);
            assert!(full[part.len()..].iter().all(|e| e.stage > s));
        }
        assert!(is_prefix_free(full.iter().map(|e| &e.program)));
    }

    /// Closed form: program j halting on step s shows up at stage j + s.
    #[test]
    fn matches_independent_runs() {
        let u = UniversalMachine::new(64);
        let cfg = DovetailConfig::new(400).with_max_len(8);
        let ev = dovetail(&u, &bits("1"), cfg);
        let mut expected = Vec::new();
        for j in 1..=cfg.program_count() {
            let p = nat_to_string(j - 1);
            let (outcome, steps) = run_traced(&u, &p, &bits("1"), cfg.max_stage - j);
            if let RunOutcome::Halted { output, .. } = outcome {
                expected.push((j + steps, j, p, output));
            }
        }
        expected.sort_by_key(|t| (t.0, t.1));
        let got: Vec<_> = ev.iter().map(|e| (e.stage, e.program.clone(), e.output.clone())).collect();
        let want: Vec<_> = expected.into_iter().map(|(s, _, p, o)| (s, p, o)).collect();
        assert_eq!(got, want);
        assert!(!got.is_empty());
    }

    #[test]
    fn length_bound_filters_stream() {
        let m = fixtures::two_routes();
        let all = dovetail(&m, &bits(""), DovetailConfig::new(200));
        let bounded = dovetail(&m, &bits(""), DovetailConfig::new(200).with_max_len(2));
        let filtered: Vec<_> = all.into_iter().filter(|e| e.program.len() <= 2).collect();
        assert_eq!(bounded, filtered);
    }

    #[test]
    fn iterator_equals_finish() {
        let m = fixtures::copy_two();
        let a: Vec<_> = Dovetailer::new(&m, bits(""), DovetailConfig::new(50)).collect();
        assert_eq!(a, dovetail(&m, &bits(""), DovetailConfig::new(50)));
    }
}
