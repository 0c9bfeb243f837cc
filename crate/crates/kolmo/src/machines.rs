//! Machine files and name resolution.
//!
//! A `.km` file lists one state per line, state 0 first:
//!
//! ```text
//! # copy two bits
//! input 0:1 1:1
//! input 0:2 1:2
//! halt
//! ```
//!
//! Branch tokens are `<out>:<next>` for `input`, `<out><move>:<next>` for
//! `aux` (branches on 0, 1, end marker) and `<out><write><move>:<next>`
//! for `work` (branches on 0, 1, blank). `out` is `0`, `1` or `-`; `move`
//! is `S`, `R` or `L`; `write` is `0`, `1`, `_` (blank) or `=` (keep).
//! A file may instead hold a single `desc <bits>` line with the binary
//! description.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kolmo_core::bits::BitString;
use kolmo_core::vm::{
    enumerate_machines, fixtures, AuxBranch, InputBranch, Instr, Machine, Move, PrefixMachine, RunOutcome,
    UniversalExec, UniversalMachine, Work, WorkBranch, MachineExec,
};

/// Either a table machine or the universal machine.
#[derive(Clone, Debug)]
pub enum AnyMachine {
    Table(PrefixMachine),
    Universal(UniversalMachine),
}

#[derive(Clone, Debug)]
pub enum AnyExec {
    Table(MachineExec),
    Universal(UniversalExec),
}

impl Machine for AnyMachine {
    type Exec = AnyExec;

    fn id(&self) -> String {
        match self {
            AnyMachine::Table(m) => m.id(),
            AnyMachine::Universal(u) => u.id(),
        }
    }

    fn boot(&self) -> AnyExec {
        match self {
            AnyMachine::Table(m) => AnyExec::Table(m.boot()),
            AnyMachine::Universal(u) => AnyExec::Universal(u.boot()),
        }
    }

    fn step(&self, exec: &mut AnyExec, input: &BitString, aux: &BitString) -> Option<RunOutcome> {
        match (self, exec) {
            (AnyMachine::Table(m), AnyExec::Table(e)) => m.step(e, input, aux),
            (AnyMachine::Universal(u), AnyExec::Universal(e)) => u.step(e, input, aux),
            _ => unreachable!("execution state from another machine"),
        }
    }
}

/// A resolved machine plus the file it came from, if any.
pub struct Resolved {
    pub machine: AnyMachine,
    pub source: Option<PathBuf>,
}

pub const BUILTIN: &[&str] = &["halt", "echo1", "copy2", "two-routes", "loop", "aux-or-bar"];

pub fn builtin(name: &str) -> Option<PrefixMachine> {
    Some(match name {
        "halt" => fixtures::halt_immediately(),
        "echo1" => fixtures::echo_one(),
        "copy2" => fixtures::copy_two(),
        "two-routes" => fixtures::two_routes(),
        "loop" => fixtures::looping(),
        "aux-or-bar" => fixtures::aux_or_bar(),
        _ => return None,
    })
}

/// Resolves `U`, an enumeration index, a built-in fixture name, a path,
/// or a `<name>.km` file in the directory named by `KOLMO_FIXTURES`.
pub fn resolve(spec: &str) -> Result<Resolved> {
    if spec == "U" {
        return Ok(Resolved {
            machine: AnyMachine::Universal(UniversalMachine::default()),
            source: None,
        });
    }
    if let Ok(i) = spec.parse::<u64>() {
        if i == 0 {
            bail!("machines are numbered from 1");
        }
        return Ok(Resolved {
            machine: AnyMachine::Table(enumerate_machines(i)),
            source: None,
        });
    }
    if let Some(m) = builtin(spec) {
        return Ok(Resolved {
            machine: AnyMachine::Table(m),
            source: None,
        });
    }
    let mut candidates = vec![PathBuf::from(spec)];
    if let Ok(dir) = std::env::var("KOLMO_FIXTURES") {
        candidates.push(Path::new(&dir).join(spec));
        candidates.push(Path::new(&dir).join(format!("{spec}.km")));
    }
    for path in candidates {
        if path.is_file() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let m = parse_km(&text).with_context(|| format!("parsing {}", path.display()))?;
            return Ok(Resolved {
                machine: AnyMachine::Table(m),
                source: Some(path),
            });
        }
    }
    bail!("unknown machine {spec:?}: not U, an index, a built-in ({}) or a file", BUILTIN.join(", "))
}

fn out_char(o: Option<bool>) -> char {
    match o {
        None => '-',
        Some(false) => '0',
        Some(true) => '1',
    }
}

fn move_char(m: Move) -> char {
    match m {
        Move::Stay => 'S',
        Move::Right => 'R',
        Move::Left => 'L',
    }
}

fn write_char(w: Work) -> char {
    match w {
        Work::Zero => '0',
        Work::One => '1',
        Work::Blank => '_',
        Work::Keep => '=',
    }
}

pub fn to_km(m: &PrefixMachine) -> String {
    let mut s = String::new();
    for ins in m.states() {
        match ins {
            Instr::Halt => s.push_str("halt"),
            Instr::Input(bs) => {
                s.push_str("input");
                for b in bs {
                    let _ = write!(s, " {}:{}", out_char(b.out), b.next);
                }
            }
            Instr::Aux(bs) => {
                s.push_str("aux");
                for b in bs {
                    let _ = write!(s, " {}{}:{}", out_char(b.out), move_char(b.aux_move), b.next);
                }
            }
            Instr::Work(bs) => {
                s.push_str("work");
                for b in bs {
                    let _ = write!(
                        s,
                        " {}{}{}:{}",
                        out_char(b.out),
                        write_char(b.write),
                        move_char(b.work_move),
                        b.next
                    );
                }
            }
        }
        s.push('\n');
    }
    s
}

fn parse_out(c: char) -> Result<Option<bool>> {
    Ok(match c {
        '-' => None,
        '0' => Some(false),
        '1' => Some(true),
        _ => bail!("bad output symbol {c:?}"),
    })
}

fn parse_move(c: char) -> Result<Move> {
    Ok(match c {
        'S' => Move::Stay,
        'R' => Move::Right,
        'L' => Move::Left,
        _ => bail!("bad move {c:?}"),
    })
}

fn parse_write(c: char) -> Result<Work> {
    Ok(match c {
        '0' => Work::Zero,
        '1' => Work::One,
        '_' => Work::Blank,
        '=' => Work::Keep,
        _ => bail!("bad write symbol {c:?}"),
    })
}

fn split_branch(tok: &str, head_len: usize) -> Result<(Vec<char>, usize)> {
    let (head, next) = tok.split_once(':').ok_or_else(|| anyhow!("branch {tok:?} lacks ':'"))?;
    let head: Vec<char> = head.chars().collect();
    if head.len() != head_len {
        bail!("branch {tok:?} should have {head_len} symbols before ':'");
    }
    Ok((head, next.parse().with_context(|| format!("target in {tok:?}"))?))
}

pub fn parse_km(text: &str) -> Result<PrefixMachine> {
    let mut states = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let kind = toks.next().expect("nonempty");
        let rest: Vec<&str> = toks.collect();
        let arity = |n: usize| -> Result<()> {
            if rest.len() != n {
                bail!("line {}: {kind} takes {n} branches", no + 1);
            }
            Ok(())
        };
        let ins = match kind {
            "desc" => {
                arity(1)?;
                if !states.is_empty() {
                    bail!("line {}: desc must be the only entry", no + 1);
                }
                let d: BitString = rest[0].parse().map_err(|e| anyhow!("line {}: {e}", no + 1))?;
                return PrefixMachine::decode(&d).ok_or_else(|| anyhow!("invalid machine description"));
            }
            "halt" => {
                arity(0)?;
                Instr::Halt
            }
            "input" => {
                arity(2)?;
                let mut bs = [InputBranch { out: None, next: 0 }; 2];
                for (b, tok) in bs.iter_mut().zip(&rest) {
                    let (h, next) = split_branch(tok, 1)?;
                    *b = InputBranch { out: parse_out(h[0])?, next };
                }
                Instr::Input(bs)
            }
            "aux" => {
                arity(3)?;
                let mut bs = [AuxBranch { out: None, aux_move: Move::Stay, next: 0 }; 3];
                for (b, tok) in bs.iter_mut().zip(&rest) {
                    let (h, next) = split_branch(tok, 2)?;
                    *b = AuxBranch {
                        out: parse_out(h[0])?,
                        aux_move: parse_move(h[1])?,
                        next,
                    };
                }
                Instr::Aux(bs)
            }
            "work" => {
                arity(3)?;
                let mut bs = [WorkBranch { out: None, write: Work::Keep, work_move: Move::Stay, next: 0 }; 3];
                for (b, tok) in bs.iter_mut().zip(&rest) {
                    let (h, next) = split_branch(tok, 3)?;
                    *b = WorkBranch {
                        out: parse_out(h[0])?,
                        write: parse_write(h[1])?,
                        work_move: parse_move(h[2])?,
                        next,
                    };
                }
                Instr::Work(bs)
            }
            other => bail!("line {}: unknown state kind {other:?}", no + 1),
        };
        states.push(ins);
    }
    PrefixMachine::new(states).ok_or_else(|| anyhow!("empty machine or a target out of range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kolmo_core::vm::MachineEnumeration;

    #[test]
    fn km_roundtrip() {
        for name in BUILTIN {
            let m = builtin(name).unwrap();
            assert_eq!(parse_km(&to_km(&m)).unwrap(), m);
        }
        for (_, desc, m) in MachineEnumeration::new().take(200) {
            assert_eq!(parse_km(&to_km(&m)).unwrap(), m);
            assert_eq!(parse_km(&format!("desc {desc}\n")).unwrap(), m);
        }
    }

    #[test]
    fn km_errors() {
        assert!(parse_km("").is_err());
        assert!(parse_km("input 0:1 1:1\n").is_err());
        assert!(parse_km("input 0:0\n").is_err());
        assert!(parse_km("aux 0X:0 0S:0 -S:0\n").is_err());
        assert!(parse_km("jump\n").is_err());
        assert!(parse_km("desc 0110\n").is_err());
    }

    #[test]
    fn resolution() {
        assert!(matches!(resolve("U").unwrap().machine, AnyMachine::Universal(_)));
        assert!(resolve("0").is_err());
        assert!(resolve("no-such-machine").is_err());
        let copy = resolve("copy2").unwrap();
        assert_eq!(copy.machine.id(), fixtures::copy_two().id());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.km");
        std::fs::write(&path, to_km(&fixtures::echo_one())).unwrap();
        let r = resolve(path.to_str().unwrap()).unwrap();
        assert_eq!(r.machine.id(), fixtures::echo_one().id());
        assert_eq!(r.source, Some(path));
    }
}
