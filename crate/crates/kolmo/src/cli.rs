//! Command tree and command bodies. Every command renders its whole
//! output to a string so runs can be hashed and compared.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kolmo_core::apriori::{approx_apriori, complete_stage};
use kolmo_core::arith::{cover_by_binary, largest_binary_subinterval, Dyadic, Interval};
use kolmo_core::bits::BitString;
use kolmo_core::codes::{bar_encode, is_prefix_free, kraft_sum, pair_strings, std_encode, unpair_strings};
use kolmo_core::coder::{
    build_codebook, codebook_gap_rows, coding_gap_report, machine_psi_run, psi_discretize, psi_sums, PsiSchedule,
};
use kolmo_core::complexity::{approx_k, k_table, soi_report, SearchBounds};
use kolmo_core::quotient::{joint_gap_report, quotient_conditional, single_gap_report, ConditioningSet, JointMixture};
use kolmo_core::semimeasure::{
    check_domination, mixture, word_index, FreezeMode, MixtureSpec, MonotoneApproximator, Normalizer,
    StageOutcome, TableApproximator,
};
use kolmo_core::vm::{dovetail, run_traced, DovetailConfig, Machine, MachineEnumeration, RunOutcome};

use crate::formats::{self, word};
use crate::machines::{builtin, resolve, to_km, AnyMachine, BUILTIN};
use crate::parallel::par_dovetail;

#[derive(Parser, Debug)]
#[command(name = "kolmo", version, about = "Exact desk-scale experiments with prefix machines, a priori probability and interval codes")]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a JSON run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Self-delimiting codes, pairing, Kraft sums, binary intervals.
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Run, list and schedule prefix machines.
    #[command(subcommand)]
    Vm(VmCmd),
    /// Upper bounds on conditional prefix complexity.
    K(KArgs),
    /// Lower bounds on the conditional a priori probability.
    Apriori(AprioriArgs),
    /// Normalization, mixtures and domination.
    #[command(subcommand)]
    Semimeasure(SemimeasureCmd),
    /// Interval codebooks.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Quotient conditionals and conditioning on sets.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Rewrite the built-in machine files and the golden files.
    Fixtures {
        /// Target directory (default: $KOLMO_FIXTURES).
        dir: Option<PathBuf>,
    },
    /// Seeded invariant pass over every module.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum CodesCmd {
    /// `1^|x| 0 x`
    Bar { x: BitString },
    /// `bar(|x| as a word) x`
    Std { x: BitString },
    /// `x'y`
    Pair { x: BitString, y: BitString },
    /// Split a pair back into `x` and `y`.
    Unpair { stream: BitString },
    /// Kraft sum of a set of words (standard input, one per line, if none given).
    Kraft { words: Vec<BitString> },
    /// Largest binary subinterval and binary cover of `[lo, hi)`.
    Interval { lo: Dyadic, hi: Dyadic },
}

#[derive(Args, Debug, Clone)]
pub struct MachineArg {
    /// `U`, an enumeration index, a built-in name, or a .km file.
    #[arg(short, long)]
    pub machine: String,
}

#[derive(Subcommand, Debug)]
pub enum VmCmd {
    /// One bounded run.
    Run {
        #[command(flatten)]
        m: MachineArg,
        #[arg(short, long, default_value = "-")]
        program: BitString,
        #[arg(short, long, default_value = "-")]
        aux: BitString,
        #[arg(short, long, default_value_t = 10_000)]
        budget: u64,
    },
    /// List machines of the standard enumeration.
    Enumerate {
        #[arg(short = 'n', long, default_value_t = 20)]
        count: usize,
    },
    /// Print a machine as a .km file.
    Describe {
        #[command(flatten)]
        m: MachineArg,
    },
    /// Halting events of the stage-by-stage schedule.
    Dovetail {
        #[command(flatten)]
        m: MachineArg,
        #[arg(short, long, default_value = "-")]
        aux: BitString,
        #[arg(long)]
        max_stage: u64,
        /// Only start programs up to this length.
        #[arg(short = 'L', long)]
        max_len: Option<usize>,
        /// Evaluate programs in parallel; the output is the same.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Bounds {
    /// Program length bound.
    #[arg(short = 'L', long = "length-bound")]
    pub length: usize,
    /// Step bound per program.
    #[arg(short = 'S', long = "step-bound")]
    pub steps: u64,
}

impl From<Bounds> for SearchBounds {
    fn from(b: Bounds) -> Self {
        SearchBounds::new(b.length, b.steps)
    }
}

#[derive(Args, Debug)]
pub struct KArgs {
    #[command(flatten)]
    m: MachineArg,
    /// Target word; omit to list every reachable output.
    #[arg(long)]
    x: Option<BitString>,
    #[arg(long, default_value = "-")]
    y: BitString,
    #[command(flatten)]
    bounds: Bounds,
    /// Symmetry-of-information row for x and y instead.
    #[arg(long, requires = "x")]
    soi: bool,
}

#[derive(Args, Debug)]
pub struct AprioriArgs {
    #[command(flatten)]
    m: MachineArg,
    #[arg(short, long, default_value = "-")]
    aux: BitString,
    #[arg(long)]
    max_stage: u64,
    #[arg(short = 'L', long = "length-bound")]
    length: usize,
    /// A table written earlier for the same machine and aux; the new one
    /// must dominate it pointwise.
    #[arg(long)]
    extend: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MixtureArgs {
    /// Approximator CSV files (x,y,k,value), one per component.
    #[arg(long = "component", required = true)]
    components: Vec<PathBuf>,
    /// Extra weight exponents c_j, comma separated.
    #[arg(long, value_delimiter = ',')]
    extra: Vec<u64>,
    #[arg(long)]
    max_stage: u64,
    #[arg(long)]
    per_column: bool,
}

#[derive(Subcommand, Debug)]
pub enum SemimeasureCmd {
    /// Stage-by-stage normalization of one approximator.
    Normalize {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        max_stage: u64,
        #[arg(long)]
        per_column: bool,
    },
    /// Weighted sum of normalized components.
    Mixture(MixtureArgs),
    /// Checks m(x|y) >= α_j P_j(x|y) on `1..=max_stage` squared.
    Dominate(MixtureArgs),
}

#[derive(Subcommand, Debug)]
pub enum CodeCmd {
    /// Build the codebook for one aux word.
    Build {
        /// Approximator CSV for m(x|y).
        #[arg(long, conflicts_with = "machine")]
        phi: Option<PathBuf>,
        /// Use a machine's halting stream as the approximation instead.
        #[arg(short, long, requires = "length")]
        machine: Option<String>,
        #[arg(short = 'L', long = "length-bound")]
        length: Option<usize>,
        #[arg(short = 'S', long = "step-bound", default_value_t = 1000)]
        steps: u64,
        #[arg(short, long, default_value = "-")]
        aux: BitString,
        /// Schedule rounds (default: enough to reach every breakpoint).
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long)]
        max_events: Option<usize>,
        /// Also write the decoder as a .km machine.
        #[arg(long)]
        machine_out: Option<PathBuf>,
    },
    /// Shortest codeword of a word.
    Encode {
        #[arg(long)]
        book: PathBuf,
        #[arg(long)]
        x: BitString,
    },
    /// Word printed for a program, or `diverges`.
    Decode {
        #[arg(long)]
        book: PathBuf,
        #[arg(short, long, default_value = "-")]
        aux: BitString,
        #[arg(short, long)]
        program: BitString,
    },
    /// K̂, Q̂ and codeword length side by side.
    Gap {
        #[command(flatten)]
        m: MachineArg,
        #[arg(short, long, default_value = "-")]
        aux: BitString,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// Conditionals of a joint table, or of a weighted mixture of tables.
    Quotient {
        #[arg(long = "joint", required = true)]
        joints: Vec<PathBuf>,
        /// Weight exponents, one per table (mixture mode).
        #[arg(long, value_delimiter = ',')]
        weights: Vec<u64>,
    },
    /// Conditioning on finite sets through their characteristic strings.
    ConditionSet {
        #[command(flatten)]
        m: MachineArg,
        /// Comma-separated members (`-` for the empty word); repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long)]
        range: u64,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Quotient of the joint estimate `m̂(x,y) = Q̂(⟨x,y⟩)` against
    /// `K̂(x|y,K̂(y))`.
    JointGap {
        #[command(flatten)]
        m: MachineArg,
        #[arg(long, default_value = "-")]
        y: BitString,
        #[command(flatten)]
        bounds: Bounds,
    },
}

/// A rendered command result.
pub struct Output {
    pub text: String,
    /// False when an invariant failed; the process exits with 1.
    pub ok: bool,
    /// Files read, for the manifest.
    pub inputs: Vec<PathBuf>,
    /// Extra files written by the command itself.
    pub side_files: Vec<(PathBuf, String)>,
}

impl Output {
    fn text(text: String) -> Self {
        Output {
            text,
            ok: true,
            inputs: Vec::new(),
            side_files: Vec::new(),
        }
    }
}

fn header(cmd: &str, pairs: &[(&str, String)]) -> String {
    let mut s = format!("# kolmo {} {cmd}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in pairs {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

fn outcome_text(o: &RunOutcome) -> String {
    match o {
        RunOutcome::Halted { output, bits_read } => format!("halted\t{}\t{bits_read}", word(output)),
        RunOutcome::OutOfFuel => "out-of-fuel".into(),
        RunOutcome::RequestedPastEnd => "requested-past-end".into(),
        RunOutcome::Unconsumed { output, bits_read } => format!("unconsumed\t{}\t{bits_read}", word(output)),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn machine(m: &MachineArg, inputs: &mut Vec<PathBuf>) -> Result<AnyMachine> {
    let r = resolve(&m.machine)?;
    inputs.extend(r.source);
    Ok(r.machine)
}

pub fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Codes(c) => codes(c),
        Command::Vm(c) => vm(c),
        Command::K(a) => k(a),
        Command::Apriori(a) => apriori(a),
        Command::Semimeasure(c) => semimeasure(c),
        Command::Code(c) => code(c),
        Command::Demo(c) => demo(c),
        Command::Fixtures { dir } => fixtures(dir.as_ref()),
        Command::Selftest { seed } => {
            let (text, ok) = crate::selftest::selftest(*seed);
            Ok(Output { ok, ..Output::text(text) })
        }
    }
}

pub const GOLDEN_COUNT: usize = 100;

/// Golden reports: file name and the command line that produces it.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("golden-soi.tsv", &["k", "-m", "aux-or-bar", "--x", "0", "--y", "1", "-L", "12", "-S", "400", "--soi"]),
    (
        "golden-nested-sets.tsv",
        &[
            "demo", "condition-set", "-m", "aux-or-bar", "--set=-,0", "--set=-,0,1,00", "--set=-,0,1,00,01,10,11,000",
            "--range", "8", "-L", "18", "-S", "300",
        ],
    ),
    ("golden-joint-gap.tsv", &["demo", "joint-gap", "-m", "aux-or-bar", "-L", "12", "-S", "400"]),
];

pub fn enumeration_listing(count: usize) -> String {
    let mut s = String::from("index\tdescription\tfingerprint\n");
    for (i, desc, m) in MachineEnumeration::new().take(count) {
        s.push_str(&format!("{i}\t{desc}\t{}\n", m.fingerprint()));
    }
    s
}

fn fixtures(dir: Option<&PathBuf>) -> Result<Output> {
    let dir = match dir {
        Some(d) => d.clone(),
        None => PathBuf::from(std::env::var("KOLMO_FIXTURES").context("no directory given and KOLMO_FIXTURES unset")?),
    };
    let mut side_files = Vec::new();
    let mut text = String::new();
    for name in BUILTIN {
        let t = builtin(name).expect("listed");
        let path = dir.join(format!("{name}.km"));
        text.push_str(&format!("{}\n", path.display()));
        side_files.push((path, format!("# desc {}\n{}", t.encode(), to_km(&t))));
    }
    for (name, args) in GOLDEN {
        let cli = Cli::try_parse_from(std::iter::once("kolmo").chain(args.iter().copied()))?;
        let path = dir.join(name);
        text.push_str(&format!("{}\n", path.display()));
        side_files.push((path, dispatch(&cli.command)?.text));
    }
    let path = dir.join("enumeration.tsv");
    text.push_str(&format!("{}\n", path.display()));
    side_files.push((path, enumeration_listing(GOLDEN_COUNT)));
    Ok(Output { side_files, ..Output::text(text) })
}

fn codes(c: &CodesCmd) -> Result<Output> {
    let text = match c {
        CodesCmd::Bar { x } => format!("{}\n", word(&bar_encode(x))),
        CodesCmd::Std { x } => format!("{}\n", word(&std_encode(x))),
        CodesCmd::Pair { x, y } => format!("{}\n", word(&pair_strings(x, y))),
        CodesCmd::Unpair { stream } => {
            let (x, y) = unpair_strings(stream)?;
            format!("{}\t{}\n", word(&x), word(&y))
        }
        CodesCmd::Kraft { words } => {
            let words = if words.is_empty() {
                let mut buf = String::new();
                std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)?;
                buf.lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(formats::parse_word)
                    .collect::<Result<Vec<_>>>()?
            } else {
                words.clone()
            };
            if !is_prefix_free(&words) {
                eprintln!("note: the set is not prefix-free");
            }
            format!("{}\n", kraft_sum(&words))
        }
        CodesCmd::Interval { lo, hi } => {
            let i = Interval::new(lo.clone(), hi.clone())?;
            let big = largest_binary_subinterval(&i).expect("nonempty");
            let mut s = format!("largest\t{}\n", word(big.word()));
            for b in cover_by_binary(&i) {
                s.push_str(&format!("cover\t{}\n", word(b.word())));
            }
            s
        }
    };
    Ok(Output::text(text))
}

fn vm(c: &VmCmd) -> Result<Output> {
    let mut inputs = Vec::new();
    let text = match c {
        VmCmd::Run { m, program, aux, budget } => {
            let mach = machine(m, &mut inputs)?;
            let (o, steps) = run_traced(&mach, program, aux, *budget);
            format!("{}\tsteps={steps}\n", outcome_text(&o))
        }
        VmCmd::Enumerate { count } => enumeration_listing(*count),
        VmCmd::Describe { m } => match machine(m, &mut inputs)? {
            AnyMachine::Table(t) => format!("# desc {}\n{}", t.encode(), to_km(&t)),
            AnyMachine::Universal(_) => bail!("the universal machine has no finite state table"),
        },
        VmCmd::Dovetail { m, aux, max_stage, max_len, parallel } => {
            let mach = machine(m, &mut inputs)?;
            let mut cfg = DovetailConfig::new(*max_stage);
            if let Some(l) = max_len {
                cfg = cfg.with_max_len(*l);
            }
            let events = if *parallel {
                par_dovetail(&mach, aux, cfg)
            } else {
                dovetail(&mach, aux, cfg)
            };
            let mut s = header(
                "vm dovetail",
                &[
                    ("machine", mach.id()),
                    ("aux", word(aux)),
                    ("max_stage", max_stage.to_string()),
                    ("max_len", max_len.map_or("none".into(), |l| l.to_string())),
                ],
            );
            s.push_str("stage\tprogram\toutput\n");
            for e in events {
                s.push_str(&format!("{}\t{}\t{}\n", e.stage, word(&e.program), word(&e.output)));
            }
            s
        }
    };
    Ok(Output { inputs, ..Output::text(text) })
}

fn k(a: &KArgs) -> Result<Output> {
    let mut inputs = Vec::new();
    let mach = machine(&a.m, &mut inputs)?;
    let b: SearchBounds = a.bounds.into();
    let mut s = header(
        "k",
        &[
            ("machine", mach.id()),
            ("y", word(&a.y)),
            ("length_bound", b.length_bound.to_string()),
            ("step_bound", b.step_bound.to_string()),
            ("note", "every value is an upper-bound estimate".into()),
        ],
    );
    let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
    match (&a.x, a.soi) {
        (Some(x), true) => {
            let r = soi_report(&mach, x, &a.y, b);
            s.push_str("x\ty\tk_pair\tk_x\tx_star\tk_y_given_x_star\tresidual\tcomplete\n");
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                word(&r.x),
                word(&r.y),
                opt(r.k_pair),
                opt(r.k_x),
                r.x_star.as_ref().map_or("none".into(), word),
                opt(r.k_y_given_x_star),
                r.residual.map_or("none".into(), |v| v.to_string()),
                r.is_complete()
            ));
        }
        (Some(x), false) => {
            s.push_str("x\tk_bits\twitness\n");
            match approx_k(&mach, x, &a.y, b) {
                Some(e) => s.push_str(&format!("{}\t{}\t{}\n", word(x), e.bits, word(&e.witness))),
                None => s.push_str(&format!("{}\tnone\tnone\n", word(x))),
            }
        }
        (None, _) => {
            s.push_str("x\tk_bits\twitness\n");
            for (x, e) in k_table(&mach, &a.y, b).estimates {
                s.push_str(&format!("{}\t{}\t{}\n", word(&x), e.bits, word(&e.witness)));
            }
        }
    }
    Ok(Output { inputs, ..Output::text(s) })
}

fn apriori(a: &AprioriArgs) -> Result<Output> {
    let mut inputs = Vec::new();
    let mach = machine(&a.m, &mut inputs)?;
    let t = approx_apriori(&mach, &a.aux, a.max_stage, a.length);
    if let Some(path) = &a.extend {
        let old = formats::read_apriori(&read(path)?)?;
        inputs.push(path.clone());
        if old.machine_id != t.machine_id || old.aux != t.aux {
            bail!("{} was built for another machine or aux word", path.display());
        }
        if old.stage > t.stage || old.length_bound > t.length_bound {
            bail!("extension must not lower the stage or the length bound");
        }
        if !old.is_below(&t) {
            bail!("new table does not dominate the old one");
        }
    }
    if t.total() > Dyadic::one() {
        bail!("total mass {} above 1", t.total());
    }
    Ok(Output { inputs, ..Output::text(formats::write_apriori(&t)) })
}

fn load_phi(path: &PathBuf, inputs: &mut Vec<PathBuf>) -> Result<TableApproximator> {
    inputs.push(path.clone());
    formats::read_approximator(read(path)?.as_bytes()).with_context(|| format!("in {}", path.display()))
}

fn mode(per_column: bool) -> FreezeMode {
    if per_column {
        FreezeMode::PerColumn
    } else {
        FreezeMode::AllOrNothing
    }
}

fn mixture_spec(a: &MixtureArgs, inputs: &mut Vec<PathBuf>) -> Result<MixtureSpec> {
    let comps = a
        .components
        .iter()
        .map(|p| load_phi(p, inputs).map(|t| Box::new(t) as Box<dyn MonotoneApproximator>))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixtureSpec::with_bar_weights(comps, &a.extra))
}

fn semimeasure(c: &SemimeasureCmd) -> Result<Output> {
    let mut inputs = Vec::new();
    let (text, ok) = match c {
        SemimeasureCmd::Normalize { phi, max_stage, per_column } => {
            let t = load_phi(phi, &mut inputs)?;
            let mut n = Normalizer::new(&t, mode(*per_column));
            let mut note = String::new();
            for _ in 0..*max_stage {
                if let StageOutcome::Diverged { x, y } = n.step()? {
                    if note.is_empty() {
                        note = format!("# stage {} waits forever on x={x} y={y}\n", n.current().stage);
                    }
                }
            }
            (format!("{}{note}", formats::write_semimeasure(n.current())), true)
        }
        SemimeasureCmd::Mixture(a) => {
            let spec = mixture_spec(a, &mut inputs)?;
            let m = mixture(&spec, a.max_stage, mode(a.per_column))?;
            (formats::write_semimeasure(&m.measure), true)
        }
        SemimeasureCmd::Dominate(a) => {
            let spec = mixture_spec(a, &mut inputs)?;
            let m = mixture(&spec, a.max_stage, mode(a.per_column))?;
            let n = a.max_stage;
            let domain: Vec<(u64, u64)> = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).collect();
            let ok = check_domination(&m.measure, &spec, &m.parts, &domain)?;
            let mut s = header("semimeasure dominate", &[("max_stage", n.to_string())]);
            s.push_str("component\tweight_exponent\n");
            for (j, c) in spec.components.iter().enumerate() {
                s.push_str(&format!("{}\t{}\n", j + 1, c.weight_exponent));
            }
            s.push_str(&format!("weight_sum\t{}\ndominates\t{ok}\n", spec.weight_sum()));
            (s, ok)
        }
    };
    Ok(Output { ok, inputs, ..Output::text(text) })
}

fn code(c: &CodeCmd) -> Result<Output> {
    let mut inputs = Vec::new();
    match c {
        CodeCmd::Build { phi, machine: mspec, length, steps, aux, rounds, max_events, machine_out } => {
            let run = match (phi, mspec) {
                (Some(path), None) => {
                    let t = load_phi(path, &mut inputs)?;
                    let y = word_index(aux).context("aux word too long")?;
                    let max_x = t.support().map(|(x, _)| x).max().unwrap_or(0);
                    let mut sched = PsiSchedule::new(vec![y], max_x, rounds.unwrap_or(max_x + t.horizon()));
                    sched.max_events = *max_events;
                    psi_discretize(&t, &sched)?
                }
                (None, Some(ms)) => {
                    let mach = machine(&MachineArg { machine: ms.clone() }, &mut inputs)?;
                    let length = length.expect("required by clap");
                    machine_psi_run(&mach, aux, SearchBounds::new(length, *steps))?
                }
                _ => bail!("give exactly one of --phi and --machine"),
            };
            let book = build_codebook(&run, aux)?;
            let mut side_files = Vec::new();
            if let Some(p) = machine_out {
                side_files.push((p.clone(), to_km(&book.to_machine())));
            }
            let rows = codebook_gap_rows(&run, &book);
            let sums = psi_sums(&run);
            let ok = rows.iter().all(|r| r.holds()) && sums.iter().all(|r| r.strict);
            Ok(Output {
                text: formats::write_codebook(&book),
                ok,
                inputs,
                side_files,
            })
        }
        CodeCmd::Encode { book, x } => {
            inputs.push(book.clone());
            let b = formats::read_codebook(&read(book)?)?;
            let text = match b.encode(x) {
                Some(c) => format!("{}\n", word(c)),
                None => bail!("{} has no codeword in this book", word(x)),
            };
            Ok(Output { inputs, ..Output::text(text) })
        }
        CodeCmd::Decode { book, aux, program } => {
            inputs.push(book.clone());
            let b = formats::read_codebook(&read(book)?)?;
            let text = match b.decode(program, aux)? {
                Some(x) => format!("{}\n", word(x)),
                None => "diverges\n".into(),
            };
            Ok(Output { inputs, ..Output::text(text) })
        }
        CodeCmd::Gap { m, aux, bounds } => {
            let mach = machine(m, &mut inputs)?;
            let b: SearchBounds = (*bounds).into();
            let r = coding_gap_report(&mach, aux, b)?;
            let mut s = header(
                "code gap",
                &[
                    ("machine", mach.id()),
                    ("aux", word(aux)),
                    ("length_bound", b.length_bound.to_string()),
                    ("step_bound", b.step_bound.to_string()),
                    ("stage", complete_stage(b.length_bound, b.step_bound).to_string()),
                ],
            );
            s.push_str("x\tk_bits\tq\tceil_neg_log_q\tm_hat\tceil_log_inv_m\tcode_len\tcode_gap\tk_within_q\tcode_within_bound\n");
            let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
            for row in &r.rows {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    word(&row.x),
                    opt(row.k_bits.map(|v| v.to_string())),
                    opt(row.q.as_ref().map(|q| q.to_string())),
                    opt(row.q.as_ref().and_then(|q| q.ceil_neg_log2()).map(|v| v.to_string())),
                    row.m_hat,
                    row.log_inv_m,
                    opt(row.code_len.map(|v| v.to_string())),
                    opt(row.code_gap().map(|v| v.to_string())),
                    opt(row.k_within_q.map(|v| v.to_string())),
                    opt(row.code_within_bound.map(|v| v.to_string())),
                ));
            }
            s.push_str(&format!(
                "# max K-minus-log-Q gap (descriptive): {}\n",
                r.max_k_q_gap.map_or("none".into(), |g| g.to_string())
            ));
            let ok = r.rows.iter().all(|row| row.holds());
            Ok(Output { ok, inputs, ..Output::text(s) })
        }
    }
}

fn demo(c: &DemoCmd) -> Result<Output> {
    let mut inputs = Vec::new();
    match c {
        DemoCmd::Quotient { joints, weights } => {
            let tables = joints
                .iter()
                .map(|p| {
                    inputs.push(p.clone());
                    formats::read_joint(&read(p)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut s = header("demo quotient", &[]);
            let mut ok = true;
            if tables.len() == 1 && weights.is_empty() {
                let j = &tables[0];
                s.push_str("x\ty\tconditional\n");
                for y in j.ys() {
                    for x in j.xs() {
                        let q = quotient_conditional(j, &x, &y)?;
                        s.push_str(&format!("{}\t{}\t{q}\n", word(&x), word(&y)));
                    }
                }
            } else {
                if weights.len() != tables.len() {
                    bail!("give one weight exponent per joint table");
                }
                let mix = JointMixture {
                    components: weights.iter().copied().zip(tables).collect(),
                };
                let summed = mix.summed()?;
                s.push_str("x\ty\tsummed\tsum_inside\tmarginals_first\tagree\n");
                for y in summed.ys() {
                    for x in summed.xs() {
                        let a = quotient_conditional(&summed, &x, &y)?;
                        let b = mix.conditional_sum_inside(&x, &y)?;
                        let c = mix.conditional_marginals_first(&x, &y)?;
                        let agree = a == b && b == c;
                        ok &= agree;
                        s.push_str(&format!("{}\t{}\t{a}\t{b}\t{c}\t{agree}\n", word(&x), word(&y)));
                    }
                }
            }
            Ok(Output { ok, inputs, ..Output::text(s) })
        }
        DemoCmd::ConditionSet { m, sets, range, bounds } => {
            let mach = machine(m, &mut inputs)?;
            let family = sets
                .iter()
                .map(|spec| {
                    let members = spec.split(',').map(formats::parse_word).collect::<Result<Vec<_>>>()?;
                    Ok(ConditioningSet::new(members, *range)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let b: SearchBounds = (*bounds).into();
            let mut s = header(
                "demo condition-set",
                &[
                    ("machine", mach.id()),
                    ("length_bound", b.length_bound.to_string()),
                    ("step_bound", b.step_bound.to_string()),
                    ("m_hat", "a priori lower bound with empty aux".into()),
                ],
            );
            s.push_str("chi\tm_hat_chi\tx\tin_b\tdirect\tneg_log_direct\tvia_chi\tneg_log_via_chi\tk_given_chi\tcomplete\n");
            for rep in single_gap_report(&mach, &family, b) {
                for row in &rep.rows {
                    let q = |v: &Option<kolmo_core::quotient::Quotient>| v.as_ref().map_or("none".into(), |q| q.to_string());
                    let nl = |v: &Option<kolmo_core::quotient::Quotient>| {
                        v.as_ref().map_or("none".into(), |q| q.neg_log2().to_string())
                    };
                    s.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                        word(&rep.chi),
                        rep.m_chi,
                        word(&row.x),
                        row.in_b,
                        q(&row.direct),
                        nl(&row.direct),
                        q(&row.conditional),
                        nl(&row.conditional),
                        row.k_given_chi.map_or("none".into(), |k| k.to_string()),
                        row.is_complete()
                    ));
                }
            }
            Ok(Output { inputs, ..Output::text(s) })
        }
        DemoCmd::JointGap { m, y, bounds } => {
            let mach = machine(m, &mut inputs)?;
            let b: SearchBounds = (*bounds).into();
            let r = joint_gap_report(&mach, y, b);
            let mut s = header(
                "demo joint-gap",
                &[
                    ("machine", mach.id()),
                    ("y", word(y)),
                    ("length_bound", b.length_bound.to_string()),
                    ("step_bound", b.step_bound.to_string()),
                    ("k_y", r.k_y.map_or("none".into(), |k| k.to_string())),
                    ("marginal", r.marginal.to_string()),
                    ("approximation", "K(y) replaced by the upper-bound estimate k_y".into()),
                ],
            );
            s.push_str("x\tjoint\tconditional\tneg_log_conditional\tk_given_y_ky\n");
            for row in &r.rows {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    word(&row.x),
                    row.joint,
                    row.conditional,
                    row.conditional.neg_log2(),
                    row.k_given_y_ky.map_or("none".into(), |k| k.to_string())
                ));
            }
            Ok(Output { inputs, ..Output::text(s) })
        }
    }
}
