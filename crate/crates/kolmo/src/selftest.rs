//! A quick, seeded invariant pass over every module.

use kolmo_core::apriori::{approx_apriori, apriori_vs_k, complete_stage};
use kolmo_core::arith::{cover_by_binary, largest_binary_subinterval, Dyadic, Interval};
use kolmo_core::bits::BitString;
use kolmo_core::codes::{bar_encode, is_prefix_free, kraft_sum, nat_to_string, pair_strings, unpair_strings};
use kolmo_core::coder::{build_codebook, psi_discretize, psi_sums, shannon_fano, PsiSchedule};
use kolmo_core::complexity::{k_table, SearchBounds};
use kolmo_core::quotient::{quotient_conditional, JointMixture, JointTable};
use kolmo_core::semimeasure::{
    check_domination, mixture, normalize, FnApproximator, FreezeMode, MixtureSpec, MonotoneApproximator,
    TableApproximator,
};
use kolmo_core::vm::{dovetail, enumerate_machines, fixtures, run, DovetailConfig, RunOutcome, UniversalMachine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parallel::par_dovetail;

type Check = (&'static str, fn(&mut ChaCha8Rng) -> Result<(), String>);

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn random_masses(rng: &mut ChaCha8Rng, n: usize, max_exp: u64) -> Vec<Dyadic> {
    // Cut [0,1) at random dyadic points, then keep a random share of each piece.
    let mut out = Vec::new();
    let mut left = Dyadic::one();
    for _ in 0..n {
        let e = rng.gen_range(1..=max_exp);
        let m = Dyadic::pow2_neg(e);
        if let Some(rest) = left.checked_sub(&m) {
            out.push(m);
            left = rest;
        }
    }
    out
}

fn codes(_: &mut ChaCha8Rng) -> Result<(), String> {
    let bar: Vec<BitString> = (0..15).map(|n| bar_encode(&nat_to_string(n))).collect();
    ensure(is_prefix_free(&bar), || "bar code not prefix-free".into())?;
    ensure(kraft_sum(&bar) <= Dyadic::one(), || "bar Kraft sum above 1".into())?;
    for a in 0..40 {
        for b in 0..40 {
            let (x, y) = (nat_to_string(a), nat_to_string(b));
            let back = unpair_strings(&pair_strings(&x, &y)).map_err(|e| e.to_string())?;
            ensure(back == (x.clone(), y.clone()), || format!("pair roundtrip {x:?} {y:?}"))?;
        }
    }
    Ok(())
}

fn intervals(_: &mut ChaCha8Rng) -> Result<(), String> {
    let e = 6;
    for lo in 0..(1u64 << e) {
        for hi in lo + 1..=(1u64 << e) {
            let i = Interval::new(Dyadic::ratio(lo, e), Dyadic::ratio(hi, e)).map_err(|e| e.to_string())?;
            let cover = cover_by_binary(&i);
            ensure(cover.len() <= 4, || format!("cover of {i} has {} parts", cover.len()))?;
            let big = largest_binary_subinterval(&i).ok_or("no binary subinterval")?;
            ensure(big.length().shl(2) >= i.length(), || format!("largest binary piece of {i} too small"))?;
        }
    }
    Ok(())
}

fn prefix_property(_: &mut ChaCha8Rng) -> Result<(), String> {
    for i in 1..=30 {
        let m = enumerate_machines(i);
        for aux in [BitString::empty(), "1".parse().unwrap()] {
            let halting: Vec<BitString> = (0..(1u64 << 8) - 1)
                .map(nat_to_string)
                .filter(|p| matches!(run(&m, p, &aux, 500), RunOutcome::Halted { .. }))
                .collect();
            ensure(is_prefix_free(&halting), || format!("machine {i} halting set not prefix-free"))?;
        }
    }
    Ok(())
}

fn scheduler(_: &mut ChaCha8Rng) -> Result<(), String> {
    let aux: BitString = "01".parse().unwrap();
    let cfg = DovetailConfig::new(300).with_max_len(8);
    let u = UniversalMachine::new(64);
    ensure(par_dovetail(&u, &aux, cfg) == dovetail(&u, &aux, cfg), || "parallel schedule differs".into())
}

fn apriori_and_k(_: &mut ChaCha8Rng) -> Result<(), String> {
    let expect = [
        (fixtures::halt_immediately(), vec![("-", "1/2^0")]),
        (fixtures::echo_one(), vec![("0", "1/2^1"), ("1", "1/2^1")]),
        (fixtures::copy_two(), vec![("00", "1/2^2"), ("01", "1/2^2"), ("10", "1/2^2"), ("11", "1/2^2")]),
    ];
    let b = SearchBounds::new(6, 100);
    for (m, rows) in expect {
        let t = approx_apriori(&m, &BitString::empty(), complete_stage(6, 100), 6);
        let got: Vec<(String, String)> = t
            .entries
            .iter()
            .map(|(x, q)| (crate::formats::word(x), q.to_string()))
            .collect();
        let want: Vec<(String, String)> = rows.iter().map(|(x, q)| (x.to_string(), q.to_string())).collect();
        ensure(got == want, || format!("a priori table {got:?}"))?;
        let k = k_table(&m, &BitString::empty(), b);
        let rows = apriori_vs_k(&t, &k).map_err(|e| e.to_string())?;
        ensure(rows.iter().all(|r| r.holds), || "2^-K above Q".into())?;
    }
    Ok(())
}

fn stage_one(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let ones = normalize(FnApproximator(|_, _, _| Ok(Dyadic::one())), 8, FreezeMode::AllOrNothing)
        .map_err(|e| e.to_string())?;
    ensure(ones.values.len() == 1 && ones.get(1, 1) == Dyadic::one(), || "constant-one trace".into())?;
    for _ in 0..50 {
        let mut t = TableApproximator::new();
        for x in 1..=4 {
            for y in 1..=3 {
                let mut e = 8;
                for k in 1..=6 {
                    if rng.gen_bool(0.3) && e > 1 {
                        e -= rng.gen_range(1..e.min(3) + 1);
                        e = e.max(1);
                        t.insert(x, y, k, Some(Dyadic::pow2_neg(e)));
                    }
                }
            }
        }
        let p = normalize(&t, 8, FreezeMode::AllOrNothing).map_err(|e| e.to_string())?;
        ensure(p.is_semimeasure(), || "column above 1".into())?;
    }
    Ok(())
}

fn mixtures(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..30 {
        let n = rng.gen_range(1..=4);
        let mut comps: Vec<Box<dyn MonotoneApproximator>> = Vec::new();
        for _ in 0..n {
            let mut t = TableApproximator::new();
            for y in 1..=3 {
                for (x, m) in random_masses(rng, 4, 5).into_iter().enumerate() {
                    t.insert(x as u64 + 1, y, rng.gen_range(1..=4), Some(m));
                }
            }
            comps.push(Box::new(t));
        }
        let spec = MixtureSpec::with_bar_weights(comps, &[]);
        let m = mixture(&spec, 6, FreezeMode::AllOrNothing).map_err(|e| e.to_string())?;
        let dom: Vec<(u64, u64)> = (1..=6).flat_map(|x| (1..=6).map(move |y| (x, y))).collect();
        ensure(m.measure.is_semimeasure(), || "mixture column above 1".into())?;
        ensure(check_domination(&m.measure, &spec, &m.parts, &dom).map_err(|e| e.to_string())?, || {
            "domination fails".into()
        })?;
    }
    Ok(())
}

fn coding(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..50 {
        let masses: Vec<(BitString, Dyadic)> = random_masses(rng, 10, 8)
            .into_iter()
            .enumerate()
            .map(|(i, m)| (nat_to_string(i as u64), m))
            .collect();
        let book = shannon_fano(&masses).map_err(|e| e.to_string())?;
        for (e, (_, p)) in book.entries.iter().zip(&masses) {
            let bound = p.ceil_neg_log2().unwrap() + 2;
            ensure(e.codeword.len() as i64 <= bound, || "Shannon-Fano length bound".into())?;
        }
        let mut t = TableApproximator::new();
        for (i, (_, m)) in masses.iter().enumerate() {
            t.insert(i as u64 + 1, 1, rng.gen_range(1..=3), Some(m.shr(1)));
            t.insert(i as u64 + 1, 1, rng.gen_range(4..=6), Some(m.clone()));
        }
        let run = psi_discretize(&t, &PsiSchedule::new(vec![1], masses.len() as u64, 20)).map_err(|e| e.to_string())?;
        let y = BitString::empty();
        let book = build_codebook(&run, &y).map_err(|e| e.to_string())?;
        for ((x, _), m) in &run.m_hat {
            let c = book.encode(x).ok_or("symbol without codeword")?;
            ensure(Dyadic::pow2_neg(c.len() as u64).shl(3) >= *m, || "factor-8 bound".into())?;
            ensure(book.decode(c, &y).ok().flatten() == Some(x), || "decode roundtrip".into())?;
        }
        ensure(psi_sums(&run).iter().all(|r| r.strict), || "psi sum reached 2m".into())?;
    }
    Ok(())
}

fn quotients(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..30 {
        let mut comps = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut e = std::collections::BTreeMap::new();
            for (i, m) in random_masses(rng, 6, 6).into_iter().enumerate() {
                let x = nat_to_string(i as u64 % 3);
                let y = nat_to_string(i as u64 / 3);
                e.insert((x, y), m);
            }
            comps.push((rng.gen_range(2..=3), JointTable::new(e).map_err(|e| e.to_string())?));
        }
        let mix = JointMixture { components: comps };
        let summed = mix.summed().map_err(|e| e.to_string())?;
        for y in summed.ys() {
            for x in summed.xs() {
                let a = quotient_conditional(&summed, &x, &y).map_err(|e| e.to_string())?;
                let b = mix.conditional_sum_inside(&x, &y).map_err(|e| e.to_string())?;
                let c = mix.conditional_marginals_first(&x, &y).map_err(|e| e.to_string())?;
                ensure(a == b && b == c, || "quotient forms differ".into())?;
            }
        }
    }
    Ok(())
}

pub const CHECKS: &[Check] = &[
    ("codes", codes),
    ("intervals", intervals),
    ("prefix-property", prefix_property),
    ("scheduler", scheduler),
    ("apriori-and-k", apriori_and_k),
    ("stage-one", stage_one),
    ("mixtures", mixtures),
    ("coding", coding),
    ("quotients", quotients),
];

/// Runs every check with its own generator seeded from `seed`; returns
/// the report and whether everything passed.
pub fn selftest(seed: u64) -> (String, bool) {
    let mut out = format!("# kolmo {} selftest\n# seed={seed}\n", env!("CARGO_PKG_VERSION"));
    let mut ok = true;
    for (i, (name, check)) in CHECKS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        match check(&mut rng) {
            Ok(()) => out.push_str(&format!("pass\t{name}\n")),
            Err(why) => {
                ok = false;
                out.push_str(&format!("FAIL\t{name}\t{why}\n"));
            }
        }
    }
    (out, ok)
}
