//! Machine to a priori table to codebook to decoder machine, through the
//! public API only.

use kolmo_core::apriori::complete_stage;
use kolmo_core::coder::{build_codebook, machine_psi_run};
use kolmo_core::complexity::{k_table, SearchBounds};
use kolmo_core::vm::{fixtures, run, Machine};
use kolmo_core::{BitString, Dyadic};

#[test]
fn decoder_machine_meets_the_plus_three_bound() {
    let bounds = SearchBounds::new(7, 200);
    for (m, aux) in [
        (fixtures::two_routes(), ""),
        (fixtures::copy_two(), ""),
        (fixtures::aux_or_bar(), "1"),
        (fixtures::aux_or_bar(), "01"),
    ] {
        let y: BitString = aux.parse().unwrap();
        let psi = machine_psi_run(&m, &y, bounds).unwrap();
        let book = build_codebook(&psi, &y).unwrap();
        assert!(!psi.m_hat.is_empty());
        let decoder = book.to_machine();
        let k = k_table(&decoder, &y, SearchBounds::new(24, 400));
        for ((x, yy), m_hat) in &psi.m_hat {
            assert_eq!(yy, &y);
            let e = k.get(x).unwrap_or_else(|| panic!("{} has no program for {x}", m.id()));
            // 2^-K >= m̂/8, compared exactly.
            assert!(Dyadic::pow2_neg(e.bits as u64).shl(3) >= *m_hat, "{x}: K = {}, m̂ = {m_hat}", e.bits);
            assert_eq!(run(&decoder, &e.witness, &y, 400).halted_output(), Some(x));
        }
    }
}

#[test]
fn machine_stream_matches_apriori_table() {
    let m = fixtures::aux_or_bar();
    let y: BitString = "1".parse().unwrap();
    let b = SearchBounds::new(6, 100);
    let psi = machine_psi_run(&m, &y, b).unwrap();
    let q = kolmo_core::apriori::approx_apriori(&m, &y, complete_stage(6, 100), 6);
    for (x, v) in &q.entries {
        assert_eq!(psi.m_hat(x, &y), *v);
    }
}
