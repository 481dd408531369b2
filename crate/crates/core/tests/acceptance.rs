//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the computed and expected values. Run with `--nocapture` to see them.

use squidchain::validation::{self, Check};

fn verdict(check: Check) {
    println!("{check}");
    assert!(check.pass, "{check}");
}

#[test]
fn criterion_01_eta_of_c1() {
    verdict(validation::eta_tc());
}

#[test]
fn criterion_02_on_resonance_sql_ratio() {
    verdict(validation::on_resonance_sql_ratio());
}

#[test]
fn criterion_03_first_stage_epsilon_uc_invariance() {
    verdict(validation::epsilon_uc_tc_invariance());
}

#[test]
fn criterion_04_scaled_array_designs() {
    verdict(validation::array_design_table());
}

#[test]
fn criterion_05_prototype_referral_consistency() {
    verdict(validation::prototype_consistency());
}

#[test]
fn criterion_06_low_bandwidth_cryo_rf_epsilon_bound() {
    verdict(validation::low_bandwidth_cryo_bound());
}

#[test]
fn criterion_07_oracle_equivalence() {
    verdict(validation::oracle_equivalence());
}

#[test]
fn criterion_08_tc_identities() {
    verdict(validation::tc_identities());
}

#[test]
fn criterion_09_detuned_resonator_cross_check() {
    verdict(validation::detuned_match_cross_check());
}

#[test]
fn criterion_10_scan_match_properties() {
    verdict(validation::scan_match_properties());
}

#[test]
fn criterion_11_coupling_invariance() {
    verdict(validation::coupling_invariance());
}
