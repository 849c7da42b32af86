//! Acceptance suite A1–A9 on the shipped reference configuration. Each
//! check prints one PASS/FAIL line.

use ipfe_core::config::{parse_config, RunConfig};
use ipfe_core::validate::{self, CheckResult};
use ipfe_core::Execution;

const REFERENCE: &str = include_str!("../../../configs/reference.json");

fn reference() -> RunConfig {
    parse_config(REFERENCE).expect("reference config is valid")
}

fn report(c: CheckResult) {
    println!("{}", c.line());
    for (k, v) in &c.details {
        println!("    {k} = {v:.6e}");
    }
    assert!(c.passed, "{}", c.line());
}

#[test]
fn a1_free_space_exactness() {
    report(validate::check_a1(&reference()));
}

#[test]
fn a2_first_moment_decay() {
    report(validate::check_a2(&reference(), Execution::default()));
}

#[test]
fn a3_oracle_equivalence() {
    report(validate::check_a3(&reference(), Execution::default()));
}

#[test]
fn a4_conservation() {
    report(validate::check_a4(&reference()));
}

#[test]
fn a5_gaussian_stationarity() {
    report(validate::check_a5(&reference().tolerances));
}

#[test]
fn a6_brute_force_rhs() {
    report(validate::check_a6(&reference().tolerances));
}

#[test]
fn a7_state_closed_forms() {
    report(validate::check_a7(&reference().tolerances));
}

#[test]
fn a8_screen_statistics() {
    report(validate::check_a8(&reference(), Execution::default()));
}

#[test]
fn a9_characteristic_duality() {
    report(validate::check_a9(&reference().tolerances));
}
