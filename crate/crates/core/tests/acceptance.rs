//! Release gate: the nine-criterion verification suite at the standard
//! precision 8.  Each criterion is its own test and prints one pass/fail
//! line, so the scoreboard is visible in the test output.

use std::sync::LazyLock;

use orthomod::selftest::{self, SelftestReport};

static REPORT: LazyLock<SelftestReport> =
    LazyLock::new(|| selftest::run(8).expect("tower builds at precision 8"));

fn criterion(id: usize) {
    let c = REPORT
        .criteria
        .iter()
        .find(|c| c.id == id)
        .expect("criterion ids run 1..=9");
    println!(
        "criterion {}: {} — {} ({}) [{:.2}s]",
        c.id,
        if c.passed { "PASS" } else { "FAIL" },
        c.label,
        c.details,
        c.seconds,
    );
    assert!(c.passed, "criterion {} failed: {}", c.id, c.details);
}

#[test]
fn criterion_1_headline_certificate() {
    criterion(1);
}

#[test]
fn criterion_2_first_family_certificates() {
    criterion(2);
}

#[test]
fn criterion_3_bracket_vanishes() {
    criterion(3);
}

#[test]
fn criterion_4_construction_self_checks() {
    criterion(4);
}

#[test]
fn criterion_5_coefficient_calculus() {
    criterion(5);
}

#[test]
fn criterion_6_catalog_regression() {
    criterion(6);
}

#[test]
fn criterion_7_identity_prediction() {
    criterion(7);
}

#[test]
fn criterion_8_property_suites() {
    criterion(8);
}

#[test]
fn criterion_9_negative_controls() {
    criterion(9);
}
