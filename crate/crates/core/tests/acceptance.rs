//! The acceptance gate: every documented criterion as its own test, each
//! printing one pass/fail line. Run with `--nocapture` to see the lines for
//! passing checks too.

use optomech::acceptance::{self, CheckResult, Effort};
use optomech::config::RunConfig;

fn assert_check(result: CheckResult) {
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

fn cfg() -> RunConfig {
    RunConfig::default()
}

#[test]
fn criterion_01_cavity_decay_rate() {
    assert_check(acceptance::check_kappa(&cfg()));
}

#[test]
fn criterion_02_natural_width() {
    assert_check(acceptance::check_natural_width(&cfg()));
}

#[test]
fn criterion_03_equipartition_round_trip() {
    assert_check(acceptance::check_equipartition_round_trip(&cfg()));
}

#[test]
fn criterion_04_cooling_arithmetic() {
    assert_check(acceptance::check_cooling_arithmetic(&cfg()));
}

#[test]
fn criterion_05_oracle_equivalence() {
    assert_check(acceptance::check_oracle_equivalence(&cfg(), Effort::full()));
}

#[test]
fn criterion_06_ring_down_oracle() {
    assert_check(acceptance::check_ring_down(&cfg()));
}

#[test]
fn criterion_07_beta_structure() {
    assert_check(acceptance::check_beta_structure(&cfg()));
}

#[test]
fn criterion_08_power_linearity() {
    assert_check(acceptance::check_power_linearity(&cfg()));
}

#[test]
fn criterion_09_heating_diagnostic() {
    assert_check(acceptance::check_heating_diagnostic(&cfg(), Effort::full()));
}

#[test]
fn criterion_10_effective_mass() {
    assert_check(acceptance::check_effective_mass(&cfg()));
}

#[test]
fn criterion_11_photothermal_time() {
    assert_check(acceptance::check_photothermal_time(&cfg()));
}

#[test]
fn criterion_12_lorentzian_fit_recovery() {
    assert_check(acceptance::check_fit_recovery(&cfg()));
}

#[test]
fn criterion_13_scaling_consistency() {
    assert_check(acceptance::check_scaling_consistency(&cfg()));
}
