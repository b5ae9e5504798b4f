//! Acceptance criteria 1–9 at the standard tier. Each test prints one
//! `criterion <id> ...: PASS|FAIL` line.
//!
//! Criteria 3 and 8 ask for slopes that the exact solutions of the
//! three-dimensional problems do not reach on the prescribed ladder. Their
//! tests print the verdict as measured and assert instead that the solver
//! reproduces the closed-form values, so a red line there reflects the
//! problem and not the discretization.

use dynbc_core::fit::fit_loglog;
use dynbc_lab::criteria::{self, Outcome};

fn report(out: &Outcome) {
    println!("{}", out.line());
}

#[test]
fn criterion_1_kernel_mass_law() {
    let out = criteria::criterion1().unwrap();
    report(&out);
    assert!(out.passed, "{}", out.detail);
}

#[test]
fn criterion_2_s1_oracle() {
    let out = criteria::criterion2().unwrap();
    report(&out);
    assert!(out.passed, "{}", out.detail);
}

/// `sup |u_ε - S₂(t)1|` over `r ∈ [1.5, 2]` (26 points), `t ∈ [1, 2]` (11
/// points) for `φ = 1/r`, `φ_b = 1`, from numerical inversion of the
/// Laplace transform of the exact solution.
const UPPER_ORACLE: [(f64, f64); 5] = [
    (0.1, 0.13087982805484594),
    (0.05, 0.09765068784984525),
    (0.025, 0.07188388870974967),
    (0.0125, 0.052336483095215644),
    (0.00625, 0.03780490350866826),
];

#[test]
fn criterion_3_upper_rate() {
    let (out, rep) = criteria::criterion3(1).unwrap();
    report(&out);
    let oracle_slope = fit_loglog(&UPPER_ORACLE).unwrap().slope;
    println!("  exact-solution slope on this ladder: {oracle_slope:.4}");
    assert!(oracle_slope < 0.45);
    for (p, &(eps, exact)) in rep.points.iter().zip(&UPPER_ORACLE) {
        assert_eq!(p.epsilon, eps);
        let rel = (p.error - exact).abs() / exact;
        assert!(rel < 5e-3, "eps {eps}: {} vs {exact}", p.error);
    }
    let fit = rep.fit.as_ref().unwrap();
    assert!(
        (fit.slope - oracle_slope).abs() < 2e-3,
        "{} vs {oracle_slope}",
        fit.slope
    );
    assert!(fit.leave_one_out < 0.08);
    assert!(rep.richardson_clear());
    assert_eq!(out.passed, fit.slope >= 0.45);
}

#[test]
fn criteria_4_5_lower_rate_and_comparison() {
    let (c4, c5, _) = criteria::criteria4_5(1).unwrap();
    report(&c4);
    report(&c5);
    assert!(c4.passed, "{}", c4.detail);
    assert!(c5.passed, "{}", c5.detail);
}

#[test]
fn criterion_6_subsolution_certificate() {
    let out = criteria::criterion6().unwrap();
    report(&out);
    assert!(out.passed, "{}", out.detail);
}

#[test]
fn criterion_7_picard_cross_validation() {
    let out = criteria::criterion7().unwrap();
    report(&out);
    assert!(out.passed, "{}", out.detail);
}

/// `‖D_ε[1](1)‖_∞` for `N = 3` from
/// `D(r) = -(1/r)∫₀¹ e^{-s} erf((r-1)√ε / (2√(1-s))) ds`.
const D_EPS_ORACLE: [(f64, f64); 5] = [
    (0.1, 0.10479596427430092),
    (0.05, 0.08129272473130766),
    (0.025, 0.06222560749210947),
    (0.0125, 0.047076255755145666),
    (0.00625, 0.03525446268968443),
];

#[test]
fn criterion_8_d_eps_scaling() {
    let (out, rep) = criteria::criterion8(1).unwrap();
    report(&out);
    let oracle_slope = fit_loglog(&D_EPS_ORACLE).unwrap().slope;
    println!("  exact-solution slope on this ladder: {oracle_slope:.4}");
    assert!(oracle_slope < 0.4);
    for (p, &(eps, exact)) in rep.points.iter().zip(&D_EPS_ORACLE) {
        assert_eq!(p.epsilon, eps);
        let rel = (p.error - exact).abs() / exact;
        assert!(rel < 5e-3, "eps {eps}: {} vs {exact}", p.error);
    }
    let fit = rep.fit.as_ref().unwrap();
    assert!(
        (fit.slope - oracle_slope).abs() < 2e-3,
        "{} vs {oracle_slope}",
        fit.slope
    );
    assert!(rep.richardson_clear());
    assert_eq!(out.passed, (0.4..=0.6).contains(&fit.slope));
}

#[test]
fn criterion_9_damped_convolution_threshold() {
    let out = criteria::criterion9().unwrap();
    report(&out);
    assert!(out.passed, "{}", out.detail);
}
