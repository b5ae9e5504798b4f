//! The solvers against closed-form solutions of the three-dimensional
//! problems. Reference values were computed to 15 digits from the Laplace
//! transform of the exact solution and from the `erf` representation of
//! the Duhamel term, then frozen here.

use dynbc_core::dynbc::{solve_dynbc, ProblemSpec, Resolution, TimeScale};
use dynbc_core::limit::s2_constant;
use dynbc_core::picard::{d_eps, Discretization};
use dynbc_core::radial::{HeatStepperConfig, RadialProfile};

/// `(r, t, ε, u_ε(r, t))` for `φ = 1/r`, `φ_b = 1`.
const DIRECT: [(f64, f64, f64, f64); 5] = [
    (1.0, 1.0, 0.1, 0.461642939885294),
    (1.5, 1.0, 0.1, 0.358919341162728),
    (2.0, 1.0, 0.001, 0.198657977912747),
    (2.0, 1.5, 0.025, 0.18320753126547),
    (3.0, 0.5, 0.05, 0.274957026269611),
];

#[test]
fn direct_solver_matches_the_laplace_solution() {
    for (r, t, eps, exact) in DIRECT {
        let spec = ProblemSpec::new(3, eps, RadialProfile::harmonic(3), 1.0).unwrap();
        // R grows like ε^{-1/2}; 8000 graded nodes keep r = 2 resolved at ε = 10⁻³.
        let res = Resolution {
            nodes: 8000,
            dt_max: 1e-3,
            ..Resolution::default()
        };
        let grid = res.grid(t, eps).unwrap();
        let cfg = HeatStepperConfig {
            dt_initial: 1e-5 * eps,
            ..res.stepper(eps)
        };
        let traj = solve_dynbc(&spec, t, &[t], &grid, &cfg, TimeScale::Physical).unwrap();
        let state = &traj.states[0];
        let u = if r == 1.0 {
            state.boundary_value
        } else {
            state.interior.interpolate(r)
        };
        assert!(
            (u - exact).abs() < 1e-4 * exact,
            "u({r}, {t}; {eps}) = {u} vs {exact}"
        );
    }
}

#[test]
fn small_epsilon_approaches_the_limit() {
    let (r, t, eps, exact) = DIRECT[2];
    let limit = s2_constant(3, 1.0, r, t);
    assert!((exact - limit).abs() < 0.04);
    let spec = ProblemSpec::new(3, eps, RadialProfile::harmonic(3), 1.0).unwrap();
    let res = Resolution {
        nodes: 8000,
        ..Resolution::default()
    };
    let traj = solve_dynbc(
        &spec,
        t,
        &[t],
        &res.grid(t, eps).unwrap(),
        &res.stepper(eps),
        TimeScale::Fast,
    )
    .unwrap();
    assert!((traj.states[0].interior.interpolate(r) - exact).abs() < 1e-4 * exact);
}

/// `(r, ε, D_ε[1](r, 1))` for `N = 3`.
const DUHAMEL: [(f64, f64, f64); 5] = [
    (2.0, 0.1, -0.086_763_101_960_838_55),
    (3.47, 0.1, -0.10479595449143604),
    (5.0, 0.025, -0.062_167_264_379_068_38),
    (1.5, 0.00625, -0.015808136482579946),
    (8.0, 0.00625, -0.034_972_081_890_155_61),
];

#[test]
fn duhamel_term_matches_the_erf_representation() {
    for (r, eps, exact) in DUHAMEL {
        let spec = ProblemSpec::new(3, eps, RadialProfile::Zero, 0.0).unwrap();
        let disc = Discretization::standard(eps, 1.0, 2000, &[]).unwrap();
        let d = d_eps(&spec, 1.0, 1.0, &disc).unwrap().interpolate(r);
        assert!(
            (d - exact).abs() < 2e-3 * exact.abs(),
            "D({r}; {eps}) = {d} vs {exact}"
        );
    }
}

#[test]
fn duhamel_supremum_scales_below_the_square_root_on_this_ladder() {
    // ‖D_ε‖/√ε grows as ε shrinks: the ladder sits in the preasymptotic range.
    let sup = [
        0.10479596427430092,
        0.08129272473130766,
        0.06222560749210947,
        0.047076255755145666,
        0.03525446268968443,
    ];
    let ratios: Vec<f64> = sup
        .iter()
        .enumerate()
        .map(|(k, s)| s / (0.1 * 0.5f64.powi(k as i32)).sqrt())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
}
