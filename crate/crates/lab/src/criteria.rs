//! The acceptance criteria as runnable checks.
//!
//! Every runner returns [`Outcome`]s rather than panicking, so the CLI and
//! the acceptance test share them. Numerical failures surface as errors.

use std::sync::Arc;
use std::time::Instant;

use dynbc_core::analysis::{damped_convolution_sup, find_l_star, DampedConvolution};
use dynbc_core::dynbc::{ProblemSpec, Resolution};
use dynbc_core::fit::fit_loglog;
use dynbc_core::kernels::{ExteriorPoint, KernelContext};
use dynbc_core::limit::{s2_apply_with, BoundaryDatum, QuadraturePolicy};
use dynbc_core::lower_bound::{decay_certificate, LowerBoundSpec};
use dynbc_core::picard::{
    find_contraction_weight, initial_iterate, picard_solve, picard_solve_from, probe_trajectories,
    x_norm, Discretization, PicardConfig, VTrajectory,
};
use dynbc_core::radial::{evolve_s1_sampled, HeatStepperConfig, RadialGrid, RadialProfile};

use crate::error::LabError;
use crate::harness::{picard_discrepancy, run_sweep, Scenario, SweepConfig, Tier};
use crate::report::RateReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    /// `criterion <id> <name>: PASS|FAIL (<detail>)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} {}: {} ({})",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn elapsed(start: Instant) -> String {
    format!("{:.1} s", start.elapsed().as_secs_f64())
}

/// Largest relative error of spherical quadrature of `𝒦` against the mass
/// law, over `N ∈ {3,4,5}`, `t ∈ {0, 0.5, 1}`, `|x| ∈ {1.5, 2, 4}`.
pub fn kernel_mass_errors() -> Result<Vec<(usize, f64, f64, f64)>, LabError> {
    let one = BoundaryDatum::Sampled(Arc::new(|_| 1.0));
    let mut rows = Vec::new();
    for dim in [3usize, 4, 5] {
        let ctx = KernelContext::new(dim)?;
        let policy = QuadraturePolicy::for_dim(dim);
        for t in [0.0, 0.5, 1.0] {
            for radius in [1.5, 2.0, 4.0] {
                // Off-axis direction so no symmetry of the rule is exploited.
                let dir: Vec<f64> = (0..dim)
                    .map(|i| 0.3 + 0.17 * i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 })
                    .collect();
                let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                let x = ExteriorPoint::new(dir.iter().map(|c| radius * c / norm).collect())?;
                let quad = s2_apply_with(&ctx, &one, &x, t, &policy)?;
                let exact = ctx.kernel_mass(radius, t)?;
                rows.push((dim, t, radius, ((quad - exact) / exact).abs()));
            }
        }
    }
    Ok(rows)
}

pub fn criterion1() -> Result<Outcome, LabError> {
    let start = Instant::now();
    let rows = kernel_mass_errors()?;
    let worst = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        id: 1,
        name: "kernel mass law",
        passed: worst < 1e-6 && secs < 10.0,
        detail: format!(
            "max rel err {worst:.2e} over {} cases, {}",
            rows.len(),
            elapsed(start)
        ),
    })
}

/// `erf((r-1)/(2√t))/r`, the heat flow of `1/r` in three dimensions.
pub fn s1_exact(r: f64, t: f64) -> f64 {
    libm::erf((r - 1.0) / (2.0 * t.sqrt())) / r
}

/// Stepper used for the `S₁` oracle runs: fine enough in time that the
/// spatial error dominates.
pub fn s1_oracle_stepper() -> HeatStepperConfig {
    HeatStepperConfig {
        dt_initial: 1e-7,
        dt_growth: 1.02,
        dt_max: 1e-3,
        ..Default::default()
    }
}

pub const S1_TIMES: [f64; 3] = [0.25, 1.0, 4.0];

/// `(max relative error, max absolute error)` of the grid `S₁` for
/// `φ = 1/r` at [`S1_TIMES`] on `nodes` graded nodes out to `R = 60`.
pub fn s1_oracle_errors(nodes: usize) -> Result<(f64, f64), LabError> {
    let grid = Arc::new(RadialGrid::graded(60.0, nodes, 3.0)?);
    let phi = RadialProfile::harmonic(3).sample(&grid, 3)?;
    let snaps = evolve_s1_sampled(&phi, &S1_TIMES, 3, &s1_oracle_stepper())?;
    let (mut rel, mut abs) = (0.0f64, 0.0f64);
    for (&t, field) in S1_TIMES.iter().zip(&snaps) {
        for (&r, &v) in grid.nodes().iter().zip(field.values()).skip(1) {
            let ex = s1_exact(r, t);
            abs = abs.max((v - ex).abs());
            rel = rel.max(((v - ex) / ex).abs());
        }
    }
    Ok((rel, abs))
}

pub fn criterion2() -> Result<Outcome, LabError> {
    let start = Instant::now();
    let nodes = Tier::Standard.resolution().nodes;
    let (rel, _) = s1_oracle_errors(nodes)?;
    let mut pts = Vec::new();
    for n in [500usize, 1000, 2000, 4000] {
        pts.push((1.0 / n as f64, s1_oracle_errors(n)?.1));
    }
    let order = fit_loglog(&pts)?.slope;
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        id: 2,
        name: "S1 oracle",
        passed: rel < 5e-4 && order >= 1.8 && secs < 30.0,
        detail: format!(
            "max rel err {rel:.2e} at {nodes} nodes, order {order:.3}, {}",
            elapsed(start)
        ),
    })
}

fn sweep_detail(rep: &RateReport) -> String {
    let fit = rep.fit.as_ref();
    let flagged = rep.validation.iter().filter(|c| c.flagged).count();
    format!(
        "slope {:.4}, leave-one-out {:.4}, {} of {} Richardson flags",
        fit.map_or(f64::NAN, |f| f.slope),
        fit.map_or(f64::NAN, |f| f.leave_one_out),
        flagged,
        rep.validation.len()
    )
}

/// The upper-rate sweep at the standard tier.
pub fn upper_rate_report(workers: usize) -> Result<RateReport, LabError> {
    run_sweep(&SweepConfig {
        workers,
        ..SweepConfig::new(Scenario::UpperRate, 3, Tier::Standard)
    })
}

pub fn criterion3(workers: usize) -> Result<(Outcome, RateReport), LabError> {
    let start = Instant::now();
    let rep = upper_rate_report(workers)?;
    let out = Outcome {
        id: 3,
        name: "upper rate",
        passed: rep.passed() && start.elapsed().as_secs_f64() < 600.0,
        detail: format!("{}, {}", sweep_detail(&rep), elapsed(start)),
    };
    Ok((out, rep))
}

pub fn lower_rate_report(dim: usize, workers: usize) -> Result<RateReport, LabError> {
    run_sweep(&SweepConfig {
        workers,
        ..SweepConfig::new(Scenario::LowerRate, dim, Tier::Standard)
    })
}

/// Criteria 4 and 5 from one lower-rate sweep per dimension.
pub fn criteria4_5(workers: usize) -> Result<(Outcome, Outcome, Vec<RateReport>), LabError> {
    let mut reports = Vec::new();
    let mut rate_ok = true;
    let mut details = Vec::new();
    for dim in [3usize, 4] {
        let start = Instant::now();
        let rep = lower_rate_report(dim, workers)?;
        rate_ok &= rep.slope_in_band()
            && rep.richardson_clear()
            && rep.points.iter().all(|p| p.error > 0.0)
            && start.elapsed().as_secs_f64() < 900.0;
        details.push(format!(
            "N={dim}: {}, {}",
            sweep_detail(&rep),
            elapsed(start)
        ));
        reports.push(rep);
    }
    let mut worst = f64::INFINITY;
    let mut comparison_ok = true;
    for p in reports.iter().flat_map(|r| &r.points) {
        let (m, e) = (
            p.comparison_margin.unwrap_or(f64::NAN),
            p.richardson_estimate.unwrap_or(f64::NAN),
        );
        comparison_ok &= m >= -10.0 * e;
        worst = worst.min(m + 10.0 * e);
    }
    let c4 = Outcome {
        id: 4,
        name: "lower rate",
        passed: rate_ok,
        detail: details.join("; "),
    };
    let c5 = Outcome {
        id: 5,
        name: "comparison principle",
        passed: comparison_ok,
        detail: format!(
            "min (margin + 10 x estimate) {worst:.3e} over {} solves",
            reports.iter().map(|r| r.points.len()).sum::<usize>()
        ),
    };
    Ok((c4, c5, reports))
}

pub fn criterion6() -> Result<Outcome, LabError> {
    let start = Instant::now();
    let nodes = Tier::Standard.resolution().nodes;
    let mut passed = true;
    let mut parts = Vec::new();
    for dim in [3usize, 4, 5] {
        let cert = decay_certificate(&LowerBoundSpec::standard(dim)?, (1.0, 1e3), 40, nodes)?;
        let plateau = cert.plateau_variation();
        passed &= cert.value > 0.0 && (dim != 3 || plateau < 0.2);
        parts.push(format!(
            "N={dim} min {:.4e} plateau {:.3}",
            cert.value, plateau
        ));
    }
    passed &= start.elapsed().as_secs_f64() < 120.0;
    Ok(Outcome {
        id: 6,
        name: "subsolution certificate",
        passed,
        detail: format!("{}, {}", parts.join("; "), elapsed(start)),
    })
}

/// Largest `X`-norm distance between the Picard limits started from
/// `v⁰` and from `v⁰ + probe_j`, relative to `tol`.
pub fn picard_uniqueness(
    spec: &ProblemSpec,
    cfg: &PicardConfig,
    disc: &Discretization,
) -> Result<f64, LabError> {
    let base = picard_solve(spec, cfg, disc)?;
    let v0 = initial_iterate(spec, disc)?;
    let probe = probe_trajectories(spec, disc)?.swap_remove(0);
    let values = (0..v0.len())
        .map(|k| {
            v0.values(k)
                .iter()
                .zip(probe.values(k))
                .map(|(a, b)| a + b)
                .collect()
        })
        .collect();
    let start = VTrajectory::new(disc.grid().clone(), v0.times().to_vec(), values)?;
    let other = picard_solve_from(spec, cfg, disc, start)?;
    Ok(x_norm(&other.v.difference(&base.v)?, cfg, spec.epsilon()))
}

pub fn criterion7() -> Result<Outcome, LabError> {
    let start = Instant::now();
    let (eps, window) = (0.1, (0.5, 1.0));
    let res = Resolution::default();
    let xval = picard_discrepancy(3, eps, window, &res)?;
    let spec = ProblemSpec::new(3, eps, RadialProfile::harmonic(3), 1.0)?;
    let disc = Discretization::from_resolution(&res, eps, window.1, &[window.0])?;
    let mut cfg = PicardConfig::new(3, window.1);
    cfg.l = find_contraction_weight(&spec, &cfg, &disc)?.l;
    let gap = picard_uniqueness(&spec, &cfg, &disc)?;
    let passed = xval.discrepancy < 0.02
        && xval.contraction <= 0.55
        && gap <= 2.0 * cfg.tol
        && start.elapsed().as_secs_f64() < 300.0;
    Ok(Outcome {
        id: 7,
        name: "Picard cross-validation",
        passed,
        detail: format!(
            "discrepancy {:.2e}, L {} ratio {:.3}, {} iterations, start gap {gap:.2e}, {}",
            xval.discrepancy,
            xval.l,
            xval.contraction,
            xval.iterations,
            elapsed(start)
        ),
    })
}

pub fn d_eps_report(workers: usize) -> Result<RateReport, LabError> {
    run_sweep(&SweepConfig {
        workers,
        ..SweepConfig::new(Scenario::DEpsScaling, 3, Tier::Standard)
    })
}

pub fn criterion8(workers: usize) -> Result<(Outcome, RateReport), LabError> {
    let start = Instant::now();
    let rep = d_eps_report(workers)?;
    let passed =
        rep.slope_in_band() && rep.richardson_clear() && start.elapsed().as_secs_f64() < 300.0;
    let out = Outcome {
        id: 8,
        name: "D_eps scaling",
        passed,
        detail: format!("{}, {}", sweep_detail(&rep), elapsed(start)),
    };
    Ok((out, rep))
}

pub fn criterion9() -> Result<Outcome, LabError> {
    let start = Instant::now();
    let p = DampedConvolution::new(0.25, 0.25, 1.0, 1.0, 0.1)?;
    let found = find_l_star(&p)?;
    let at = damped_convolution_sup(&p, found.l_star)?;
    let closed = damped_convolution_sup(&DampedConvolution::new(0.0, 0.0, 0.0, 1.0, 1.0)?, 1.0)?;
    let closed_err = (closed - (1.0 - (-1.0f64).exp())).abs();
    let passed = at <= 0.1
        && found.is_nonincreasing(1e-10)
        && closed_err < 1e-8
        && start.elapsed().as_secs_f64() < 30.0;
    Ok(Outcome {
        id: 9,
        name: "damped convolution threshold",
        passed,
        detail: format!(
            "L* {} with sup {at:.4}, {} probes, closed-form err {closed_err:.1e}, {}",
            found.l_star,
            found.trace.len(),
            elapsed(start)
        ),
    })
}

/// Every criterion in order.
pub fn run_all(workers: usize) -> Result<Vec<Outcome>, LabError> {
    let (c4, c5, _) = criteria4_5(workers)?;
    Ok(vec![
        criterion1()?,
        criterion2()?,
        criterion3(workers)?.0,
        c4,
        c5,
        criterion6()?,
        criterion7()?,
        criterion8(workers)?.0,
        criterion9()?,
    ])
}
