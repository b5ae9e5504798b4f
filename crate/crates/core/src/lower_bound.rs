//! Lower bounds for data supported away from the sphere.
//!
//! With `φ = r^{-(N-2)}χ_{r>b}` and `φ_b = 0`, the Dirichlet heat flow `z`
//! of `φ` rescaled to `z(r, t/ε)` is a subsolution of the dynamical
//! problem, and `z(r, t) ≳ t^{-(N/2-1)}` on compact sets for large `t`.
//! Together they give `u_ε ≳ ε^{N/2-1}`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dynbc::{inf_over_window, solve_window, ProblemSpec, Resolution, Trajectory};
use crate::error::invalid;
use crate::fit::{fit_loglog, LogLogFit};
use crate::numerics::logspace;
use crate::radial::{evolve_s1_sampled, HeatStepperConfig, RadialField, RadialGrid, RadialProfile};
use crate::{Error, Result};

/// Cutoff, compact radius interval and time window of the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundSpec {
    pub dim: usize,
    pub b: f64,
    pub k_r: (f64, f64),
    pub t_window: (f64, f64),
}

impl LowerBoundSpec {
    pub fn new(dim: usize, b: f64, k_r: (f64, f64), t_window: (f64, f64)) -> Result<Self> {
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(b > 1.0 && b.is_finite()) {
            return Err(invalid("cutoff b must exceed 1"));
        }
        if !(k_r.0 > 1.0 && k_r.1 >= k_r.0 && k_r.1.is_finite()) {
            return Err(invalid("radius interval must lie in (1, inf)"));
        }
        if !(t_window.0 > 0.0 && t_window.1 >= t_window.0 && t_window.1.is_finite()) {
            return Err(invalid("time window must satisfy 0 < t1 <= t2"));
        }
        Ok(Self {
            dim,
            b,
            k_r,
            t_window,
        })
    }

    /// `b = 2`, `K_r = [1.5, 2]`, `t ∈ [1, 2]`.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(dim, 2.0, (1.5, 2.0), (1.0, 2.0))
    }

    /// `r^{-(N-2)}χ_{r>b}`.
    pub fn datum(&self) -> RadialProfile {
        RadialProfile::TruncatedPower {
            amplitude: 1.0,
            exponent: self.dim as f64 - 2.0,
            cutoff: self.b,
        }
    }

    /// The dynamical problem with this datum and `φ_b = 0`.
    pub fn problem(&self, epsilon: f64) -> Result<ProblemSpec> {
        ProblemSpec::new(self.dim, epsilon, self.datum(), 0.0)
    }
}

/// `z(·, t)` at each of `times`.
pub fn heat_profile_z(
    spec: &LowerBoundSpec,
    times: &[f64],
    grid: &Arc<RadialGrid>,
    cfg: &HeatStepperConfig,
) -> Result<Vec<RadialField>> {
    let phi = spec.datum().sample(grid, spec.dim)?;
    evolve_s1_sampled(&phi, times, spec.dim, cfg)
}

/// Stepper for long `z` runs: steps grow by 10% without a cap.
pub fn long_time_stepper(dt_initial: f64) -> HeatStepperConfig {
    HeatStepperConfig {
        dt_initial,
        dt_growth: 1.1,
        ..Default::default()
    }
}

/// `z(r, t/ε)`.
pub fn subsolution(
    spec: &LowerBoundSpec,
    epsilon: f64,
    r: f64,
    t: f64,
    grid: &Arc<RadialGrid>,
    cfg: &HeatStepperConfig,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid("epsilon must lie in (0, 1]"));
    }
    let z = heat_profile_z(spec, &[t / epsilon], grid, cfg)?;
    Ok(z[0].interpolate(r))
}

/// Outcome of the sampled `z(r, t)·t^{N/2-1}` bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Minimum over all samples.
    pub value: f64,
    pub argmin: (f64, f64),
    /// `(t, min_r z(r, t)·t^{N/2-1})` per sampled time.
    pub profile: Vec<(f64, f64)>,
}

impl Certificate {
    /// `(max - min)/max` of the profile over the last decade of time.
    pub fn plateau_variation(&self) -> f64 {
        let t_end = self.profile.last().map(|p| p.0).unwrap_or(0.0);
        let tail: Vec<f64> = self
            .profile
            .iter()
            .filter(|p| p.0 >= t_end / 10.0 * (1.0 - 1e-12))
            .map(|p| p.1)
            .collect();
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / hi
    }
}

/// Minimum of `z(r, t)·t^{N/2-1}` over grid nodes in `K_r` and
/// `samples` log-spaced times in `t_range`, on a grid reaching
/// `1 + 8√t_max`.
pub fn decay_certificate(
    spec: &LowerBoundSpec,
    t_range: (f64, f64),
    samples: usize,
    nodes: usize,
) -> Result<Certificate> {
    let (lo, hi) = t_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(invalid("certificate times must satisfy 0 < t_lo <= t_hi"));
    }
    let times = if hi == lo {
        alloc::vec![lo]
    } else {
        logspace(lo, hi, samples.max(2))
    };
    let grid = Arc::new(RadialGrid::graded(1.0 + 8.0 * libm::sqrt(hi), nodes, 3.0)?);
    let cfg = long_time_stepper(1e-3 * lo.min(1.0));
    let z = heat_profile_z(spec, &times, &grid, &cfg)?;
    let idx = grid.index_range(spec.k_r.0, spec.k_r.1);
    if idx.is_empty() {
        return Err(invalid("no grid nodes inside K_r"));
    }
    let power = spec.dim as f64 / 2.0 - 1.0;
    let mut profile = Vec::with_capacity(times.len());
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for (&t, field) in times.iter().zip(&z) {
        let scale = libm::pow(t, power);
        let mut m = f64::INFINITY;
        for i in idx.clone() {
            let v = field.values()[i] * scale;
            if v < m {
                m = v;
            }
            if v < best.0 {
                best = (v, (grid.nodes()[i], t));
            }
        }
        profile.push((t, m));
    }
    if !(best.0 > 0.0) {
        return Err(Error::CertificateFailed {
            r: best.1 .0,
            t: best.1 .1,
            value: best.0,
        });
    }
    Ok(Certificate {
        value: best.0,
        argmin: best.1,
        profile,
    })
}

/// One ladder entry of the lower-rate experiment.
#[derive(Debug, Clone)]
pub struct LowerPoint {
    pub epsilon: f64,
    /// `inf u_ε` over `K_r × t_window`.
    pub inf_u: f64,
    /// `inf z(·, t/ε)` over the same samples.
    pub inf_z: f64,
    /// `min (u_ε - z(·, t/ε))` over every grid node and sampled time.
    pub comparison_margin: f64,
    pub trajectory: Trajectory,
}

/// Direct solve plus the rescaled subsolution on the same grid.
pub fn lower_point(spec: &LowerBoundSpec, epsilon: f64, res: &Resolution) -> Result<LowerPoint> {
    let problem = spec.problem(epsilon)?;
    let traj = solve_window(&problem, spec.t_window, res)?;
    let inf_u = inf_over_window(&traj, spec.k_r, spec.t_window)?;
    let grid = traj.grid().clone();
    let fast: Vec<f64> = traj.times().iter().map(|t| t / epsilon).collect();
    let cfg = HeatStepperConfig {
        dt_initial: res.dt0_factor,
        dt_max: res.dt_max / epsilon,
        ..res.stepper(epsilon)
    };
    let z = heat_profile_z(spec, &fast, &grid, &cfg)?;
    let idx = grid.index_range(spec.k_r.0, spec.k_r.1);
    let mut inf_z = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for (state, zf) in traj.states.iter().zip(&z) {
        for (i, (u, zv)) in state.interior.values().iter().zip(zf.values()).enumerate() {
            margin = margin.min(u - zv);
            if idx.contains(&i) {
                inf_z = inf_z.min(*zv);
            }
        }
    }
    Ok(LowerPoint {
        epsilon,
        inf_u,
        inf_z,
        comparison_margin: margin,
        trajectory: traj,
    })
}

/// Fitted exponent of `inf u_ε` over the ladder.
#[derive(Debug, Clone)]
pub struct LowerRate {
    pub points: Vec<(f64, f64)>,
    pub fit: LogLogFit,
}

/// Runs the ladder serially and fits `inf u_ε ≈ Cε^{slope}`.
pub fn lower_rate(spec: &LowerBoundSpec, ladder: &[f64], res: &Resolution) -> Result<LowerRate> {
    let mut points = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        if let Ok(p) = lower_point(spec, eps, res) {
            if !(p.inf_u > 0.0) {
                return Err(invalid("inf u_eps is not positive"));
            }
            points.push((eps, p.inf_u));
        }
    }
    if points.len() < 4 {
        return Err(invalid("fewer than four ladder entries survived"));
    }
    let fit = fit_loglog(&points)?;
    Ok(LowerRate { points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::exact_s1_3d;

    #[test]
    fn validation() {
        assert!(LowerBoundSpec::new(3, 1.0, (1.5, 2.0), (1.0, 2.0)).is_err());
        assert!(LowerBoundSpec::new(3, 2.0, (1.0, 2.0), (1.0, 2.0)).is_err());
        assert!(LowerBoundSpec::new(3, 2.0, (1.5, 2.0), (0.0, 2.0)).is_err());
        assert!(LowerBoundSpec::new(2, 2.0, (1.5, 2.0), (1.0, 2.0)).is_err());
    }

    #[test]
    fn z_matches_image_oracle_and_stays_nonnegative() {
        let spec = LowerBoundSpec::standard(3).unwrap();
        let grid = Arc::new(RadialGrid::graded(1.0 + 8.0 * libm::sqrt(10.0), 2000, 3.0).unwrap());
        let z = heat_profile_z(&spec, &[1e-3, 10.0], &grid, &long_time_stepper(1e-5)).unwrap();
        assert!(z[0].interpolate(1.5).abs() < 1e-6);
        let exact =
            exact_s1_3d(&|r| if r > 2.0 { 1.0 / r } else { 0.0 }, &[2.0], 1.5, 10.0).unwrap();
        assert!(
            (z[1].interpolate(1.5) - exact).abs() < 1e-3,
            "{} vs {exact}",
            z[1].interpolate(1.5)
        );
        assert!(z.iter().all(|f| f.values().iter().all(|&v| v >= -1e-12)));
    }

    #[test]
    fn subsolution_at_unit_epsilon_is_z() {
        let spec = LowerBoundSpec::standard(3).unwrap();
        let grid = Arc::new(RadialGrid::graded(30.0, 800, 3.0).unwrap());
        let cfg = long_time_stepper(1e-4);
        let z = heat_profile_z(&spec, &[1.0], &grid, &cfg).unwrap()[0].interpolate(1.5);
        assert_eq!(subsolution(&spec, 1.0, 1.5, 1.0, &grid, &cfg).unwrap(), z);
        assert!(subsolution(&spec, 0.0, 1.5, 1.0, &grid, &cfg).is_err());
    }

    #[test]
    fn degenerate_certificate_window() {
        let spec = LowerBoundSpec::standard(3).unwrap();
        let c = decay_certificate(&spec, (5.0, 5.0), 10, 600).unwrap();
        assert_eq!(c.profile.len(), 1);
        assert!(c.value > 0.0 && c.argmin.1 == 5.0);
    }
}
