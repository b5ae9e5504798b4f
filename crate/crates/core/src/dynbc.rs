//! Direct solver for the radial problem
//!
//! ```text
//! ε ∂_t u = ∂_rr u + ((N-1)/r) ∂_r u,   1 < r < R,
//! du_b/dt = ∂_r u(1, t),                 u(1, t) = u_b(t),
//! ```
//!
//! with `u(·, 0) = φ` and `u_b(0) = φ_b`. The boundary unknown is solved
//! together with the interior nodes in one linear system per step.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::limit::s2_constant;
use crate::numerics::logspace;
use crate::radial::stepper::{march, InnerBoundary, ThetaSystem};
use crate::radial::{
    one_sided_weights, HeatStepperConfig, RadialField, RadialGrid, RadialProfile, TimeMesh,
};
use crate::{Error, Result};

/// Data of one instance of the problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    dim: usize,
    epsilon: f64,
    phi: RadialProfile,
    phi_b: f64,
    decay_m: f64,
}

impl ProblemSpec {
    /// Validates `ε ∈ (0, 1)`, `N ≥ 3` and finiteness of
    /// `M = sup r^{N-2}|φ(r)|`.
    pub fn new(dim: usize, epsilon: f64, phi: RadialProfile, phi_b: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid("epsilon must lie in (0, 1)"));
        }
        if !phi_b.is_finite() {
            return Err(Error::NonFinite("boundary datum"));
        }
        let p = dim as f64 - 2.0;
        if let RadialProfile::Power {
            amplitude,
            exponent,
        }
        | RadialProfile::TruncatedPower {
            amplitude,
            exponent,
            ..
        } = phi
        {
            if amplitude != 0.0 && exponent < p {
                return Err(invalid("initial data must decay at least like r^{-(N-2)}"));
            }
        }
        // Probe out to r = 10⁶; decay slower than r^{-(N-2)} shows up as growth.
        let probe = logspace(1.0, 1e6, 400);
        let weighted: Vec<f64> = probe
            .iter()
            .map(|&r| libm::pow(r, p) * phi.eval(r).abs())
            .collect();
        let decay_m = weighted.iter().copied().fold(0.0, f64::max);
        if !decay_m.is_finite() {
            return Err(invalid("decay constant M is not finite"));
        }
        let tail = weighted[weighted.len() - 1];
        let mid = weighted[weighted.len() / 2];
        if tail > 10.0 * mid.max(f64::MIN_POSITIVE) && tail > 1e-12 {
            return Err(invalid("r^{N-2}|phi| keeps growing; decay condition fails"));
        }
        Ok(Self {
            dim,
            epsilon,
            phi,
            phi_b,
            decay_m,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn phi(&self) -> &RadialProfile {
        &self.phi
    }

    pub fn phi_b(&self) -> f64 {
        self.phi_b
    }

    /// `M = sup r^{N-2}|φ(r)|`.
    pub fn decay_m(&self) -> f64 {
        self.decay_m
    }

    /// The same data with a different `ε`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.dim, epsilon, self.phi.clone(), self.phi_b)
    }
}

/// `1 + 8√(T/ε)`, capped at `10⁴`.
pub fn default_outer_radius(horizon: f64, epsilon: f64) -> f64 {
    (1.0 + 8.0 * libm::sqrt(horizon / epsilon)).min(1e4)
}

/// How the truncation radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusPolicy {
    /// `1 + factor·√(T/ε)`, capped at `10⁴`.
    Diffusive {
        factor: f64,
    },
    Fixed(f64),
}

impl RadiusPolicy {
    pub fn radius(&self, horizon: f64, epsilon: f64) -> f64 {
        match *self {
            RadiusPolicy::Diffusive { factor } => {
                (1.0 + factor * libm::sqrt(horizon / epsilon)).min(1e4)
            }
            RadiusPolicy::Fixed(r) => r,
        }
    }
}

/// Discretization knobs of a direct solve, independent of `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub nodes: usize,
    pub sigma: f64,
    pub radius: RadiusPolicy,
    pub theta: f64,
    /// `dt₀ = dt0_factor·ε`.
    pub dt0_factor: f64,
    pub dt_growth: f64,
    /// Cap on any step, in physical time.
    pub dt_max: f64,
    /// Sampled times per unit length of the time window.
    pub window_samples: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            nodes: 2000,
            sigma: 3.0,
            radius: RadiusPolicy::Diffusive { factor: 8.0 },
            theta: 0.5,
            dt0_factor: 1e-3,
            dt_growth: 1.05,
            dt_max: 0.01,
            window_samples: 11,
        }
    }
}

impl Resolution {
    pub fn grid(&self, horizon: f64, epsilon: f64) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::graded(
            self.radius.radius(horizon, epsilon),
            self.nodes,
            self.sigma,
        )?))
    }

    pub fn stepper(&self, epsilon: f64) -> HeatStepperConfig {
        HeatStepperConfig {
            theta: self.theta,
            dt_initial: self.dt0_factor * epsilon,
            dt_growth: self.dt_growth,
            dt_max: self.dt_max,
            ..Default::default()
        }
    }

    /// `window_samples` equally spaced times covering `[t1, t2]`.
    pub fn window_times(&self, t1: f64, t2: f64) -> Vec<f64> {
        let n = self.window_samples.max(2);
        (0..n)
            .map(|i| t1 + (t2 - t1) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Twice the nodes (and radius kept).
    pub fn refined_space(&self) -> Self {
        Self {
            nodes: 2 * self.nodes,
            ..*self
        }
    }

    /// Half the steps.
    pub fn refined_time(&self) -> Self {
        Self {
            dt0_factor: 0.5 * self.dt0_factor,
            dt_max: 0.5 * self.dt_max,
            ..*self
        }
    }

    /// Twice the truncation length, with twice the nodes.
    pub fn doubled_radius(&self, horizon: f64, epsilon: f64) -> Self {
        let r = self.radius.radius(horizon, epsilon);
        Self {
            radius: RadiusPolicy::Fixed(1.0 + 2.0 * (r - 1.0)),
            nodes: 2 * self.nodes,
            ..*self
        }
    }
}

/// Solves up to `t2` and samples the window `[t1, t2]`.
pub fn solve_window(
    spec: &ProblemSpec,
    window: (f64, f64),
    res: &Resolution,
) -> Result<Trajectory> {
    let (t1, t2) = window;
    if !(t1 > 0.0 && t2 >= t1) {
        return Err(invalid("time window must satisfy 0 < t1 <= t2"));
    }
    let grid = res.grid(t2, spec.epsilon())?;
    solve_dynbc(
        spec,
        t2,
        &res.window_times(t1, t2),
        &grid,
        &res.stepper(spec.epsilon()),
        TimeScale::Physical,
    )
}

/// Which time variable the stepper integrates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScale {
    /// `ε u_t = Δu`, `u_b' = ∂_r u(1)`.
    #[default]
    Physical,
    /// `τ = t/ε`: `u_τ = Δu`, `du_b/dτ = ε ∂_r u(1)`.
    Fast,
}

/// Interior profile and boundary trace at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DynBCState {
    pub interior: RadialField,
    pub boundary_value: f64,
    pub time: f64,
}

/// Snapshots of a solve at the requested times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<DynBCState>,
    /// Largest `|Δu_b/Δt - θ-averaged ∂_r u(1)|` over accepted steps
    /// (physical time units).
    pub boundary_residual: f64,
    /// Number of time steps taken.
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.states[0].interior.grid()
    }

    /// Rows `(t, r, u)` for export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.states.iter().flat_map(|s| {
            s.interior
                .grid()
                .nodes()
                .iter()
                .zip(s.interior.values())
                .map(move |(&r, &u)| (s.time, r, u))
        })
    }

    /// States whose time lies in `[t1, t2]`.
    pub fn window(&self, t1: f64, t2: f64) -> impl Iterator<Item = &DynBCState> {
        let tol = 1e-12 * t2.abs().max(1.0);
        self.states
            .iter()
            .filter(move |s| s.time >= t1 - tol && s.time <= t2 + tol)
    }
}

/// Integrates the coupled problem up to `horizon`, recording the states
/// at `sample_times` (each in `(0, horizon]`).
pub fn solve_dynbc(
    spec: &ProblemSpec,
    horizon: f64,
    sample_times: &[f64],
    grid: &Arc<RadialGrid>,
    cfg: &HeatStepperConfig,
    scale: TimeScale,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    if sample_times.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
        return Err(invalid("sample times must lie in (0, horizon]"));
    }
    let eps = spec.epsilon();
    let mesh = TimeMesh::geometric(horizon, cfg, sample_times)?;
    let (diffusivity, rate, mesh_run) = match scale {
        TimeScale::Physical => (1.0 / eps, 1.0, mesh.clone()),
        TimeScale::Fast => (1.0, eps, mesh.scaled(1.0 / eps)),
    };
    let mut y = spec.phi().sample(grid, spec.dim())?.into_values();
    y[0] = spec.phi_b();
    if cfg.far_bc == crate::radial::FarBoundary::DirichletZero {
        let n = y.len();
        y[n - 1] = 0.0;
    }
    let mut system = ThetaSystem::new(
        grid,
        spec.dim(),
        diffusivity,
        InnerBoundary::Dynamic { rate },
        cfg.far_bc,
    );
    let wanted: Vec<usize> = sample_times
        .iter()
        .map(|&t| mesh.index_of(t).expect("sample on mesh"))
        .collect();
    let (c0, c1, c2) = one_sided_weights(grid.nodes()[0], grid.nodes()[1], grid.nodes()[2]);
    let flux = |y: &[f64]| c0 * y[0] + c1 * y[1] + c2 * y[2];
    let mut states: Vec<Option<DynBCState>> = alloc::vec![None; sample_times.len()];
    let mut prev: Option<(f64, f64)> = None;
    let mut residual: f64 = 0.0;
    let times = mesh.times();
    march(&mut system, &mut y, &mesh_run, cfg, None, |k, y| {
        let f = flux(y);
        if let Some((ub, fprev)) = prev {
            let theta = if k <= cfg.startup_steps {
                1.0
            } else {
                cfg.theta
            };
            let dt = times[k] - times[k - 1];
            let lhs = (y[0] - ub) / dt;
            let rhs = theta * f + (1.0 - theta) * fprev;
            residual = residual.max((lhs - rhs).abs());
        }
        prev = Some((y[0], f));
        for (slot, &w) in states.iter_mut().zip(&wanted) {
            if w == k {
                *slot = Some(DynBCState {
                    interior: RadialField::new(grid.clone(), y.to_vec()).expect("finite state"),
                    boundary_value: y[0],
                    time: times[k],
                });
            }
        }
    });
    let states = states
        .into_iter()
        .map(|s| s.expect("state recorded"))
        .collect();
    Ok(Trajectory {
        states,
        boundary_residual: residual,
        steps: times.len() - 1,
    })
}

/// `sup |u_ε(r, t) - φ_b (eᵗr)^{-(N-2)}|` over grid nodes with `r ∈ [r_min, r_max]`
/// and sampled times in `[t1, t2]`.
pub fn error_vs_limit(
    traj: &Trajectory,
    spec: &ProblemSpec,
    r_range: (f64, f64),
    t_window: (f64, f64),
) -> Result<f64> {
    let grid = traj.grid();
    let idx = grid.index_range(r_range.0, r_range.1);
    let mut any = false;
    let mut sup: f64 = 0.0;
    for s in traj.window(t_window.0, t_window.1) {
        for i in idx.clone() {
            any = true;
            let r = grid.nodes()[i];
            let limit = s2_constant(spec.dim(), spec.phi_b(), r, s.time);
            sup = sup.max((s.interior.values()[i] - limit).abs());
        }
    }
    if !any {
        return Err(invalid("empty radius/time window"));
    }
    Ok(sup)
}

/// `inf u_ε` over the same kind of window.
pub fn inf_over_window(
    traj: &Trajectory,
    r_range: (f64, f64),
    t_window: (f64, f64),
) -> Result<f64> {
    let grid = traj.grid();
    let idx = grid.index_range(r_range.0, r_range.1);
    let mut inf = f64::INFINITY;
    for s in traj.window(t_window.0, t_window.1) {
        for i in idx.clone() {
            inf = inf.min(s.interior.values()[i]);
        }
    }
    if !inf.is_finite() {
        return Err(invalid("empty radius/time window"));
    }
    Ok(inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64) -> HeatStepperConfig {
        HeatStepperConfig {
            dt_initial: 1e-3 * eps,
            dt_growth: 1.05,
            dt_max: 0.01,
            ..Default::default()
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ProblemSpec::new(3, 1.0, RadialProfile::Zero, 0.0).is_err());
        assert!(ProblemSpec::new(3, 0.0, RadialProfile::Zero, 0.0).is_err());
        assert!(ProblemSpec::new(2, 0.5, RadialProfile::Zero, 0.0).is_err());
        let slow = RadialProfile::Power {
            amplitude: 1.0,
            exponent: 0.5,
        };
        assert!(ProblemSpec::new(3, 0.5, slow, 0.0).is_err());
        let custom = RadialProfile::Custom(Arc::new(libm::sqrt));
        assert!(ProblemSpec::new(3, 0.5, custom, 0.0).is_err());
        let s = ProblemSpec::new(
            4,
            0.1,
            RadialProfile::Power {
                amplitude: 3.0,
                exponent: 2.0,
            },
            1.0,
        )
        .unwrap();
        assert!((s.decay_m() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let spec = ProblemSpec::new(3, 0.1, RadialProfile::Zero, 0.0).unwrap();
        let grid = Arc::new(RadialGrid::graded(30.0, 300, 3.0).unwrap());
        let traj = solve_dynbc(
            &spec,
            1.0,
            &[0.5, 1.0],
            &grid,
            &cfg(0.1),
            TimeScale::Physical,
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s.interior.sup_norm() == 0.0));
    }

    #[test]
    fn physical_and_fast_formulations_agree() {
        let eps = 0.05;
        let spec = ProblemSpec::new(3, eps, RadialProfile::harmonic(3), 1.0).unwrap();
        let grid = Arc::new(RadialGrid::graded(default_outer_radius(1.0, eps), 600, 3.0).unwrap());
        let a = solve_dynbc(
            &spec,
            1.0,
            &[0.5, 1.0],
            &grid,
            &cfg(eps),
            TimeScale::Physical,
        )
        .unwrap();
        let b = solve_dynbc(&spec, 1.0, &[0.5, 1.0], &grid, &cfg(eps), TimeScale::Fast).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert!((sa.time - sb.time).abs() < 1e-14);
            for (u, v) in sa.interior.values().iter().zip(sb.interior.values()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn boundary_law_residual_is_rounding_level() {
        let eps = 0.1;
        let spec = ProblemSpec::new(3, eps, RadialProfile::harmonic(3), 1.0).unwrap();
        let grid = Arc::new(RadialGrid::graded(default_outer_radius(1.0, eps), 400, 3.0).unwrap());
        let traj = solve_dynbc(&spec, 1.0, &[1.0], &grid, &cfg(eps), TimeScale::Physical).unwrap();
        assert!(traj.boundary_residual < 1e-6, "{}", traj.boundary_residual);
    }

    #[test]
    fn empty_window_is_an_error() {
        let spec = ProblemSpec::new(3, 0.1, RadialProfile::Zero, 0.0).unwrap();
        let grid = Arc::new(RadialGrid::graded(30.0, 100, 3.0).unwrap());
        let traj = solve_dynbc(&spec, 1.0, &[1.0], &grid, &cfg(0.1), TimeScale::Physical).unwrap();
        assert!(error_vs_limit(&traj, &spec, (1.5, 2.0), (3.0, 4.0)).is_err());
        assert_eq!(
            error_vs_limit(&traj, &spec, (1.5, 2.0), (0.5, 1.0)).unwrap(),
            0.0
        );
    }
}
