//! θ-scheme time stepping for `y' = κ·Δ_r y + a(t)·s(r)` on a graded grid.
//!
//! `Δ_r = ∂_rr + ((N-1)/r)∂_r` uses the three-point nonuniform stencils.
//! The inner boundary row is either Dirichlet or the dynamical law
//! `y₀' = rate·∂_r y(1)`, whose one-sided stencil adds one entry outside
//! the tridiagonal band; it is eliminated against row 1 before the
//! Thomas sweep. The first few steps run fully implicit (Rannacher
//! start-up) to damp the high-frequency content of nonsmooth data.

use alloc::vec::Vec;

use super::{one_sided_weights, RadialField, RadialGrid};
use crate::error::invalid;
use crate::numerics::solve_tridiagonal;
use crate::{Error, Result};

/// Treatment of the truncation radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarBoundary {
    /// `u(R, t)` held at its initial value; under a source it follows
    /// `u' = a(t)s(R)` alone (the Laplacian is neglected at `R`).
    DirichletFrozen,
    DirichletZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatStepperConfig {
    /// Implicitness weight in `[1/2, 1]`; `1/2` is Crank–Nicolson.
    pub theta: f64,
    pub dt_initial: f64,
    /// Geometric growth of successive steps, in `[1, 1.2]`.
    pub dt_growth: f64,
    /// Upper bound on any single step.
    pub dt_max: f64,
    pub far_bc: FarBoundary,
    /// Number of leading backward-Euler steps.
    pub startup_steps: usize,
}

impl Default for HeatStepperConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            dt_initial: 1e-4,
            dt_growth: 1.05,
            dt_max: f64::INFINITY,
            far_bc: FarBoundary::DirichletFrozen,
            startup_steps: 4,
        }
    }
}

impl HeatStepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(invalid("theta must lie in [0.5, 1]"));
        }
        if !(self.dt_initial > 0.0) || !self.dt_initial.is_finite() {
            return Err(invalid("dt_initial must be positive"));
        }
        if !(1.0..=1.2).contains(&self.dt_growth) {
            return Err(invalid("dt_growth must lie in [1, 1.2]"));
        }
        if !(self.dt_max > 0.0) {
            return Err(invalid("dt_max must be positive"));
        }
        Ok(())
    }
}

/// Increasing step times `0 = t₀ < t₁ < … < t_M = horizon`.
///
/// Steps grow geometrically from `dt_initial` up to `dt_max`; a step that
/// would overshoot one of the requested stop times is shortened to land
/// on it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    times: Vec<f64>,
}

impl TimeMesh {
    pub fn geometric(horizon: f64, cfg: &HeatStepperConfig, stops: &[f64]) -> Result<Self> {
        cfg.validate()?;
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid("time horizon must be positive"));
        }
        let mut stops: Vec<f64> = stops
            .iter()
            .copied()
            .filter(|&s| s > 0.0 && s < horizon)
            .collect();
        stops.push(horizon);
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        let mut times = alloc::vec![0.0];
        let mut t = 0.0;
        let mut dt = cfg.dt_initial;
        let mut next = 0;
        while next < stops.len() {
            let target = stops[next];
            let step = dt.min(cfg.dt_max);
            // Absorb a sliver remainder into this step instead of a tiny one next.
            let t_new = if t + step >= target - 0.1 * step {
                target
            } else {
                t + step
            };
            times.push(t_new);
            t = t_new;
            if t_new == target {
                next += 1;
            }
            dt *= cfg.dt_growth;
        }
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("mesh must start at 0 and increase strictly"));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Index of the mesh point equal to `t` (within rounding).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        let j = self.times.partition_point(|&s| s < t - tol);
        (j < self.times.len() && (self.times[j] - t).abs() <= tol).then_some(j)
    }

    /// The same mesh with every time multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum InnerBoundary {
    /// `y₀` held at its current value.
    Dirichlet,
    /// `y₀' = rate·∂_r y(1)`.
    Dynamic { rate: f64 },
}

/// Assembled spatial operator plus boundary treatment.
#[derive(Debug, Clone)]
pub(crate) struct ThetaSystem {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    flux: (f64, f64, f64),
    diffusivity: f64,
    inner: InnerBoundary,
    far: FarBoundary,
    // scratch
    m_lower: Vec<f64>,
    m_diag: Vec<f64>,
    m_upper: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
}

impl ThetaSystem {
    pub(crate) fn new(
        grid: &RadialGrid,
        dim: usize,
        diffusivity: f64,
        inner: InnerBoundary,
        far: FarBoundary,
    ) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let mut lower = alloc::vec![0.0; n];
        let mut diag = alloc::vec![0.0; n];
        let mut upper = alloc::vec![0.0; n];
        let k = dim as f64 - 1.0;
        for i in 1..n - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let s = hm + hp;
            let drift = k / r[i];
            lower[i] = 2.0 / (hm * s) - drift * hp / (hm * s);
            upper[i] = 2.0 / (hp * s) + drift * hm / (hp * s);
            diag[i] = -2.0 / (hm * hp) + drift * (hp - hm) / (hm * hp);
        }
        Self {
            lower,
            diag,
            upper,
            flux: one_sided_weights(r[0], r[1], r[2]),
            diffusivity,
            inner,
            far,
            m_lower: alloc::vec![0.0; n],
            m_diag: alloc::vec![0.0; n],
            m_upper: alloc::vec![0.0; n],
            rhs: alloc::vec![0.0; n],
            work: Vec::with_capacity(n),
        }
    }

    /// `(A y)_i` for the rows that evolve.
    fn apply_row(&self, y: &[f64], i: usize) -> f64 {
        self.diffusivity
            * (self.lower[i] * y[i - 1] + self.diag[i] * y[i] + self.upper[i] * y[i + 1])
    }

    /// One θ-step of length `dt`. `source` is added with amplitudes
    /// `amp_old` and `amp_new` at the two ends of the step.
    pub(crate) fn step(
        &mut self,
        y: &mut [f64],
        dt: f64,
        theta: f64,
        source: Option<(&[f64], f64, f64)>,
    ) {
        let n = y.len();
        let explicit = (1.0 - theta) * dt;
        let implicit = theta * dt;
        for i in 1..n - 1 {
            let mut b = y[i] + explicit * self.apply_row(y, i);
            if let Some((s, a0, a1)) = source {
                b += dt * (theta * a1 + (1.0 - theta) * a0) * s[i];
            }
            self.rhs[i] = b;
            self.m_lower[i] = -implicit * self.diffusivity * self.lower[i];
            self.m_diag[i] = 1.0 - implicit * self.diffusivity * self.diag[i];
            self.m_upper[i] = -implicit * self.diffusivity * self.upper[i];
        }
        self.m_lower[n - 1] = 0.0;
        self.m_diag[n - 1] = 1.0;
        self.m_upper[n - 1] = 0.0;
        self.rhs[n - 1] = y[n - 1];
        if let (FarBoundary::DirichletFrozen, Some((s, a0, a1))) = (self.far, source) {
            self.rhs[n - 1] += dt * (theta * a1 + (1.0 - theta) * a0) * s[n - 1];
        }
        match self.inner {
            InnerBoundary::Dirichlet => {
                self.m_diag[0] = 1.0;
                self.m_upper[0] = 0.0;
                self.rhs[0] = y[0];
            }
            InnerBoundary::Dynamic { rate } => {
                let (c0, c1, c2) = self.flux;
                let flux = c0 * y[0] + c1 * y[1] + c2 * y[2];
                let mut d0 = 1.0 - implicit * rate * c0;
                let mut u0 = -implicit * rate * c1;
                let extra = -implicit * rate * c2;
                let mut b0 = y[0] + explicit * rate * flux;
                // eliminate the (0, 2) entry with row 1
                let f = extra / self.m_upper[1];
                d0 -= f * self.m_lower[1];
                u0 -= f * self.m_diag[1];
                b0 -= f * self.rhs[1];
                self.m_diag[0] = d0;
                self.m_upper[0] = u0;
                self.rhs[0] = b0;
            }
        }
        solve_tridiagonal(
            &self.m_lower,
            &self.m_diag,
            &self.m_upper,
            &mut self.rhs,
            &mut self.work,
        );
        y.copy_from_slice(&self.rhs);
    }
}

/// Marches `y` across `mesh`, calling `visit(k, y)` at every mesh index
/// (including `k = 0`). `amplitude(k)` scales the optional source profile.
/// Source profile and its amplitude at step `k`.
pub(crate) type Forcing<'a> = (&'a [f64], &'a dyn Fn(usize) -> f64);

pub(crate) fn march(
    system: &mut ThetaSystem,
    y: &mut [f64],
    mesh: &TimeMesh,
    cfg: &HeatStepperConfig,
    source: Option<Forcing<'_>>,
    mut visit: impl FnMut(usize, &[f64]),
) {
    visit(0, y);
    let times = mesh.times();
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let theta = if k <= cfg.startup_steps {
            1.0
        } else {
            cfg.theta
        };
        match source {
            Some((s, amp)) => system.step(y, dt, theta, Some((s, amp(k - 1), amp(k)))),
            None => system.step(y, dt, theta, None),
        }
        visit(k, y);
    }
}

fn prepare_initial(phi: &RadialField, cfg: &HeatStepperConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut y = phi.values().to_vec();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial data"));
    }
    y[0] = 0.0;
    if cfg.far_bc == FarBoundary::DirichletZero {
        let n = y.len();
        y[n - 1] = 0.0;
    }
    Ok(y)
}

/// `S₁(t)φ`: Dirichlet heat flow with unit diffusivity for duration `t`.
pub fn evolve_s1(
    phi: &RadialField,
    t: f64,
    dim: usize,
    cfg: &HeatStepperConfig,
) -> Result<RadialField> {
    if !(t > 0.0) {
        return Err(invalid("evolution time must be positive"));
    }
    let mut out = evolve_s1_sampled(phi, &[t], dim, cfg)?;
    Ok(out.pop().expect("one snapshot"))
}

/// Snapshots of `S₁(t)φ` at each of `times` (any order, all positive).
pub fn evolve_s1_sampled(
    phi: &RadialField,
    times: &[f64],
    dim: usize,
    cfg: &HeatStepperConfig,
) -> Result<Vec<RadialField>> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(invalid("snapshot times must be positive"));
    }
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let mesh = TimeMesh::geometric(horizon, cfg, times)?;
    let mut y = prepare_initial(phi, cfg)?;
    let mut system = ThetaSystem::new(phi.grid(), dim, 1.0, InnerBoundary::Dirichlet, cfg.far_bc);
    let wanted: Vec<usize> = times
        .iter()
        .map(|&t| mesh.index_of(t).expect("stop times are on the mesh"))
        .collect();
    let mut snaps: Vec<Option<Vec<f64>>> = alloc::vec![None; times.len()];
    march(&mut system, &mut y, &mesh, cfg, None, |k, y| {
        for (slot, &w) in snaps.iter_mut().zip(&wanted) {
            if w == k {
                *slot = Some(y.to_vec());
            }
        }
    });
    snaps
        .into_iter()
        .map(|v| RadialField::new(phi.grid().clone(), v.expect("snapshot recorded")))
        .collect()
}
