//! Fixed-point construction of the pair `(v, w)` for radial `φ` and
//! constant `φ_b`.
//!
//! For radial data every boundary flux is constant on the sphere, so the
//! sphere integrals collapse by the mass law and each harmonic piece is a
//! multiple of `ρ(r) = r^{-(N-2)}`. With `q(t) = ∂_ν v(1, t) = -∂_r v(1, t)`:
//!
//! ```text
//! F₂[v](r, t) = ρ(r)·[q(t) - (N-2)∫₀ᵗ e^{-(N-2)(t-s)} q(s) ds]
//! w(r, t)     = ρ(r)·W(t),  W(t) = φ_b e^{-(N-2)t} - ∫₀ᵗ e^{-(N-2)(t-s)} q(s) ds
//! ```
//!
//! A Duhamel term `∫₀ᵗ S₁(ε⁻¹(t-s)) c(s)ρ ds` is the solution of the forced
//! problem `y_t = ε⁻¹Δy + c(t)ρ`, `y(0) = 0`, `y(1, t) = 0`; the map
//! `Q_ε[v] = S₁(ε⁻¹t)Φ - D_ε[φ_b] + D̃_ε[v]` is therefore one forced solve
//! started from `Φ` with amplitude `c = q + (N-2)W`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dynbc::{default_outer_radius, ProblemSpec, Resolution};
use crate::error::invalid;
use crate::radial::stepper::{march, InnerBoundary, ThetaSystem};
use crate::radial::{
    evolve_s1_sampled, one_sided_weights, FarBoundary, HeatStepperConfig, RadialField, RadialGrid,
    RadialProfile, TimeMesh,
};
use crate::{Error, Result};

/// Parameters of the iteration and of the weighted norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    /// Exponential weight `L` of the norm.
    pub l: f64,
    pub horizon: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub alpha: f64,
}

impl PicardConfig {
    /// `α = 1` for `N = 3`, `1.5` otherwise; `L = 1`, `tol = 1e-8`.
    pub fn new(dim: usize, horizon: f64) -> Self {
        Self {
            l: 1.0,
            horizon,
            max_iter: 200,
            tol: 1e-8,
            alpha: default_alpha(dim),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 3 && self.alpha != 1.0 {
            return Err(invalid("alpha must be 1 for N = 3"));
        }
        if dim >= 4 && !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(invalid("alpha must lie in (1, 2) for N >= 4"));
        }
        if !(self.tol > 0.0) || !(self.l >= 0.0) || !(self.horizon > 0.0) || self.max_iter == 0 {
            return Err(invalid(
                "picard config needs tol > 0, L >= 0, T > 0, max_iter >= 1",
            ));
        }
        Ok(())
    }
}

pub fn default_alpha(dim: usize) -> f64 {
    if dim == 3 {
        1.0
    } else {
        1.5
    }
}

/// Grid, physical-time mesh and stepper shared by every solve of a run.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Arc<RadialGrid>,
    mesh: TimeMesh,
    stepper: HeatStepperConfig,
}

impl Discretization {
    pub fn new(
        grid: Arc<RadialGrid>,
        horizon: f64,
        stepper: HeatStepperConfig,
        stops: &[f64],
    ) -> Result<Self> {
        if stepper.far_bc != FarBoundary::DirichletFrozen {
            return Err(invalid("the forced solves need the frozen far boundary"));
        }
        let mesh = TimeMesh::geometric(horizon, &stepper, stops)?;
        Ok(Self {
            grid,
            mesh,
            stepper,
        })
    }

    /// `R = 1 + 8√(T/ε)`, `σ = 3`, `dt₀ = 10⁻³ε`, growth `1.05`, steps at
    /// most `T/200`.
    pub fn standard(epsilon: f64, horizon: f64, nodes: usize, stops: &[f64]) -> Result<Self> {
        let grid = Arc::new(RadialGrid::graded(
            default_outer_radius(horizon, epsilon),
            nodes,
            3.0,
        )?);
        let stepper = HeatStepperConfig {
            dt_initial: 1e-3 * epsilon,
            dt_growth: 1.05,
            dt_max: horizon / 200.0,
            ..Default::default()
        };
        Self::new(grid, horizon, stepper, stops)
    }

    /// Grid and stepper of a direct-solver [`Resolution`].
    pub fn from_resolution(
        res: &Resolution,
        epsilon: f64,
        horizon: f64,
        stops: &[f64],
    ) -> Result<Self> {
        Self::new(
            res.grid(horizon, epsilon)?,
            horizon,
            res.stepper(epsilon),
            stops,
        )
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn stepper(&self) -> &HeatStepperConfig {
        &self.stepper
    }
}

/// A radial field at every time of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct VTrajectory {
    grid: Arc<RadialGrid>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl VTrajectory {
    pub fn new(grid: Arc<RadialGrid>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() || values.iter().any(|v| v.len() != grid.len()) {
            return Err(invalid("trajectory shape does not match grid and mesh"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory"));
        }
        Ok(Self {
            grid,
            times,
            values,
        })
    }

    pub fn zeros(disc: &Discretization) -> Self {
        let n = disc.grid.len();
        let times = disc.mesh.times().to_vec();
        let values = alloc::vec![alloc::vec![0.0; n]; times.len()];
        Self {
            grid: disc.grid.clone(),
            times,
            values,
        }
    }

    /// Samples `f(r, t)` on the grid and mesh.
    pub fn from_fn(disc: &Discretization, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let times = disc.mesh.times().to_vec();
        let values = times
            .iter()
            .map(|&t| disc.grid.nodes().iter().map(|&r| f(r, t)).collect())
            .collect();
        Self::new(disc.grid.clone(), times, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn field(&self, k: usize) -> RadialField {
        RadialField::new(self.grid.clone(), self.values[k].clone()).expect("finite trajectory")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `self - other` pointwise.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.times != other.times || self.grid.nodes() != other.grid.nodes() {
            return Err(invalid("trajectories live on different meshes"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            times: self.times.clone(),
            values,
        })
    }

    /// `∂_ν v(1, t) = -∂_r v(1, t)` at every mesh time.
    pub fn boundary_flux(&self) -> FluxSeries {
        let r = self.grid.nodes();
        let (c0, c1, c2) = one_sided_weights(r[0], r[1], r[2]);
        let values = self
            .values
            .iter()
            .map(|y| -(c0 * y[0] + c1 * y[1] + c2 * y[2]))
            .collect();
        FluxSeries {
            times: self.times.clone(),
            values,
        }
    }
}

/// A scalar time series on a mesh starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl FluxSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 3 {
            return Err(invalid(
                "flux series needs matching times and at least three samples",
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("flux series times must start at 0 and increase"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flux series"));
        }
        Ok(Self { times, values })
    }

    pub fn constant(times: Vec<f64>, value: f64) -> Result<Self> {
        let values = alloc::vec![value; times.len()];
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∫₀^{t_k} e^{-λ(t_k-s)} g(s) ds` at every mesh time.
    ///
    /// Trapezoid with the exponential carried exactly between nodes; the
    /// first cell fits `A s^{-1/2} + B` through the first two positive-time
    /// samples, which is exact for both a constant and an `s^{-1/2}` flux.
    pub fn exp_convolution(&self, lambda: f64) -> Vec<f64> {
        let (t, g) = (&self.times, &self.values);
        let mut out = alloc::vec![0.0; t.len()];
        let (t1, t2) = (t[1], t[2]);
        let (k1, k2) = (1.0 / libm::sqrt(t1), 1.0 / libm::sqrt(t2));
        let a = (g[1] - g[2]) / (k1 - k2);
        let b = g[1] - a * k1;
        out[1] = (2.0 * a * libm::sqrt(t1) + b * t1) * libm::exp(-0.5 * lambda * t1);
        for k in 2..t.len() {
            let dt = t[k] - t[k - 1];
            let decay = libm::exp(-lambda * dt);
            out[k] = decay * out[k - 1] + 0.5 * dt * (decay * g[k - 1] + g[k]);
        }
        out
    }

    /// Linear interpolation of a mesh-indexed series at `t`.
    fn interpolate(&self, series: &[f64], t: f64) -> Result<f64> {
        let n = self.times.len();
        let tol = 1e-12 * t.abs().max(1.0);
        if !(t >= -tol && t <= self.times[n - 1] + tol) {
            return Err(invalid("time outside the stored series"));
        }
        let j = self.times.partition_point(|&s| s < t).clamp(1, n - 1);
        let (s0, s1) = (self.times[j - 1], self.times[j]);
        let w = ((t - s0) / (s1 - s0)).clamp(0.0, 1.0);
        Ok(series[j - 1] * (1.0 - w) + series[j] * w)
    }
}

fn power_profile(grid: &RadialGrid, dim: usize) -> Vec<f64> {
    let p = dim as f64 - 2.0;
    grid.nodes().iter().map(|&r| libm::pow(r, -p)).collect()
}

/// `F₂[v](r, t)` for a radial `v` with boundary flux series `g = ∂_ν v`.
pub fn f2_radial(dim: usize, g: &FluxSeries, r: f64, t: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid("radius must be >= 1"));
    }
    let p = dim as f64 - 2.0;
    let conv = g.exp_convolution(p);
    let gt = g.interpolate(&g.values, t)?;
    let ct = g.interpolate(&conv, t)?;
    Ok(libm::pow(r, -p) * (gt - p * ct))
}

/// `w(r, t) = φ_b(eᵗr)^{-(N-2)} - ∫₀ᵗ (e^{t-s}r)^{-(N-2)} g(s) ds`.
pub fn reconstruct_w(spec: &ProblemSpec, g: &FluxSeries, t: f64, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid("radius must be >= 1"));
    }
    let p = spec.dim() as f64 - 2.0;
    let conv = g.exp_convolution(p);
    let ct = g.interpolate(&conv, t)?;
    Ok(libm::pow(r, -p) * (spec.phi_b() * libm::exp(-p * t) - ct))
}

/// `W(t_k)` at every mesh time.
fn w_amplitude(spec: &ProblemSpec, g: &FluxSeries) -> Vec<f64> {
    let p = spec.dim() as f64 - 2.0;
    let conv = g.exp_convolution(p);
    g.times
        .iter()
        .zip(&conv)
        .map(|(&t, &c)| spec.phi_b() * libm::exp(-p * t) - c)
        .collect()
}

/// `Φ = φ - φ_b r^{-(N-2)}` on the grid.
pub fn phi_effective(spec: &ProblemSpec, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    let phi = spec.phi().sample(grid, spec.dim())?;
    let rho = power_profile(grid, spec.dim());
    let values = phi
        .values()
        .iter()
        .zip(&rho)
        .map(|(f, r)| f - spec.phi_b() * r)
        .collect();
    RadialField::new(grid.clone(), values)
}

/// Solves `y_t = ε⁻¹Δy + amp(t_k)ρ` with `y(1) = 0` from `init`, keeping
/// every mesh state.
fn forced_solve(
    spec: &ProblemSpec,
    disc: &Discretization,
    init: &[f64],
    amp: &[f64],
) -> VTrajectory {
    let grid = &disc.grid;
    let rho = power_profile(grid, spec.dim());
    let mut system = ThetaSystem::new(
        grid,
        spec.dim(),
        1.0 / spec.epsilon(),
        InnerBoundary::Dirichlet,
        FarBoundary::DirichletFrozen,
    );
    let mut y = init.to_vec();
    y[0] = 0.0;
    let mut values = Vec::with_capacity(disc.mesh.len());
    let amplitude = |k: usize| amp[k];
    march(
        &mut system,
        &mut y,
        &disc.mesh,
        &disc.stepper,
        Some((&rho, &amplitude)),
        |_, y| values.push(y.to_vec()),
    );
    VTrajectory {
        grid: grid.clone(),
        times: disc.mesh.times().to_vec(),
        values,
    }
}

/// `D_ε[ψ]` along the whole mesh, from the forced solve with amplitude
/// `-(N-2)ψ e^{-(N-2)t}`.
pub fn d_eps_trajectory(spec: &ProblemSpec, psi_b: f64, disc: &Discretization) -> VTrajectory {
    let p = spec.dim() as f64 - 2.0;
    let amp: Vec<f64> = disc
        .mesh
        .times()
        .iter()
        .map(|&t| -p * psi_b * libm::exp(-p * t))
        .collect();
    forced_solve(spec, disc, &alloc::vec![0.0; disc.grid.len()], &amp)
}

/// `D_ε[ψ](t) = ∫₀ᵗ S₁(ε⁻¹(t-s)) F₁[ψ](s) ds` by composite midpoint in
/// `σ = t - s` over the stepper's geometric sequence; the `ρ` profile is
/// evolved once and read off at every midpoint.
pub fn d_eps(spec: &ProblemSpec, psi_b: f64, t: f64, disc: &Discretization) -> Result<RadialField> {
    if !(t > 0.0) {
        return Err(invalid("time must be positive"));
    }
    let grid = &disc.grid;
    if psi_b == 0.0 {
        return Ok(RadialField::zeros(grid.clone()));
    }
    let eps = spec.epsilon();
    let p = spec.dim() as f64 - 2.0;
    let sigma = TimeMesh::geometric(t, &disc.stepper, &[])?;
    let s = sigma.times();
    let mids: Vec<f64> = s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let fast_cfg = HeatStepperConfig {
        dt_initial: disc.stepper.dt_initial / eps,
        dt_max: disc.stepper.dt_max / eps,
        ..disc.stepper
    };
    let rho = RadialProfile::Power {
        amplitude: 1.0,
        exponent: p,
    }
    .sample(grid, spec.dim())?;
    let taus: Vec<f64> = mids.iter().map(|m| m / eps).collect();
    let snaps = evolve_s1_sampled(&rho, &taus, spec.dim(), &fast_cfg)?;
    let mut acc = alloc::vec![0.0; grid.len()];
    for ((w, m), snap) in s.windows(2).zip(&mids).zip(&snaps) {
        let weight = (w[1] - w[0]) * (-p * psi_b * libm::exp(-p * (t - m)));
        for (a, v) in acc.iter_mut().zip(snap.values()) {
            *a += weight * v;
        }
    }
    RadialField::new(grid.clone(), acc)
}

/// `E_ε[v](t)` at every mesh time.
pub fn energy(v: &VTrajectory, alpha: f64, epsilon: f64) -> Vec<f64> {
    (0..v.len())
        .map(|k| {
            let field = v.field(k);
            let sup = field.sup_norm();
            let grad = field
                .gradient()
                .iter()
                .fold(0.0, |m: f64, g| m.max(g.abs()));
            let s = v.times[k] / epsilon;
            (1.0 + libm::pow(s, alpha / 2.0)) * sup
                + libm::sqrt(s) * (1.0 + libm::pow(s, (alpha - 1.0) / 2.0)) * grad
        })
        .collect()
}

fn weighted_sup(times: &[f64], energy: &[f64], l: f64) -> f64 {
    times
        .iter()
        .zip(energy)
        .map(|(&t, &e)| libm::exp(-l * t) * e)
        .fold(0.0, f64::max)
}

/// `‖v‖_X = sup_t e^{-Lt} E_ε[v](t)` over the stored times.
pub fn x_norm(v: &VTrajectory, cfg: &PicardConfig, epsilon: f64) -> f64 {
    weighted_sup(&v.times, &energy(v, cfg.alpha, epsilon), cfg.l)
}

/// `D̃_ε[v] = ∫₀ᵗ S₁(ε⁻¹(t-s)) F₂[v](s) ds`.
pub fn d_tilde(spec: &ProblemSpec, disc: &Discretization, v: &VTrajectory) -> VTrajectory {
    let p = spec.dim() as f64 - 2.0;
    let q = v.boundary_flux();
    let conv = q.exp_convolution(p);
    let amp: Vec<f64> = q.values.iter().zip(&conv).map(|(g, c)| g - p * c).collect();
    forced_solve(spec, disc, &alloc::vec![0.0; disc.grid.len()], &amp)
}

/// `Q_ε[v] = S₁(ε⁻¹t)Φ - D_ε[φ_b] + D̃_ε[v]`.
pub fn q_eps_step(
    spec: &ProblemSpec,
    disc: &Discretization,
    v: &VTrajectory,
) -> Result<VTrajectory> {
    if v.times() != disc.mesh.times() {
        return Err(invalid("trajectory is not on the discretization mesh"));
    }
    let phi = phi_effective(spec, &disc.grid)?;
    let p = spec.dim() as f64 - 2.0;
    let q = v.boundary_flux();
    let w = w_amplitude(spec, &q);
    let amp: Vec<f64> = q.values.iter().zip(&w).map(|(g, w)| g + p * w).collect();
    Ok(forced_solve(spec, disc, phi.values(), &amp))
}

/// First iterate `S₁(ε⁻¹t)Φ - D_ε[φ_b]`.
pub fn initial_iterate(spec: &ProblemSpec, disc: &Discretization) -> Result<VTrajectory> {
    let phi = phi_effective(spec, &disc.grid)?;
    let p = spec.dim() as f64 - 2.0;
    let amp: Vec<f64> = disc
        .mesh
        .times()
        .iter()
        .map(|&t| p * spec.phi_b() * libm::exp(-p * t))
        .collect();
    Ok(forced_solve(spec, disc, phi.values(), &amp))
}

/// Deterministic test trajectories vanishing at `r = 1`, with boundary
/// layers from `√ε/4` to `4√ε` and assorted time profiles.
pub fn probe_trajectories(spec: &ProblemSpec, disc: &Discretization) -> Result<Vec<VTrajectory>> {
    let p = spec.dim() as f64 - 2.0;
    let layer = libm::sqrt(spec.epsilon());
    let horizon = disc.mesh.horizon();
    (0..5)
        .map(|j| {
            let width = layer * libm::pow(2.0, j as f64 - 2.0);
            let freq = (j + 1) as f64 * core::f64::consts::PI / horizon;
            VTrajectory::from_fn(disc, |r, t| {
                let shape = (1.0 - libm::exp(-(r - 1.0) / width)) * libm::pow(r, -p);
                let time = if j % 2 == 0 {
                    libm::cos(freq * t)
                } else {
                    1.0 + t / horizon
                };
                shape * time
            })
        })
        .collect()
}

/// Measured contraction of `D̃_ε` in the `X` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub l: f64,
    pub ratio: f64,
    /// `(L, ratio)` for every probed weight.
    pub trace: Vec<(f64, f64)>,
}

/// Doubles `L` from 1 until `max_j ‖D̃_ε[δ_j]‖_X / ‖δ_j‖_X ≤ 1/2` over the
/// probe trajectories; gives up past `L = 2¹⁰`.
pub fn find_contraction_weight(
    spec: &ProblemSpec,
    cfg: &PicardConfig,
    disc: &Discretization,
) -> Result<ContractionCertificate> {
    let probes = probe_trajectories(spec, disc)?;
    let eps = spec.epsilon();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = probes
        .iter()
        .map(|d| {
            (
                energy(d, cfg.alpha, eps),
                energy(&d_tilde(spec, disc, d), cfg.alpha, eps),
            )
        })
        .collect();
    let times = disc.mesh.times();
    let mut trace = Vec::new();
    let mut l = 1.0;
    while l <= 1024.0 {
        let ratio = pairs
            .iter()
            .map(|(e_in, e_out)| weighted_sup(times, e_out, l) / weighted_sup(times, e_in, l))
            .fold(0.0, f64::max);
        trace.push((l, ratio));
        if ratio <= 0.5 {
            return Ok(ContractionCertificate { l, ratio, trace });
        }
        l *= 2.0;
    }
    Err(Error::SearchExhausted { trace })
}

/// Converged decomposition and its diagnostics.
#[derive(Debug, Clone)]
pub struct VWPair {
    pub v: VTrajectory,
    /// `∂_ν v(1, ·)`.
    pub flux: FluxSeries,
    /// `w = W(t)·r^{-(N-2)}`.
    pub w_amplitude: Vec<f64>,
    /// `‖v_{n+1} - v_n‖_X` per iteration.
    pub increments: Vec<f64>,
    dim: usize,
}

impl VWPair {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    pub fn w_field(&self, k: usize) -> RadialField {
        let p = self.dim as f64 - 2.0;
        RadialField::from_fn(self.v.grid.clone(), |r| {
            self.w_amplitude[k] * libm::pow(r, -p)
        })
        .expect("finite w")
    }

    /// `u = v + w` at mesh index `k`.
    pub fn u_field(&self, k: usize) -> RadialField {
        let w = self.w_field(k);
        let values = self
            .v
            .values(k)
            .iter()
            .zip(w.values())
            .map(|(a, b)| a + b)
            .collect();
        RadialField::new(self.v.grid.clone(), values).expect("finite u")
    }
}

/// Iterates `Q_ε` from its standard first iterate.
pub fn picard_solve(
    spec: &ProblemSpec,
    cfg: &PicardConfig,
    disc: &Discretization,
) -> Result<VWPair> {
    let v0 = initial_iterate(spec, disc)?;
    picard_solve_from(spec, cfg, disc, v0)
}

/// Iterates `Q_ε` from `v0` until `‖v_{n+1} - v_n‖_X < tol·min(1, ‖v_{n+1}‖_X)`.
pub fn picard_solve_from(
    spec: &ProblemSpec,
    cfg: &PicardConfig,
    disc: &Discretization,
    v0: VTrajectory,
) -> Result<VWPair> {
    cfg.validate(spec.dim())?;
    let eps = spec.epsilon();
    let mut v = v0;
    let mut increments = Vec::new();
    for _ in 0..cfg.max_iter {
        let next = q_eps_step(spec, disc, &v)?;
        let inc = x_norm(&next.difference(&v)?, cfg, eps);
        let size = x_norm(&next, cfg, eps);
        if !inc.is_finite() {
            return Err(Error::NonFinite("picard increment"));
        }
        increments.push(inc);
        v = next;
        if inc <= cfg.tol * size.min(1.0) {
            let flux = v.boundary_flux();
            let w_amplitude = w_amplitude(spec, &flux);
            return Ok(VWPair {
                v,
                flux,
                w_amplitude,
                increments,
                dim: spec.dim(),
            });
        }
    }
    Err(Error::NoConvergence { increments })
}
