//! Radial Dirichlet heat flow on the exterior of the unit ball.
//!
//! Radial profiles live on a graded grid in `[1, R]`. The semigroup
//! `S₁(t)` (unit diffusivity, `u(1) = 0`) is approximated by a θ-scheme
//! in [`stepper`]; for `N = 3` the substitution `U = r u` reduces the
//! problem to the half-line, and [`oracle`] evaluates the resulting
//! image-method integral independently.

pub mod oracle;
pub mod stepper;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::invalid;
use crate::{Error, Result};

pub use oracle::exact_s1_3d;
pub use stepper::{evolve_s1, evolve_s1_sampled, FarBoundary, HeatStepperConfig, TimeMesh};

/// Strictly increasing radii with `r₀ = 1` and `r_last = R > 2`.
///
/// The graded layout is `rᵢ = 1 + (R-1)(e^{σξᵢ} - 1)/(e^σ - 1)` with `ξᵢ`
/// uniform on `[0, 1]`, so nodes cluster toward the sphere for `σ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    sigma: f64,
}

impl RadialGrid {
    pub fn graded(outer_radius: f64, nodes: usize, sigma: f64) -> Result<Self> {
        if !(outer_radius > 2.0) || !outer_radius.is_finite() {
            return Err(invalid("truncation radius must be finite and > 2"));
        }
        if nodes < 3 {
            return Err(invalid("radial grid needs at least 3 nodes"));
        }
        if !(sigma >= 0.0) {
            return Err(invalid("grading parameter must be >= 0"));
        }
        let span = outer_radius - 1.0;
        let last = nodes - 1;
        let mut r: Vec<f64> = (0..nodes)
            .map(|i| {
                let xi = i as f64 / last as f64;
                if sigma < 1e-12 {
                    1.0 + span * xi
                } else {
                    1.0 + span * libm::expm1(sigma * xi) / libm::expm1(sigma)
                }
            })
            .collect();
        r[0] = 1.0;
        r[last] = outer_radius;
        Ok(Self { nodes: r, sigma })
    }

    /// Wraps explicit radii after validating the invariants.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes[0] != 1.0 {
            return Err(invalid("grid must start at r = 1 with at least 3 nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid radii must be strictly increasing"));
        }
        if !(nodes[nodes.len() - 1] > 2.0) {
            return Err(invalid("truncation radius must be > 2"));
        }
        Ok(Self {
            nodes,
            sigma: f64::NAN,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn outer_radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Index range of nodes with `lo ≤ r ≤ hi`.
    pub fn index_range(&self, lo: f64, hi: f64) -> core::ops::Range<usize> {
        let start = self.nodes.partition_point(|&r| r < lo);
        let end = self.nodes.partition_point(|&r| r <= hi);
        start..end.max(start)
    }

    /// Control-volume edges around node `i` (midpoints, clipped to the grid).
    fn cell(&self, i: usize) -> (f64, f64) {
        let n = self.nodes.len();
        let lo = if i == 0 {
            self.nodes[0]
        } else {
            0.5 * (self.nodes[i - 1] + self.nodes[i])
        };
        let hi = if i + 1 == n {
            self.nodes[n - 1]
        } else {
            0.5 * (self.nodes[i] + self.nodes[i + 1])
        };
        (lo, hi)
    }
}

/// Values of a radial function at the nodes of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("field length does not match grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial field"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: alloc::vec![0.0; n],
        }
    }

    /// Pointwise samples of `f` at the nodes.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Radial derivative at every node: second-order three-point formulas,
    /// centered in the interior and one-sided at both ends.
    pub fn gradient(&self) -> Vec<f64> {
        let r = self.grid.nodes();
        let u = &self.values;
        let n = r.len();
        let mut g = alloc::vec![0.0; n];
        g[0] = one_sided_derivative(r[0], r[1], r[2], u[0], u[1], u[2]);
        for i in 1..n - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            g[i] = (-hp / (hm * (hm + hp))) * u[i - 1]
                + ((hp - hm) / (hm * hp)) * u[i]
                + (hm / (hp * (hm + hp))) * u[i + 1];
        }
        // mirror of the left formula
        g[n - 1] = -one_sided_derivative(
            -r[n - 1],
            -r[n - 2],
            -r[n - 3],
            u[n - 1],
            u[n - 2],
            u[n - 3],
        );
        g
    }

    /// Linear interpolation at radius `r` (clamped to the grid).
    pub fn interpolate(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if r <= nodes[0] {
            return self.values[0];
        }
        if r >= nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = nodes.partition_point(|&x| x <= r);
        let (r0, r1) = (nodes[j - 1], nodes[j]);
        let w = (r - r0) / (r1 - r0);
        self.values[j - 1] * (1.0 - w) + self.values[j] * w
    }
}

/// Second-order one-sided `∂_r u` at `r0` from three nodes.
pub(crate) fn one_sided_derivative(r0: f64, r1: f64, r2: f64, u0: f64, u1: f64, u2: f64) -> f64 {
    let (c0, c1, c2) = one_sided_weights(r0, r1, r2);
    c0 * u0 + c1 * u1 + c2 * u2
}

pub(crate) fn one_sided_weights(r0: f64, r1: f64, r2: f64) -> (f64, f64, f64) {
    let h1 = r1 - r0;
    let h2 = r2 - r1;
    (
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
        (h1 + h2) / (h1 * h2),
        -h1 / (h2 * (h1 + h2)),
    )
}

/// `∂_r u(1)` of a field by the graded-grid one-sided stencil.
pub fn grad_s1_boundary(field: &RadialField) -> Result<f64> {
    let r = field.grid.nodes();
    if r.len() < 3 {
        return Err(invalid("grid too coarse for a boundary gradient"));
    }
    let u = field.values();
    Ok(one_sided_derivative(r[0], r[1], r[2], u[0], u[1], u[2]))
}

/// Radial initial data.
#[derive(Clone)]
pub enum RadialProfile {
    Zero,
    /// `A·r^{-p}`.
    Power {
        amplitude: f64,
        exponent: f64,
    },
    /// `A·r^{-p}·χ_{r > cutoff}`.
    TruncatedPower {
        amplitude: f64,
        exponent: f64,
        cutoff: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Zero => write!(f, "Zero"),
            RadialProfile::Power {
                amplitude,
                exponent,
            } => write!(f, "Power({amplitude}·r^-{exponent})"),
            RadialProfile::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => {
                write!(f, "TruncatedPower({amplitude}·r^-{exponent}·χ(r>{cutoff}))")
            }
            RadialProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl RadialProfile {
    /// `r^{-(N-2)}`, the harmonic profile that vanishes at infinity.
    pub fn harmonic(dim: usize) -> Self {
        RadialProfile::Power {
            amplitude: 1.0,
            exponent: dim as f64 - 2.0,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Power {
                amplitude,
                exponent,
            } => amplitude * libm::pow(r, -exponent),
            RadialProfile::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => {
                if r > *cutoff {
                    amplitude * libm::pow(r, -exponent)
                } else {
                    0.0
                }
            }
            RadialProfile::Custom(f) => f(r),
        }
    }

    /// Radii where the profile jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialProfile::TruncatedPower { cutoff, .. } => alloc::vec![*cutoff],
            _ => Vec::new(),
        }
    }

    /// Grid representation. A node whose control volume straddles a jump
    /// gets the `r^{N-1}`-weighted volume fraction of the jump, which keeps
    /// the discrete mass first-order exact in the jump location.
    pub fn sample(&self, grid: &Arc<RadialGrid>, dim: usize) -> Result<RadialField> {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| self.eval(r)).collect();
        if let RadialProfile::TruncatedPower { cutoff, .. } = self {
            let k = dim as f64;
            for (i, &r) in grid.nodes().iter().enumerate() {
                let (lo, hi) = grid.cell(i);
                if lo < *cutoff && *cutoff < hi {
                    let vol = |a: f64, b: f64| libm::pow(b, k) - libm::pow(a, k);
                    let frac = vol(*cutoff, hi) / vol(lo, hi);
                    let full = match self {
                        RadialProfile::TruncatedPower {
                            amplitude,
                            exponent,
                            ..
                        } => amplitude * libm::pow(r, -exponent),
                        _ => unreachable!(),
                    };
                    values[i] = frac * full;
                }
            }
        }
        RadialField::new(grid.clone(), values)
    }

    /// `sup_r r^{N-2}|φ(r)|` over the grid nodes.
    pub fn decay_constant(&self, grid: &RadialGrid, dim: usize) -> f64 {
        let p = dim as f64 - 2.0;
        grid.nodes()
            .iter()
            .fold(0.0, |m, &r| m.max(libm::pow(r, p) * self.eval(r).abs()))
    }
}
