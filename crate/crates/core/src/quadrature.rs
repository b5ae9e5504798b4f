//! Product quadrature rules on `S^{N-1}`.
//!
//! `S^{d}` is built recursively from a polar angle and `S^{d-1}`:
//! `y = (cos θ, sin θ·y')`, `dσ_d = (1 - x²)^{(d-2)/2} dx dσ_{d-1}` with
//! `x = cos θ`. The circle uses a uniform azimuth rule; each polar layer is
//! a Gauss rule for its Gegenbauer weight, so the product rule integrates
//! polynomials in `y` exactly up to [`QuadratureRule::exactness`].

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::kernels::SpherePoint;
use crate::numerics::gauss_legendre;
use crate::{Error, Result};

const POLAR_NODES_PER_LEVEL: usize = 16;
const AZIMUTH_NODES_PER_LEVEL: usize = 32;

/// Nodes and positive weights on the unit sphere of `R^N`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    level: usize,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the product rule for `N ∈ {3, 4, 5}` at refinement `level ≥ 1`.
    pub fn build(dim: usize, level: usize) -> Result<Self> {
        if !(3..=5).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if level == 0 {
            return Err(crate::error::invalid("quadrature level must be >= 1"));
        }
        let (flat, weights) = sphere_rule(dim - 1, level);
        let nodes = flat
            .chunks_exact(dim)
            .map(|c| SpherePoint::from_unit(c.to_vec()))
            .collect();
        Ok(Self {
            dim,
            level,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &SpherePoint {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    /// Total polynomial degree integrated exactly (up to rounding).
    pub fn exactness(&self) -> usize {
        // the (1 - x²) factor for N = 5 costs two degrees
        let polar = 2 * POLAR_NODES_PER_LEVEL * self.level - if self.dim == 5 { 3 } else { 1 };
        let azimuth = AZIMUTH_NODES_PER_LEVEL * self.level - 1;
        polar.min(azimuth)
    }

    /// `Σ wᵢ f(yᵢ)`, propagating the first evaluation error.
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&SpherePoint) -> Result<f64>,
    {
        let mut acc = CompensatedSum::default();
        for (w, y) in self.weights.iter().zip(&self.nodes) {
            acc.add(w * f(y)?);
        }
        Ok(acc.value())
    }

    /// Like [`integrate`](Self::integrate) but with the raw coordinate slice.
    pub fn integrate_coords<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let mut acc = CompensatedSum::default();
        for (w, y) in self.weights.iter().zip(&self.nodes) {
            acc.add(w * f(y.coords())?);
        }
        Ok(acc.value())
    }
}

/// Neumaier summation; rules at high level have ~10⁵ terms.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Flat node array and weights for `S^d` (embedded in `R^{d+1}`).
fn sphere_rule(d: usize, level: usize) -> (Vec<f64>, Vec<f64>) {
    if d == 1 {
        let n = AZIMUTH_NODES_PER_LEVEL * level;
        let mut nodes = Vec::with_capacity(2 * n);
        let w = 2.0 * PI / n as f64;
        for k in 0..n {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            nodes.push(libm::cos(phi));
            nodes.push(libm::sin(phi));
        }
        return (nodes, alloc::vec![w; n]);
    }
    let (sub_nodes, sub_weights) = sphere_rule(d - 1, level);
    let polar = polar_rule(d, POLAR_NODES_PER_LEVEL * level);
    let mut nodes = Vec::with_capacity(polar.len() * sub_weights.len() * (d + 1));
    let mut weights = Vec::with_capacity(polar.len() * sub_weights.len());
    for &(c, s, wp) in &polar {
        for (j, &ws) in sub_weights.iter().enumerate() {
            nodes.push(c);
            nodes.extend(sub_nodes[j * d..(j + 1) * d].iter().map(|v| s * v));
            weights.push(wp * ws);
        }
    }
    (nodes, weights)
}

/// Gauss rule in `x = cos θ` for the weight `(1 - x²)^{(d-2)/2}` on
/// `[-1, 1]`, returned as `(cos θ, sin θ, weight)`. Even `d` multiplies a
/// Gauss–Legendre rule by the polynomial weight; odd `d` starts from the
/// Chebyshev rule of the second kind, which carries the half-integer power.
fn polar_rule(d: usize, n: usize) -> Vec<(f64, f64, f64)> {
    if d.is_multiple_of(2) {
        let (x, w) = gauss_legendre(n);
        x.iter()
            .zip(&w)
            .map(|(&x, &w)| {
                let s2 = 1.0 - x * x;
                (x, libm::sqrt(s2), w * libm::pow(s2, ((d - 2) / 2) as f64))
            })
            .collect()
    } else {
        let step = PI / (n + 1) as f64;
        (1..=n)
            .rev()
            .map(|k| {
                let theta = k as f64 * step;
                let (s, c) = (libm::sin(theta), libm::cos(theta));
                (c, s, step * s * s * libm::pow(s * s, ((d - 3) / 2) as f64))
            })
            .collect()
    }
}

/// Integrates `f` with rules of increasing level until two successive
/// values differ by less than `tol` (relative to the latest value, or
/// absolutely when it is tiny). Starts at `start_level`, doubles up to
/// `max_level`, and returns the finest value reached.
pub fn integrate_escalating<F>(
    dim: usize,
    start_level: usize,
    max_level: usize,
    tol: f64,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(&SpherePoint) -> Result<f64>,
{
    let mut level = start_level.max(1);
    let mut prev = QuadratureRule::build(dim, level)?.integrate(&mut f)?;
    while level * 2 <= max_level {
        level *= 2;
        let next = QuadratureRule::build(dim, level)?.integrate(&mut f)?;
        let diff = (next - prev).abs();
        prev = next;
        if diff < tol * next.abs().max(1.0) {
            break;
        }
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ExteriorPoint, KernelContext};
    use crate::numerics::sphere_area;

    #[test]
    fn weights_sum_to_area_and_nodes_are_unit() {
        for (dim, level) in [(3, 1), (4, 2), (5, 1)] {
            let rule = QuadratureRule::build(dim, level).unwrap();
            let total = rule.integrate_coords(|_| Ok(1.0)).unwrap();
            assert!(
                (total - sphere_area(dim)).abs() < 1e-12,
                "dim {dim}: {}",
                total - sphere_area(dim)
            );
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            for y in rule.nodes() {
                let n: f64 = y.coords().iter().map(|v| v * v).sum();
                assert!((n - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn integrates_constants_and_quadratics() {
        let rule = QuadratureRule::build(3, 1).unwrap();
        let one = rule.integrate_coords(|_| Ok(1.0)).unwrap();
        assert!((one - 4.0 * PI).abs() < 1e-12);
        let y1sq = rule.integrate_coords(|y| Ok(y[0] * y[0])).unwrap();
        assert!((y1sq - 4.0 * PI / 3.0).abs() < 1e-10);
        let rule4 = QuadratureRule::build(4, 2).unwrap();
        let one4 = rule4.integrate_coords(|_| Ok(1.0)).unwrap();
        assert!((one4 - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(rule.integrate_coords(|_| Ok(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn exactness_on_monomials() {
        // ∫ y_i^{2k} over S^{N-1} = |S^{N-1}| (2k-1)!! / (N (N+2) ... (N+2k-2))
        for dim in 3..=5 {
            let rule = QuadratureRule::build(dim, 1).unwrap();
            let area = sphere_area(dim);
            for k in 1..=rule.exactness() / 2 {
                let mut expect = area;
                for j in 0..k {
                    expect *= (2 * j + 1) as f64 / (dim + 2 * j) as f64;
                }
                for axis in 0..dim {
                    let got = rule
                        .integrate_coords(|y| Ok(libm::pow(y[axis], 2.0 * k as f64)))
                        .unwrap();
                    assert!(
                        (got - expect).abs() < 1e-10,
                        "dim {dim} k {k} axis {axis}: {got} vs {expect}"
                    );
                }
            }
            // odd moments vanish
            let odd = rule
                .integrate_coords(|y| Ok(y[0] * y[0] * y[dim - 1]))
                .unwrap();
            assert!(odd.abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_normalization() {
        let ctx = KernelContext::new(3).unwrap();
        let rule = QuadratureRule::build(3, 4).unwrap();
        for x in [[0.5, 0.0, 0.0], [0.3, 0.2, 0.1]] {
            let v = rule.integrate(|y| ctx.poisson_kernel(&x, y)).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "x={x:?}: {v}");
        }
    }

    #[test]
    fn kelvin_mass_at_radius_two() {
        let ctx = KernelContext::new(3).unwrap();
        let rule = QuadratureRule::build(3, 4).unwrap();
        let x = ExteriorPoint::on_axis(3, 2.0).unwrap();
        let v = rule.integrate(|y| ctx.kelvin_kernel(&x, y)).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(matches!(
            QuadratureRule::build(6, 1),
            Err(Error::UnsupportedDimension(6))
        ));
        assert!(QuadratureRule::build(3, 0).is_err());
    }

    #[test]
    fn errors_propagate_from_integrand() {
        let ctx = KernelContext::new(3).unwrap();
        let rule = QuadratureRule::build(3, 1).unwrap();
        let node = rule.node(0).coords().to_vec();
        let err = rule
            .integrate(|y| ctx.poisson_kernel(&node, y))
            .unwrap_err();
        assert!(matches!(err, Error::SingularEvaluation(_)));
    }
}
