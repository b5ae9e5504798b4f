//! Poisson kernel of the unit ball, its Kelvin transform onto the exterior,
//! the time-dilated kernel `𝒦(x, y, t) = K(eᵗx, y)` and `∂_t𝒦`.
//!
//! All evaluations are pure. Coincident points raise
//! [`Error::SingularEvaluation`] instead of returning infinity so callers
//! building quadratures have to deal with them explicitly.

use alloc::vec::Vec;

use crate::error::invalid;
use crate::numerics::sphere_area;
use crate::{Error, Result};

// Points closer than this (relative) are treated as coincident.
const COINCIDENCE_TOL: f64 = 1e-13;
// |x|² within this of 1 counts as lying on the sphere.
const SPHERE_TOL: f64 = 4.0 * f64::EPSILON;

/// A unit vector in `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    /// Wraps `coords` after checking the norm is 1 within `1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if (n - 1.0).abs() > 1e-12 {
            return Err(invalid("sphere point must have unit norm"));
        }
        Ok(Self(coords))
    }

    /// Normalizes `coords` onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(Self(coords))
    }

    /// Wraps coordinates already known to be unit-norm.
    pub(crate) fn from_unit(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A point of the closed exterior domain, `|x| ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorPoint(Vec<f64>);

impl ExteriorPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n2 = dot(&coords, &coords);
        if !n2.is_finite() || n2 < 1.0 - SPHERE_TOL {
            return Err(invalid("exterior point must satisfy |x| >= 1"));
        }
        Ok(Self(coords))
    }

    /// The point `(radius, 0, …, 0)`.
    pub fn on_axis(dim: usize, radius: f64) -> Result<Self> {
        let mut c = alloc::vec![0.0; dim];
        c[0] = radius;
        Self::new(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn radius(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Dimension together with the Poisson normalization `c_N = 1/|S^{N-1}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext {
    dim: usize,
    c_n: f64,
}

impl KernelContext {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            c_n: 1.0 / sphere_area(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    fn check_dims(&self, a: usize, b: usize) -> Result<()> {
        if a != self.dim || b != self.dim {
            return Err(invalid("point dimension does not match kernel context"));
        }
        Ok(())
    }

    /// `P(x, y) = c_N (1 - |x|²) / |x - y|^N` for `|x| ≤ 1`.
    pub fn poisson_kernel(&self, x: &[f64], y: &SpherePoint) -> Result<f64> {
        self.check_dims(x.len(), y.dim())?;
        let x2 = dot(x, x);
        if x2 > 1.0 + SPHERE_TOL {
            return Err(invalid("Poisson kernel needs |x| <= 1"));
        }
        self.poisson_unchecked(x, x2, y.coords())
    }

    fn poisson_unchecked(&self, x: &[f64], x2: f64, y: &[f64]) -> Result<f64> {
        let d2 = dist2(x, y);
        if d2 <= COINCIDENCE_TOL * COINCIDENCE_TOL {
            return Err(Error::SingularEvaluation("x coincides with y"));
        }
        let one_minus = 1.0 - x2;
        if one_minus.abs() <= SPHERE_TOL {
            return Ok(0.0);
        }
        Ok(self.c_n * one_minus / powi_half(d2, self.dim))
    }

    /// Kelvin transform of the Poisson kernel, `|x|^{-(N-2)} P(x/|x|², y)`.
    pub fn kelvin_kernel(&self, x: &ExteriorPoint, y: &SpherePoint) -> Result<f64> {
        self.check_dims(x.dim(), y.dim())?;
        self.kelvin_at(x.coords(), 1.0, y.coords())
    }

    /// `K(scale·x, y)` without materializing the scaled point.
    fn kelvin_at(&self, x: &[f64], scale: f64, y: &[f64]) -> Result<f64> {
        let r2 = scale * scale * dot(x, x);
        if r2 < 1.0 - SPHERE_TOL {
            return Err(invalid("Kelvin kernel needs |x| >= 1"));
        }
        // |X - y|² with X = scale·x, and |X|^N |z - y|^N = |X - y|^N for z = X/|X|².
        let d2 = r2 - 2.0 * scale * dot(x, y) + 1.0;
        if d2 <= COINCIDENCE_TOL * COINCIDENCE_TOL {
            return Err(Error::SingularEvaluation("x coincides with y"));
        }
        if (r2 - 1.0).abs() <= SPHERE_TOL {
            return Ok(0.0);
        }
        // |X|^{-(N-2)} c_N (1 - |X|^{-2}) |X|^N / |X - y|^N = c_N (|X|² - 1) / |X - y|^N
        Ok(self.c_n * (r2 - 1.0) / powi_half(d2, self.dim))
    }

    /// `𝒦(x, y, t) = K(eᵗx, y)`.
    pub fn evolving_kernel(&self, x: &ExteriorPoint, y: &SpherePoint, t: f64) -> Result<f64> {
        self.check_dims(x.dim(), y.dim())?;
        check_time(t)?;
        self.kelvin_at(x.coords(), libm::exp(t), y.coords())
    }

    /// `∂_t𝒦(x, y, t)` via the closed form
    /// `K(X, y)·[2 - N + 2/(|X|² - 1) + N(1 - X·y)/|X - y|²]`, `X = eᵗx`.
    pub fn dt_evolving_kernel(&self, x: &ExteriorPoint, y: &SpherePoint, t: f64) -> Result<f64> {
        self.check_dims(x.dim(), y.dim())?;
        check_time(t)?;
        let scale = libm::exp(t);
        let xs = x.coords();
        let r2 = scale * scale * dot(xs, xs);
        if r2 <= 1.0 + SPHERE_TOL {
            return Err(Error::SingularEvaluation(
                "dilated point lies on the sphere",
            ));
        }
        let xy = scale * dot(xs, y.coords());
        let d2 = r2 - 2.0 * xy + 1.0;
        let k = self.kelvin_at(xs, scale, y.coords())?;
        let n = self.dim as f64;
        Ok(k * (2.0 - n + 2.0 / (r2 - 1.0) + n * (1.0 - xy) / d2))
    }

    /// `∫_{S^{N-1}} 𝒦(x, y, t) dσ_y = (eᵗ|x|)^{-(N-2)}`.
    pub fn kernel_mass(&self, radius: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        if !(radius >= 1.0) {
            return Err(invalid("kernel mass needs |x| >= 1"));
        }
        Ok(libm::pow(libm::exp(t) * radius, -(self.dim as f64 - 2.0)))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("time must be finite and nonnegative"));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `d2^{n/2}`.
fn powi_half(d2: f64, n: usize) -> f64 {
    let d = libm::sqrt(d2);
    if n.is_multiple_of(2) {
        libm::pow(d2, (n / 2) as f64)
    } else {
        libm::pow(d2, (n / 2) as f64) * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn ctx(n: usize) -> KernelContext {
        KernelContext::new(n).unwrap()
    }

    fn e1(n: usize) -> SpherePoint {
        let mut c = alloc::vec![0.0; n];
        c[0] = 1.0;
        SpherePoint::new(c).unwrap()
    }

    #[test]
    fn poisson_at_origin_is_normalization() {
        let v = ctx(3).poisson_kernel(&[0.0, 0.0, 0.0], &e1(3)).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((v - 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn poisson_vanishes_on_sphere_away_from_pole() {
        let v = ctx(3).poisson_kernel(&[0.0, 1.0, 0.0], &e1(3)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn poisson_coincident_is_an_error() {
        let err = ctx(3).poisson_kernel(&[1.0, 0.0, 0.0], &e1(3)).unwrap_err();
        assert!(matches!(err, Error::SingularEvaluation(_)));
    }

    #[test]
    fn kelvin_hand_value() {
        // z = x/4, P(z, y) = (1/4π)(0.75/0.125), times |x|^{-1} = 1/2
        let x = ExteriorPoint::on_axis(3, 2.0).unwrap();
        let v = ctx(3).kelvin_kernel(&x, &e1(3)).unwrap();
        assert!((v - 3.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((v - 0.238732).abs() < 1e-6);
    }

    #[test]
    fn kelvin_zero_on_sphere_and_singular_at_pole() {
        let x = ExteriorPoint::new(alloc::vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(ctx(3).kelvin_kernel(&x, &e1(3)).unwrap(), 0.0);
        let x = ExteriorPoint::on_axis(3, 1.0).unwrap();
        assert!(matches!(
            ctx(3).kelvin_kernel(&x, &e1(3)),
            Err(Error::SingularEvaluation(_))
        ));
    }

    #[test]
    fn kernel_mass_values() {
        assert!((ctx(3).kernel_mass(2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ctx(5).kernel_mass(1.0, 0.0).unwrap(), 1.0);
        let v = ctx(4).kernel_mass(3.0, core::f64::consts::LN_2).unwrap();
        assert!((v - 1.0 / 36.0).abs() < 1e-15);
        assert!((v - 0.0277778).abs() < 1e-7);
    }

    #[test]
    fn dt_kernel_rejects_boundary_at_time_zero() {
        let x = ExteriorPoint::new(alloc::vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            ctx(3).dt_evolving_kernel(&x, &e1(3), 0.0),
            Err(Error::SingularEvaluation(_))
        ));
        // fine once the dilation moves it off the sphere
        assert!(ctx(3).dt_evolving_kernel(&x, &e1(3), 0.1).is_ok());
    }

    #[test]
    fn dt_kernel_matches_forward_difference() {
        let c = ctx(3);
        let x = ExteriorPoint::on_axis(3, 2.0).unwrap();
        let y = e1(3);
        let h = 1e-6;
        let fd =
            (c.evolving_kernel(&x, &y, h).unwrap() - c.evolving_kernel(&x, &y, 0.0).unwrap()) / h;
        let exact = c.dt_evolving_kernel(&x, &y, 0.0).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-4, "fd={fd} exact={exact}");
    }

    #[test]
    fn dt_kernel_matches_chain_rule_with_numerical_gradient() {
        // ∂_t𝒦 = X·∇K(X, y): gradient by centered differences in space.
        let c = ctx(4);
        let xc = alloc::vec![1.3, -0.4, 0.7, 0.2];
        let y = SpherePoint::normalized(alloc::vec![0.3, 0.5, -0.2, 0.9]).unwrap();
        let t = 0.3;
        let scale = libm::exp(t);
        let big: Vec<f64> = xc.iter().map(|v| v * scale).collect();
        let h = 1e-5;
        let mut chain = 0.0;
        for i in 0..4 {
            let mut p = big.clone();
            let mut m = big.clone();
            p[i] += h;
            m[i] -= h;
            let kp = c
                .kelvin_kernel(&ExteriorPoint::new(p).unwrap(), &y)
                .unwrap();
            let km = c
                .kelvin_kernel(&ExteriorPoint::new(m).unwrap(), &y)
                .unwrap();
            chain += big[i] * (kp - km) / (2.0 * h);
        }
        let closed = c
            .dt_evolving_kernel(&ExteriorPoint::new(xc).unwrap(), &y, t)
            .unwrap();
        assert!(
            ((chain - closed) / closed).abs() < 1e-7,
            "chain={chain} closed={closed}"
        );
    }

    #[test]
    fn evolving_kernel_at_zero_time_is_kelvin() {
        let c = ctx(3);
        let x = ExteriorPoint::new(alloc::vec![1.2, 0.5, -0.3]).unwrap();
        let y = SpherePoint::normalized(alloc::vec![0.1, 0.2, 0.9]).unwrap();
        assert_eq!(
            c.evolving_kernel(&x, &y, 0.0).unwrap(),
            c.kelvin_kernel(&x, &y).unwrap()
        );
    }

    #[test]
    fn dimension_two_is_rejected() {
        assert_eq!(
            KernelContext::new(2).unwrap_err(),
            Error::UnsupportedDimension(2)
        );
    }
}
