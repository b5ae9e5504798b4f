//! The limit semigroup `[S₂(t)ψ](x) = ∫ 𝒦(x, y, t) ψ(y) dσ_y` and the
//! forcing `F₁[ψ](x, t) = ∫ ∂_t𝒦(x, y, t) ψ(y) dσ_y`.
//!
//! Constant data use the exact mass law `∫𝒦 dσ = (eᵗ|x|)^{-(N-2)}`;
//! sampled data go through spherical quadrature.

use alloc::sync::Arc;
use core::fmt;

use crate::error::invalid;
use crate::kernels::{ExteriorPoint, KernelContext, SpherePoint};
use crate::quadrature::{integrate_escalating, QuadratureRule};
use crate::Result;

/// Boundary data on the unit sphere.
#[derive(Clone)]
pub enum BoundaryDatum {
    Constant(f64),
    Sampled(Arc<dyn Fn(&SpherePoint) -> f64 + Send + Sync>),
}

impl fmt::Debug for BoundaryDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryDatum::Constant(v) => write!(f, "Constant({v})"),
            BoundaryDatum::Sampled(_) => write!(f, "Sampled(..)"),
        }
    }
}

/// How sampled data are integrated.
///
/// Points whose dilation `eᵗ|x|` is closer to the sphere than
/// `near_radius` get level doubling from `base_level` until successive
/// values agree to `tol`, capped at `max_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePolicy {
    pub base_level: usize,
    pub max_level: usize,
    pub near_radius: f64,
    pub tol: f64,
}

impl QuadraturePolicy {
    pub fn for_dim(dim: usize) -> Self {
        let max_level = match dim {
            3 => 32,
            4 => 8,
            _ => 4,
        };
        Self {
            base_level: if dim == 3 { 4 } else { 2 },
            max_level,
            near_radius: 1.1,
            tol: 1e-7,
        }
    }
}

/// `ψ₀·(eᵗr)^{-(N-2)}`, the exact `S₂(t)` of a constant.
pub fn s2_constant(dim: usize, value: f64, r: f64, t: f64) -> f64 {
    value * libm::pow(libm::exp(t) * r, -(dim as f64 - 2.0))
}

/// `-(N-2)ψ₀ e^{-(N-2)t} r^{-(N-2)}`, the exact `F₁` of a constant.
pub fn f1_constant(dim: usize, value: f64, r: f64, t: f64) -> f64 {
    -(dim as f64 - 2.0) * s2_constant(dim, value, r, t)
}

fn integrate_kernel<F>(
    ctx: &KernelContext,
    policy: &QuadraturePolicy,
    dilated: f64,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(&SpherePoint) -> Result<f64>,
{
    if dilated < policy.near_radius {
        integrate_escalating(
            ctx.dim(),
            policy.base_level,
            policy.max_level,
            policy.tol,
            f,
        )
    } else {
        QuadratureRule::build(ctx.dim(), policy.base_level)?.integrate(&mut f)
    }
}

/// `[S₂(t)ψ](x)`.
pub fn s2_apply(
    ctx: &KernelContext,
    psi: &BoundaryDatum,
    x: &ExteriorPoint,
    t: f64,
) -> Result<f64> {
    s2_apply_with(ctx, psi, x, t, &QuadraturePolicy::for_dim(ctx.dim()))
}

pub fn s2_apply_with(
    ctx: &KernelContext,
    psi: &BoundaryDatum,
    x: &ExteriorPoint,
    t: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("time must be nonnegative"));
    }
    match psi {
        BoundaryDatum::Constant(v) => Ok(s2_constant(ctx.dim(), *v, x.radius(), t)),
        BoundaryDatum::Sampled(f) => {
            let dilated = libm::exp(t) * x.radius();
            integrate_kernel(ctx, policy, dilated, |y| {
                Ok(ctx.evolving_kernel(x, y, t)? * f(y))
            })
        }
    }
}

/// `F₁[ψ](x, t)`, requiring `eᵗ|x| > 1`.
pub fn f1_apply(
    ctx: &KernelContext,
    psi: &BoundaryDatum,
    x: &ExteriorPoint,
    t: f64,
) -> Result<f64> {
    f1_apply_with(ctx, psi, x, t, &QuadraturePolicy::for_dim(ctx.dim()))
}

pub fn f1_apply_with(
    ctx: &KernelContext,
    psi: &BoundaryDatum,
    x: &ExteriorPoint,
    t: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    let dilated = libm::exp(t) * x.radius();
    if !(dilated > 1.0) {
        return Err(crate::Error::SingularEvaluation("F1 needs e^t|x| > 1"));
    }
    match psi {
        BoundaryDatum::Constant(v) => Ok(f1_constant(ctx.dim(), *v, x.radius(), t)),
        BoundaryDatum::Sampled(f) => integrate_kernel(ctx, policy, dilated, |y| {
            Ok(ctx.dt_evolving_kernel(x, y, t)? * f(y))
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx3() -> KernelContext {
        KernelContext::new(3).unwrap()
    }

    #[test]
    fn constant_closed_forms() {
        let x = ExteriorPoint::on_axis(3, 2.0).unwrap();
        let v = s2_apply(&ctx3(), &BoundaryDatum::Constant(1.0), &x, 1.0).unwrap();
        assert!((v - libm::exp(-1.0) / 2.0).abs() < 1e-15);
        assert!((v - 0.1839397).abs() < 1e-7);
        assert_eq!(
            s2_apply(&ctx3(), &BoundaryDatum::Constant(0.0), &x, 1.0).unwrap(),
            0.0
        );
        let f = f1_apply(&ctx3(), &BoundaryDatum::Constant(1.0), &x, 1e-12).unwrap();
        assert!((f + 0.5).abs() < 1e-10);
        assert_eq!(
            f1_apply(&ctx3(), &BoundaryDatum::Constant(0.0), &x, 0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn sampled_unit_matches_constant() {
        let x = ExteriorPoint::on_axis(3, 2.0).unwrap();
        let one = BoundaryDatum::Sampled(Arc::new(|_| 1.0));
        let q = s2_apply(&ctx3(), &one, &x, 0.5).unwrap();
        let c = s2_apply(&ctx3(), &BoundaryDatum::Constant(1.0), &x, 0.5).unwrap();
        assert!((q - c).abs() < 1e-6, "{q} vs {c}");
        let q = f1_apply(&ctx3(), &one, &x, 0.5).unwrap();
        let c = f1_apply(&ctx3(), &BoundaryDatum::Constant(1.0), &x, 0.5).unwrap();
        assert!((q - c).abs() < 1e-6, "{q} vs {c}");
    }

    #[test]
    fn f1_needs_dilation_off_sphere() {
        let x = ExteriorPoint::on_axis(3, 1.0).unwrap();
        assert!(f1_apply(&ctx3(), &BoundaryDatum::Constant(1.0), &x, 0.0).is_err());
    }
}
