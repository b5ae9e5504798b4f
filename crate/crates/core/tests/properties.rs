use std::sync::Arc;

use dynbc_core::analysis::{damped_convolution_sup, DampedConvolution};
use dynbc_core::fit::fit_loglog;
use dynbc_core::kernels::{ExteriorPoint, KernelContext, SpherePoint};
use dynbc_core::limit::{f1_apply, s2_apply, BoundaryDatum};
use dynbc_core::radial::{evolve_s1, HeatStepperConfig, RadialField, RadialGrid, RadialProfile};
use proptest::prelude::*;

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|c| c / n).collect())
}

/// Rotation by `angle` in the plane of coordinates `(i, j)`.
fn givens(v: &[f64], i: usize, j: usize, angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = v.to_vec();
    out[i] = c * v[i] - s * v[j];
    out[j] = s * v[i] + c * v[j];
    out
}

fn point_strategy() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64, f64)> {
    (3usize..=5).prop_flat_map(|dim| {
        (
            Just(dim),
            prop::collection::vec(-1.0..1.0f64, dim),
            prop::collection::vec(-1.0..1.0f64, dim),
            1.05..6.0f64,
            0.0..2.0f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolving_kernel_is_positive((dim, xd, yd, r, t) in point_strategy()) {
        let (Some(xu), Some(yu)) = (unit(&xd), unit(&yd)) else { return Ok(()) };
        let ctx = KernelContext::new(dim).unwrap();
        let x = ExteriorPoint::new(xu.iter().map(|c| r * c).collect()).unwrap();
        let y = SpherePoint::new(yu).unwrap();
        prop_assert!(ctx.evolving_kernel(&x, &y, t).unwrap() > 0.0);
    }

    #[test]
    fn evolving_kernel_is_rotation_invariant(
        (dim, xd, yd, r, t) in point_strategy(),
        angle in 0.0..std::f64::consts::TAU,
        plane in 0usize..3,
    ) {
        let (Some(xu), Some(yu)) = (unit(&xd), unit(&yd)) else { return Ok(()) };
        let ctx = KernelContext::new(dim).unwrap();
        let (i, j) = (plane, (plane + 1) % dim);
        let x: Vec<f64> = xu.iter().map(|c| r * c).collect();
        let k = ctx.evolving_kernel(&ExteriorPoint::new(x.clone()).unwrap(), &SpherePoint::new(yu.clone()).unwrap(), t).unwrap();
        let qx = ExteriorPoint::new(givens(&x, i, j, angle)).unwrap();
        let qy = SpherePoint::normalized(givens(&yu, i, j, angle)).unwrap();
        let kq = ctx.evolving_kernel(&qx, &qy, t).unwrap();
        prop_assert!((k - kq).abs() <= 1e-10 * k.abs().max(1.0), "{} vs {}", k, kq);
    }

    #[test]
    fn s2_of_bounded_data_obeys_the_mass_bound(
        dim in 3usize..=4,
        r in 1.5..4.0f64,
        t in 0.0..1.0f64,
        a in -1.0..1.0f64,
        b in -1.0..1.0f64,
    ) {
        let ctx = KernelContext::new(dim).unwrap();
        let psi = BoundaryDatum::Sampled(Arc::new(move |y: &SpherePoint| a * y.coords()[0] + b * y.coords()[1] * y.coords()[1]));
        let sup = a.abs() + b.abs();
        let x = ExteriorPoint::on_axis(dim, r).unwrap();
        let v = s2_apply(&ctx, &psi, &x, t).unwrap();
        let bound = sup * ctx.kernel_mass(r, t).unwrap();
        prop_assert!(v.abs() <= bound * (1.0 + 1e-9) + 1e-14, "{} > {}", v, bound);
    }

    #[test]
    fn f1_is_the_time_derivative_of_s2(dim in 3usize..=4, r in 1.5..4.0f64, t in 0.05..1.0f64, a in -1.0..1.0f64) {
        let ctx = KernelContext::new(dim).unwrap();
        let psi = BoundaryDatum::Sampled(Arc::new(move |y: &SpherePoint| 1.0 + a * y.coords()[0]));
        let x = ExteriorPoint::on_axis(dim, r).unwrap();
        let h = 1e-4;
        let fd = (s2_apply(&ctx, &psi, &x, t + h).unwrap() - s2_apply(&ctx, &psi, &x, t - h).unwrap()) / (2.0 * h);
        let f1 = f1_apply(&ctx, &psi, &x, t).unwrap();
        prop_assert!((fd - f1).abs() <= 1e-6 * f1.abs().max(1e-3), "{} vs {}", fd, f1);
    }

    #[test]
    fn constant_data_follow_the_mass_law(dim in 3usize..=5, r in 1.0..10.0f64, t in 0.0..3.0f64, c in -2.0..2.0f64) {
        let ctx = KernelContext::new(dim).unwrap();
        let x = ExteriorPoint::on_axis(dim, r).unwrap();
        let v = s2_apply(&ctx, &BoundaryDatum::Constant(c), &x, t).unwrap();
        let expected = c * ctx.kernel_mass(r, t).unwrap();
        prop_assert!((v - expected).abs() <= 1e-14 * expected.abs().max(1e-300));
        let f1 = f1_apply(&ctx, &BoundaryDatum::Constant(c), &ExteriorPoint::on_axis(dim, r.max(1.01)).unwrap(), t).unwrap();
        prop_assert!(f1.abs() <= (dim as f64 - 2.0) * c.abs() * ctx.kernel_mass(r.max(1.01), t).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn power_laws_are_recovered(slope in -2.0..2.0f64, scale in 0.01..100.0f64) {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| {
            let e = 0.1 * 0.5f64.powi(k);
            (e, scale * e.powf(slope))
        }).collect();
        let fit = fit_loglog(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!(fit.residual < 1e-10);
    }

    #[test]
    fn damped_supremum_decreases_in_l(a in 0.0..0.45f64, b in 0.0..0.45f64, l in 0.5..50.0f64) {
        let p = DampedConvolution::new(a, b, 1.0, 1.0, 0.1).unwrap();
        prop_assert!(damped_convolution_sup(&p, 2.0 * l).unwrap() <= damped_convolution_sup(&p, l).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn heat_flow_is_linear_and_order_preserving(dim in 3usize..=5, a in 0.1..3.0f64, cut in 1.2..3.0f64, t in 0.05..2.0f64) {
        let grid = Arc::new(RadialGrid::graded(20.0, 300, 3.0).unwrap());
        let cfg = HeatStepperConfig::default();
        let phi = RadialProfile::TruncatedPower { amplitude: 1.0, exponent: dim as f64 - 2.0, cutoff: cut }.sample(&grid, dim).unwrap();
        let scaled = RadialField::new(grid.clone(), phi.values().iter().map(|v| a * v).collect()).unwrap();
        let u = evolve_s1(&phi, t, dim, &cfg).unwrap();
        let ua = evolve_s1(&scaled, t, dim, &cfg).unwrap();
        let top = phi.sup_norm();
        for (x, y) in u.values().iter().zip(ua.values()) {
            prop_assert!((a * x - y).abs() <= 1e-12 * a.max(1.0));
            prop_assert!(*x >= -1e-10 && *x <= top + 1e-10);
        }
    }
}
