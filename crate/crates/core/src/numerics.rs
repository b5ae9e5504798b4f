//! Small numerical building blocks shared across modules: Gauss–Legendre
//! rules, adaptive Gauss–Kronrod integration, a tridiagonal solver and a
//! few special functions from `libm`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

pub use libm::{erf, erfc};

/// Surface area of the unit sphere `S^{N-1} ⊂ R^N`, `2π^{N/2} / Γ(N/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * libm::pow(PI, half) / libm::tgamma(half)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on the three-term recurrence, seeded with the usual
/// Chebyshev-like guess. Accurate to rounding for `n` up to a few thousand.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const GK_GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_KRONROD_WEIGHTS[7];
    let mut gauss = fc * GK_GAUSS_WEIGHTS[3];
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_KRONROD_WEIGHTS[j] * s;
        if j % 2 == 1 {
            gauss += GK_GAUSS_WEIGHTS[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `max(abs_tol, rel_tol·|I|)`. Integrable endpoint
/// singularities are tolerated because nodes never touch the endpoints.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::NonFinite("adaptive quadrature integrand"));
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailed {
                estimate: total,
                error: err,
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p.3 > best.1 {
                    (i, p.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let left = gk15(&mut f, lo, mid);
        let right = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, left.0, left.1));
        pieces.push((mid, hi, right.0, right.1));
        // Re-sum instead of updating incrementally to avoid drift.
        total = pieces.iter().map(|p| p.2).sum();
        err = pieces.iter().map(|p| p.3).sum();
    }
    Ok(total)
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i-1` (`lower[0]` unused), `upper[i]` to
/// `i+1` (last unused). `rhs` is overwritten with the solution. The
/// matrices assembled by the steppers are diagonally dominant, so no
/// pivoting is needed.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        if i + 1 < n {
            scratch[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let approx: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(deg as i32 - 1))
                .sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((approx - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate_adaptive(|s| 1.0 / libm::sqrt(s), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let v = integrate_adaptive(libm::exp, 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn thomas_solves_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
        let mut rhs = [1.0, 0.0, 1.0];
        let mut scratch = Vec::new();
        solve_tridiagonal(
            &[0.0, -1.0, -1.0],
            &[2.0, 2.0, 2.0],
            &[-1.0, -1.0, 0.0],
            &mut rhs,
            &mut scratch,
        );
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1.0, 1000.0, 4);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[3], 1000.0);
        assert!((v[1] - 10.0).abs() < 1e-12);
    }
}
