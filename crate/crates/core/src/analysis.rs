//! Numerical checks of auxiliary estimates: the weight `h`, the
//! exponentially damped convolution supremum and its threshold `L_*`, the
//! shape of the `F₂` bound, and the long-time decay of `S₁`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dynbc::ProblemSpec;
use crate::error::invalid;
use crate::fit::{fit_loglog, LogLogFit};
use crate::numerics::{integrate_adaptive, logspace};
use crate::picard::{f2_radial, x_norm, PicardConfig, VWPair};
use crate::radial::{evolve_s1_sampled, HeatStepperConfig, RadialGrid, RadialProfile};
use crate::{Error, Result};

/// `max(1, t^{-1/2})`.
pub fn h_weight(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("h needs t > 0"));
    }
    Ok(libm::sqrt(1.0 / t).max(1.0))
}

/// Exponents and targets of
/// `sup_{0<t<T} e^{-Lt} t^γ ∫₀ᵗ e^{Ls} s^{-a}(t-s)^{-b} ds ≤ δ`.
///
/// In the `F₂` estimate the integrand comes from
/// `I(s, τ) = s^{-1/2}[τ^{-(α-1)/2} + s^β τ^{-d} + s^β τ^{-(α-1+β)/2}]`
/// with `d = (α-1)/2` for `N ≥ 4` and `d = 3/8` for `N = 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedConvolution {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub delta: f64,
}

impl DampedConvolution {
    pub fn new(a: f64, b: f64, gamma: f64, horizon: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) || !(a + b < 1.0) {
            return Err(invalid("need 0 <= a, b < 1 and a + b < 1"));
        }
        if !(gamma >= 0.0) || !(horizon > 0.0) || !(delta > 0.0) {
            return Err(invalid("need gamma >= 0, T > 0, delta > 0"));
        }
        Ok(Self {
            a,
            b,
            gamma,
            horizon,
            delta,
        })
    }
}

/// `t^γ ∫₀ᵗ e^{-L(t-s)} s^{-a}(t-s)^{-b} ds`.
///
/// Split at `t/2`; the left half uses `u = s^{1-a}` and the right half
/// `u = (t-s)^{1-b}`, which turn both endpoint singularities into smooth
/// integrands.
pub fn damped_convolution(p: &DampedConvolution, l: f64, t: f64) -> Result<f64> {
    let (a, b) = (p.a, p.b);
    let half = 0.5 * t;
    let ea = 1.0 / (1.0 - a);
    let eb = 1.0 / (1.0 - b);
    let left = integrate_adaptive(
        |u| {
            let s = libm::pow(u, ea);
            libm::exp(-l * (t - s)) * libm::pow(t - s, -b) * ea
        },
        0.0,
        libm::pow(half, 1.0 - a),
        1e-15,
        1e-11,
    )?;
    let right = integrate_adaptive(
        |u| {
            let r = libm::pow(u, eb);
            libm::exp(-l * r) * libm::pow(t - r, -a) * eb
        },
        0.0,
        libm::pow(half, 1.0 - b),
        1e-15,
        1e-11,
    )?;
    Ok(libm::pow(t, p.gamma) * (left + right))
}

/// Supremum over 200 log-spaced times in `[T·10⁻⁸, T]`.
pub fn damped_convolution_sup(p: &DampedConvolution, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(invalid("L must be positive"));
    }
    let mut sup: f64 = 0.0;
    for t in logspace(p.horizon * 1e-8, p.horizon, 200) {
        sup = sup.max(damped_convolution(p, l, t)?);
    }
    Ok(sup)
}

/// Result of the doubling search for `L_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LStar {
    pub l_star: f64,
    /// `(L, sup)` for every probed `L`, including the check at `2L_*`.
    pub trace: Vec<(f64, f64)>,
}

impl LStar {
    /// Whether the probed suprema never increase by more than `slack`.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.trace.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// Doubles `L` from 1 until the supremum is at most `δ` at both `L` and
/// `2L`; fails past `2²⁰`.
pub fn find_l_star(p: &DampedConvolution) -> Result<LStar> {
    let mut trace = Vec::new();
    let mut l = 1.0;
    let mut prev = damped_convolution_sup(p, l)?;
    trace.push((l, prev));
    while l <= libm::pow(2.0, 20.0) {
        let next = damped_convolution_sup(p, 2.0 * l)?;
        trace.push((2.0 * l, next));
        if prev <= p.delta && next <= p.delta {
            return Ok(LStar { l_star: l, trace });
        }
        l *= 2.0;
        prev = next;
    }
    Err(Error::SearchExhausted { trace })
}

/// Empirical ratio of `|F₂[v]|` to the shape
/// `(t/ε)^{-1/2} e^{Lt} r^{-(N-2)} (1 + r(t/(r-1))^β) ‖v‖_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct F2BoundReport {
    pub max_ratio: f64,
    pub argmax: (f64, f64),
    pub samples: usize,
}

/// Evaluates the ratio on `radii × times`; radii must exceed 1 and times
/// must lie in `(0, T]`.
pub fn f2_bound_check(
    spec: &ProblemSpec,
    pair: &VWPair,
    cfg: &PicardConfig,
    beta: f64,
    radii: &[f64],
    times: &[f64],
) -> Result<F2BoundReport> {
    let upper = if spec.dim() == 3 {
        0.25
    } else {
        ((cfg.alpha - 1.0) / spec.dim() as f64).min(2.0 - cfg.alpha)
    };
    if !(beta > 0.0 && beta < upper) {
        return Err(invalid("beta outside its admissible range"));
    }
    let eps = spec.epsilon();
    let p = spec.dim() as f64 - 2.0;
    let norm = x_norm(&pair.v, cfg, eps);
    let mut best = (0.0, (0.0, 0.0));
    for &t in times {
        for &r in radii {
            if !(r > 1.0 && t > 0.0) {
                return Err(invalid("samples need r > 1 and t > 0"));
            }
            let f2 = f2_radial(spec.dim(), &pair.flux, r, t)?;
            if norm == 0.0 {
                continue;
            }
            let shape = libm::pow(t / eps, -0.5)
                * libm::exp(cfg.l * t)
                * libm::pow(r, -p)
                * (1.0 + r * libm::pow(t / (r - 1.0), beta))
                * norm;
            let ratio = f2.abs() / shape;
            if ratio > best.0 {
                best = (ratio, (r, t));
            }
        }
    }
    Ok(F2BoundReport {
        max_ratio: best.0,
        argmax: best.1,
        samples: radii.len() * times.len(),
    })
}

/// Fits `sup |S₁(t) r^{-γ}| ≈ C(1+t)^{slope}` over `times`.
pub fn g2_decay(dim: usize, gamma: f64, times: &[f64], nodes: usize) -> Result<LogLogFit> {
    if times.len() < 2 {
        return Err(invalid("need at least two times"));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let grid = Arc::new(RadialGrid::graded(
        1.0 + 8.0 * libm::sqrt(t_max),
        nodes,
        3.0,
    )?);
    let phi = RadialProfile::Power {
        amplitude: 1.0,
        exponent: gamma,
    }
    .sample(&grid, dim)?;
    let cfg = HeatStepperConfig {
        dt_initial: 1e-5,
        dt_growth: 1.05,
        ..Default::default()
    };
    let snaps = evolve_s1_sampled(&phi, times, dim, &cfg)?;
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(&snaps)
        .map(|(&t, s)| (1.0 + t, s.sup_norm()))
        .collect();
    fit_loglog(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_examples() {
        assert_eq!(h_weight(1.0).unwrap(), 1.0);
        assert_eq!(h_weight(4.0).unwrap(), 1.0);
        assert!((h_weight(0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!(h_weight(0.0).is_err());
    }

    #[test]
    fn closed_form_supremum() {
        let p = DampedConvolution::new(0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let v = damped_convolution_sup(&p, 1.0).unwrap();
        assert!((v - (1.0 - libm::exp(-1.0))).abs() < 1e-8, "{v}");
    }

    #[test]
    fn singular_integrand_matches_beta_function() {
        // L → 0: ∫₀ᵗ s^{-a}(t-s)^{-b} ds = t^{1-a-b} B(1-a, 1-b); B(3/4, 3/4) = Γ(3/4)²/Γ(3/2)
        let p = DampedConvolution::new(0.25, 0.25, 0.0, 1.0, 1.0).unwrap();
        let g = libm::tgamma(0.75);
        let beta = g * g / libm::tgamma(1.5);
        let v = damped_convolution(&p, 1e-14, 1.0).unwrap();
        assert!((v - beta).abs() < 1e-9, "{v} vs {beta}");
    }

    #[test]
    fn supremum_decreases_in_l_and_respects_gamma() {
        let p = DampedConvolution::new(0.25, 0.25, 1.0, 1.0, 0.1).unwrap();
        assert!(
            damped_convolution_sup(&p, 1.0).unwrap() > damped_convolution_sup(&p, 64.0).unwrap()
        );
        let p3 = DampedConvolution { gamma: 3.0, ..p };
        let p0 = DampedConvolution { gamma: 0.0, ..p };
        assert!(
            damped_convolution_sup(&p3, 4.0).unwrap() <= damped_convolution_sup(&p0, 4.0).unwrap()
        );
    }

    #[test]
    fn l_star_examples() {
        let p = DampedConvolution::new(0.25, 0.25, 1.0, 1.0, 1e3).unwrap();
        assert_eq!(find_l_star(&p).unwrap().l_star, 1.0);
        let p = DampedConvolution { delta: 0.1, ..p };
        let found = find_l_star(&p).unwrap();
        assert!(damped_convolution_sup(&p, found.l_star).unwrap() <= 0.1);
        assert!(found.is_nonincreasing(1e-10));
        let tighter = find_l_star(&DampedConvolution { delta: 0.01, ..p }).unwrap();
        assert!(tighter.l_star >= found.l_star);
        assert_eq!(find_l_star(&p).unwrap(), found);
    }

    #[test]
    fn parameter_validation() {
        assert!(DampedConvolution::new(0.5, 0.5, 0.0, 1.0, 1.0).is_err());
        assert!(DampedConvolution::new(-0.1, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(DampedConvolution::new(0.1, 0.1, 0.0, 0.0, 1.0).is_err());
    }
}
