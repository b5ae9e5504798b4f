//! Epsilon sweeps: one solve per ladder entry, a log-log fit, Richardson
//! checks at the two extreme entries, and the report.

use std::fmt;
use std::str::FromStr;

use dynbc_core::dynbc::{
    error_vs_limit, solve_dynbc, solve_window, ProblemSpec, Resolution, TimeScale,
};
use dynbc_core::fit::{fit_loglog, leave_largest_out};
use dynbc_core::lower_bound::{lower_point, LowerBoundSpec, LowerPoint};
use dynbc_core::picard::{
    d_eps, find_contraction_weight, picard_solve, Discretization, PicardConfig,
};
use dynbc_core::radial::RadialProfile;
use rayon::prelude::*;

use crate::config::echo;
use crate::error::LabError;
use crate::report::{Band, FitSummary, Lattice, RatePoint, RateReport, RichardsonCheck};

/// Relative shift of the functional that raises a Richardson flag.
pub const RICHARDSON_SHIFT: f64 = 0.2;
/// Leave-one-out slope change tolerated by a passing sweep.
pub const LEAVE_ONE_OUT: f64 = 0.08;
/// Largest relative Picard/direct discrepancy accepted.
pub const XVAL_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// `φ = r^{-(N-2)}`, `φ_b = 1`; sup error against the limit.
    UpperRate,
    /// `φ = r^{-(N-2)}χ_{r>2}`, `φ_b = 0`; infimum of `u_ε`.
    LowerRate,
    /// `‖D_ε[1](t₁)‖_∞`.
    DEpsScaling,
    /// Picard `v + w` against the direct solver.
    PicardXval,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::UpperRate,
        Scenario::LowerRate,
        Scenario::DEpsScaling,
        Scenario::PicardXval,
    ];

    fn name(self) -> &'static str {
        match self {
            Scenario::UpperRate => "upper_rate",
            Scenario::LowerRate => "lower_rate",
            Scenario::DEpsScaling => "d_eps_scaling",
            Scenario::PicardXval => "picard_xval",
        }
    }

    fn functional(self) -> &'static str {
        match self {
            Scenario::UpperRate => "sup |u_eps - S2(t) phi_b| over K_r x window",
            Scenario::LowerRate => "inf u_eps over K_r x window",
            Scenario::DEpsScaling => "sup_r |D_eps[1](t1)|",
            Scenario::PicardXval => "sup |v + w - u_eps| / sup |u_eps| over all nodes x window",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown scenario `{s}`")))
    }
}

/// Resolution presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tier {
    Smoke,
    #[default]
    Standard,
    Thorough,
}

impl Tier {
    pub fn resolution(self) -> Resolution {
        let base = Resolution::default();
        match self {
            Tier::Smoke => Resolution {
                nodes: 500,
                dt_max: 0.02,
                ..base
            },
            Tier::Standard => base,
            Tier::Thorough => Resolution {
                nodes: 4000,
                dt_max: 0.005,
                ..base
            },
        }
    }

    /// `0.1·2^{-k}` for `k = 0..=4`, or `0..=6` on the thorough tier.
    pub fn ladder(self) -> Vec<f64> {
        let depth = if self == Tier::Thorough { 6 } else { 4 };
        (0..=depth).map(|k| 0.1 * 0.5f64.powi(k)).collect()
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Smoke => "smoke",
            Tier::Standard => "standard",
            Tier::Thorough => "thorough",
        })
    }
}

impl FromStr for Tier {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "smoke" => Ok(Tier::Smoke),
            "standard" => Ok(Tier::Standard),
            "thorough" => Ok(Tier::Thorough),
            _ => Err(LabError::Config(format!("unknown tier `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub dim: usize,
    /// Strictly decreasing values in `(0, 1)`.
    pub ladder: Vec<f64>,
    pub k_r: (f64, f64),
    pub t_window: (f64, f64),
    pub tier: Tier,
    pub resolution: Resolution,
    pub workers: usize,
}

impl SweepConfig {
    /// The tier's resolution and ladder with `K_r = [1.5, 2]`, `t ∈ [1, 2]`.
    pub fn new(scenario: Scenario, dim: usize, tier: Tier) -> Self {
        Self {
            scenario,
            dim,
            ladder: tier.ladder(),
            k_r: (1.5, 2.0),
            t_window: (1.0, 2.0),
            tier,
            resolution: tier.resolution(),
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.dim < 3 {
            return bad("dim must be at least 3");
        }
        if self.ladder.len() < 4 {
            return bad("epsilon_ladder needs at least four entries");
        }
        if self.ladder.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad("epsilon_ladder entries must lie in (0, 1)");
        }
        if self.ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("epsilon_ladder must be strictly decreasing");
        }
        if self.ladder[0] / self.ladder[self.ladder.len() - 1] < 16.0 * (1.0 - 1e-12) {
            return bad("epsilon_ladder must span at least a factor of 16");
        }
        let (k0, k1) = self.k_r;
        if !(k0 > 1.0 && k1 >= k0 && k1.is_finite()) {
            return bad("K_r must satisfy 1 < K_r_min <= K_r_max");
        }
        let (t1, t2) = self.t_window;
        if !(t1 > 0.0 && t2 >= t1 && t2.is_finite()) {
            return bad("time window must satisfy 0 < t1 <= t2");
        }
        let res = &self.resolution;
        if res.nodes < 10 {
            return bad("grid_nodes must be at least 10");
        }
        if !(res.sigma >= 1.0 && res.sigma.is_finite()) {
            return bad("grading_sigma must be at least 1");
        }
        if !(0.5..=1.0).contains(&res.theta) {
            return bad("theta must lie in [0.5, 1]");
        }
        if !(1.0..=1.2).contains(&res.dt_growth) {
            return bad("dt_growth must lie in [1, 1.2]");
        }
        if !(res.dt0_factor > 0.0 && res.dt0_factor.is_finite()) {
            return bad("dt0_factor must be positive");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }

    /// Final time of every solve.
    pub fn horizon(&self) -> f64 {
        match self.scenario {
            Scenario::DEpsScaling => self.t_window.0,
            _ => self.t_window.1,
        }
    }

    pub fn expected_band(&self) -> Option<Band> {
        let half = self.dim as f64 / 2.0 - 1.0;
        match self.scenario {
            Scenario::UpperRate => Some(Band {
                lo: 0.45 * upper_exponent(self.dim) / 0.5,
                hi: f64::MAX,
            }),
            Scenario::LowerRate => Some(if self.dim == 3 {
                Band { lo: 0.4, hi: 0.6 }
            } else {
                Band {
                    lo: half - 0.15,
                    hi: half + 0.15,
                }
            }),
            Scenario::DEpsScaling => Some(Band { lo: 0.4, hi: 0.6 }),
            Scenario::PicardXval => None,
        }
    }
}

/// `α/2`: `1/2` for `N = 3`, `3/4` with the default `α = 3/2` otherwise.
fn upper_exponent(dim: usize) -> f64 {
    dynbc_core::picard::default_alpha(dim) / 2.0
}

/// One evaluated ladder entry.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub value: f64,
    pub margin: Option<f64>,
    pub estimate: Option<f64>,
}

fn upper_problem(dim: usize, eps: f64) -> Result<ProblemSpec, LabError> {
    Ok(ProblemSpec::new(
        dim,
        eps,
        RadialProfile::harmonic(dim),
        1.0,
    )?)
}

fn lower_spec(cfg: &SweepConfig) -> Result<LowerBoundSpec, LabError> {
    Ok(LowerBoundSpec::new(cfg.dim, 2.0, cfg.k_r, cfg.t_window)?)
}

/// `max |u_h - u_ref|` over matching snapshots, with `u_ref` interpolated
/// to the coarse nodes.
pub fn richardson_estimate(coarse: &LowerPoint, fine: &LowerPoint) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, b) in coarse.trajectory.states.iter().zip(&fine.trajectory.states) {
        for (&r, &u) in a.interior.grid().nodes().iter().zip(a.interior.values()) {
            worst = worst.max((u - b.interior.interpolate(r)).abs());
        }
    }
    worst
}

/// The scenario functional at one `ε`.
pub fn evaluate(cfg: &SweepConfig, eps: f64, res: &Resolution) -> Result<f64, LabError> {
    match cfg.scenario {
        Scenario::UpperRate => {
            let spec = upper_problem(cfg.dim, eps)?;
            let traj = solve_window(&spec, cfg.t_window, res)?;
            Ok(error_vs_limit(&traj, &spec, cfg.k_r, cfg.t_window)?)
        }
        Scenario::LowerRate => Ok(lower_point(&lower_spec(cfg)?, eps, res)?.inf_u),
        Scenario::DEpsScaling => {
            let spec = ProblemSpec::new(cfg.dim, eps, RadialProfile::Zero, 0.0)?;
            let t = cfg.t_window.0;
            let disc = Discretization::from_resolution(res, eps, t, &[])?;
            Ok(d_eps(&spec, 1.0, t, &disc)?.sup_norm())
        }
        Scenario::PicardXval => {
            picard_discrepancy(cfg.dim, eps, cfg.t_window, res).map(|x| x.discrepancy)
        }
    }
}

fn evaluate_point(cfg: &SweepConfig, eps: f64) -> Result<PointEval, LabError> {
    let res = &cfg.resolution;
    if cfg.scenario != Scenario::LowerRate {
        return Ok(PointEval {
            value: evaluate(cfg, eps, res)?,
            margin: None,
            estimate: None,
        });
    }
    let spec = lower_spec(cfg)?;
    let coarse = lower_point(&spec, eps, res)?;
    let fine = lower_point(&spec, eps, &res.refined_space().refined_time())?;
    Ok(PointEval {
        value: coarse.inf_u,
        margin: Some(coarse.comparison_margin),
        estimate: Some(richardson_estimate(&coarse, &fine)),
    })
}

/// Outcome of one Picard cross-validation.
#[derive(Debug, Clone)]
pub struct XvalOutcome {
    pub discrepancy: f64,
    pub contraction: f64,
    pub l: f64,
    pub iterations: usize,
}

/// Runs Picard with the auto-selected weight and compares `v + w` with the
/// direct solver on the same grid and mesh over `window`.
pub fn picard_discrepancy(
    dim: usize,
    eps: f64,
    window: (f64, f64),
    res: &Resolution,
) -> Result<XvalOutcome, LabError> {
    let (t1, t2) = window;
    let spec = upper_problem(dim, eps)?;
    let disc = Discretization::from_resolution(res, eps, t2, &[t1])?;
    let mut pc = PicardConfig::new(dim, t2);
    let cert = find_contraction_weight(&spec, &pc, &disc)?;
    pc.l = cert.l;
    let pair = picard_solve(&spec, &pc, &disc)?;
    let k1 = disc
        .mesh()
        .index_of(t1)
        .ok_or_else(|| LabError::Config("t1 is not on the mesh".into()))?;
    let samples = disc.mesh().times()[k1..].to_vec();
    let direct = solve_dynbc(
        &spec,
        t2,
        &samples,
        disc.grid(),
        disc.stepper(),
        TimeScale::Physical,
    )?;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (j, state) in direct.states.iter().enumerate() {
        let u = pair.u_field(k1 + j);
        for (a, b) in u.values().iter().zip(state.interior.values()) {
            worst = worst.max((a - b).abs());
        }
        scale = scale.max(state.interior.sup_norm());
    }
    Ok(XvalOutcome {
        discrepancy: worst / scale,
        contraction: cert.ratio,
        l: cert.l,
        iterations: pair.iterations(),
    })
}

fn richardson_checks(
    cfg: &SweepConfig,
    points: &[RatePoint],
) -> Result<Vec<RichardsonCheck>, LabError> {
    if cfg.scenario == Scenario::PicardXval || points.is_empty() {
        return Ok(Vec::new());
    }
    let mut extremes = vec![points[0].clone()];
    if points.len() > 1 {
        extremes.push(points[points.len() - 1].clone());
    }
    let horizon = cfg.horizon();
    let jobs: Vec<(f64, f64, &'static str, Resolution)> = extremes
        .iter()
        .flat_map(|p| {
            let res = cfg.resolution;
            [
                (p.epsilon, p.error, "space", res.refined_space()),
                (p.epsilon, p.error, "time", res.refined_time()),
                (
                    p.epsilon,
                    p.error,
                    "radius",
                    res.doubled_radius(horizon, p.epsilon),
                ),
            ]
        })
        .collect();
    jobs.into_par_iter()
        .map(|(eps, baseline, variant, res)| {
            let value = evaluate(cfg, eps, &res)?;
            let shift = (value - baseline).abs() / baseline.abs();
            Ok(RichardsonCheck {
                epsilon: eps,
                variant: variant.to_string(),
                baseline,
                value,
                shift,
                flagged: !(shift <= RICHARDSON_SHIFT),
            })
        })
        .collect()
}

/// Runs the whole sweep on a pool of `cfg.workers` threads.
pub fn run_sweep(cfg: &SweepConfig) -> Result<RateReport, LabError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    pool.install(|| sweep_inner(cfg))
}

fn sweep_inner(cfg: &SweepConfig) -> Result<RateReport, LabError> {
    let horizon = cfg.horizon();
    let evals: Vec<(f64, Result<PointEval, LabError>)> = cfg
        .ladder
        .par_iter()
        .map(|&eps| (eps, evaluate_point(cfg, eps)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut last_error = None;
    for (eps, ev) in evals {
        match ev {
            Ok(p) => points.push(RatePoint {
                epsilon: eps,
                error: p.value,
                grid_nodes: cfg.resolution.nodes,
                radius: cfg.resolution.radius.radius(horizon, eps),
                dt0: cfg.resolution.dt0_factor * eps,
                comparison_margin: p.margin,
                richardson_estimate: p.estimate,
            }),
            Err(e) => {
                failures.push((eps, e.to_string()));
                last_error = Some(e);
            }
        }
    }
    if 2 * failures.len() > cfg.ladder.len() {
        return Err(last_error.expect("at least one failure"));
    }
    let fit = if cfg.scenario == Scenario::PicardXval {
        None
    } else {
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.error)).collect();
        let f = fit_loglog(&pairs)?;
        Some(FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            residual: f.residual,
            leave_one_out: leave_largest_out(&pairs)?,
        })
    };
    let validation = richardson_checks(cfg, &points)?;
    let samples = cfg.resolution.window_samples;
    Ok(RateReport {
        scenario: cfg.scenario.to_string(),
        dim: cfg.dim,
        fit,
        expected: cfg.expected_band(),
        threshold: (cfg.scenario == Scenario::PicardXval).then_some(XVAL_THRESHOLD),
        validation,
        lattice: Some(Lattice {
            functional: cfg.scenario.functional().to_string(),
            k_r: cfg.k_r,
            t_window: cfg.t_window,
            t_samples: if cfg.scenario == Scenario::DEpsScaling {
                1
            } else {
                samples
            },
        }),
        failures,
        config: echo(cfg),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.to_string().parse::<Scenario>().unwrap(), sc);
        }
        for t in [Tier::Smoke, Tier::Standard, Tier::Thorough] {
            assert_eq!(t.to_string().parse::<Tier>().unwrap(), t);
        }
        assert!("upper".parse::<Scenario>().is_err());
    }

    #[test]
    fn validation_rules() {
        let ok = SweepConfig::new(Scenario::UpperRate, 3, Tier::Smoke);
        ok.validate().unwrap();
        let short = SweepConfig {
            ladder: vec![0.1, 0.05, 0.025],
            ..ok.clone()
        };
        assert!(short.validate().is_err());
        let narrow = SweepConfig {
            ladder: vec![0.1, 0.09, 0.08, 0.07],
            ..ok.clone()
        };
        assert!(narrow.validate().is_err());
        let unsorted = SweepConfig {
            ladder: vec![0.1, 0.0125, 0.05, 0.025],
            ..ok.clone()
        };
        assert!(unsorted.validate().is_err());
        let zero_workers = SweepConfig {
            workers: 0,
            ..ok.clone()
        };
        assert!(zero_workers.validate().is_err());
        let bad_kr = SweepConfig {
            k_r: (1.0, 2.0),
            ..ok
        };
        assert!(bad_kr.validate().is_err());
    }

    #[test]
    fn tiers_bind_ladder_and_nodes() {
        assert_eq!(
            Tier::Standard.ladder(),
            vec![0.1, 0.05, 0.025, 0.0125, 0.00625]
        );
        assert_eq!(Tier::Thorough.ladder().len(), 7);
        assert!(Tier::Smoke.resolution().nodes < Tier::Standard.resolution().nodes);
    }

    #[test]
    fn smoke_sweep_is_deterministic_and_parallel_safe() {
        let cfg = SweepConfig {
            workers: 1,
            ..SweepConfig::new(Scenario::UpperRate, 3, Tier::Smoke)
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&SweepConfig { workers: 3, ..cfg }).unwrap();
        assert_eq!(
            (&a.points, &a.fit, &a.validation),
            (&b.points, &b.fit, &b.validation)
        );
        assert_eq!(a.points.len(), 5);
        assert_eq!(a.validation.len(), 6);
        let slope = a.fit.as_ref().unwrap().slope;
        assert!(slope > 0.3 && slope < 0.6, "{slope}");
    }
}
