//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected so that typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use dynbc_core::dynbc::{RadiusPolicy, Resolution};

use crate::error::LabError;
use crate::harness::{Scenario, SweepConfig, Tier};

pub const KEYS: &[&str] = &[
    "dim",
    "epsilon_ladder",
    "scenario",
    "grid_nodes",
    "grading_sigma",
    "R_policy",
    "theta",
    "dt0_factor",
    "dt_growth",
    "K_r_min",
    "K_r_max",
    "t1",
    "t2",
    "workers",
    "tier",
];

/// Raw key/value pairs in file order of last occurrence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(LabError::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, LabError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    /// Resolves defaults from the tier and validates the result.
    pub fn to_sweep(&self) -> Result<SweepConfig, LabError> {
        let scenario: Scenario = self
            .get::<String>("scenario")?
            .ok_or_else(|| LabError::Config("`scenario` is required".into()))?
            .parse()?;
        let tier: Tier = self
            .get::<String>("tier")?
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(Tier::Standard);
        let dim = self.get("dim")?.unwrap_or(3);
        let mut res = tier.resolution();
        if let Some(n) = self.get("grid_nodes")? {
            res.nodes = n;
        }
        if let Some(s) = self.get("grading_sigma")? {
            res.sigma = s;
        }
        if let Some(p) = self.get::<String>("R_policy")? {
            res.radius = parse_radius_policy(&p)?;
        }
        if let Some(t) = self.get("theta")? {
            res.theta = t;
        }
        if let Some(f) = self.get("dt0_factor")? {
            res.dt0_factor = f;
        }
        if let Some(g) = self.get("dt_growth")? {
            res.dt_growth = g;
        }
        let ladder = match self.entries.get("epsilon_ladder") {
            Some(v) => parse_list(v)?,
            None => tier.ladder(),
        };
        let k_r = (
            self.get("K_r_min")?.unwrap_or(1.5),
            self.get("K_r_max")?.unwrap_or(2.0),
        );
        let t_window = (
            self.get("t1")?.unwrap_or(1.0),
            self.get("t2")?.unwrap_or(2.0),
        );
        let workers = self.get("workers")?.unwrap_or(1);
        let cfg = SweepConfig {
            scenario,
            dim,
            ladder,
            k_r,
            t_window,
            tier,
            resolution: res,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, LabError> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| LabError::Config(format!("bad ladder entry `{s}`")))
        })
        .collect()
}

/// `auto`, `auto:<factor>` or a fixed radius `<R>`.
pub fn parse_radius_policy(v: &str) -> Result<RadiusPolicy, LabError> {
    let bad = || {
        LabError::Config(format!(
            "R_policy: expected auto, auto:<factor> or a radius, got `{v}`"
        ))
    };
    if v == "auto" {
        return Ok(RadiusPolicy::Diffusive { factor: 8.0 });
    }
    if let Some(f) = v.strip_prefix("auto:") {
        let factor: f64 = f.parse().map_err(|_| bad())?;
        return if factor > 0.0 {
            Ok(RadiusPolicy::Diffusive { factor })
        } else {
            Err(bad())
        };
    }
    let r: f64 = v.parse().map_err(|_| bad())?;
    if r > 2.0 {
        Ok(RadiusPolicy::Fixed(r))
    } else {
        Err(bad())
    }
}

pub fn radius_policy_string(p: &RadiusPolicy) -> String {
    match p {
        RadiusPolicy::Diffusive { factor } => format!("auto:{factor}"),
        RadiusPolicy::Fixed(r) => format!("{r}"),
    }
}

/// The resolved configuration as key/value pairs, for report headers.
pub fn echo(cfg: &SweepConfig) -> BTreeMap<String, String> {
    let res: &Resolution = &cfg.resolution;
    let ladder: Vec<String> = cfg.ladder.iter().map(|e| format!("{e}")).collect();
    [
        ("dim", cfg.dim.to_string()),
        ("epsilon_ladder", ladder.join(",")),
        ("scenario", cfg.scenario.to_string()),
        ("grid_nodes", res.nodes.to_string()),
        ("grading_sigma", res.sigma.to_string()),
        ("R_policy", radius_policy_string(&res.radius)),
        ("theta", res.theta.to_string()),
        ("dt0_factor", res.dt0_factor.to_string()),
        ("dt_growth", res.dt_growth.to_string()),
        ("K_r_min", cfg.k_r.0.to_string()),
        ("K_r_max", cfg.k_r.1.to_string()),
        ("t1", cfg.t_window.0.to_string()),
        ("t2", cfg.t_window.1.to_string()),
        ("workers", cfg.workers.to_string()),
        ("tier", cfg.tier.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
