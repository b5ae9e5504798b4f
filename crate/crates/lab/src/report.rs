//! Rate reports and trajectory exports.
//!
//! CSV files carry a fixed column order and every float in `{:.16e}` form,
//! which is 17 significant digits and round-trips exactly. The JSON form
//! holds the whole report and parses back to an identical value.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dynbc_core::dynbc::Trajectory;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const REPORT_COLUMNS: [&str; 5] = ["epsilon", "error", "grid_nodes", "R", "dt0"];
pub const TRAJECTORY_COLUMNS: [&str; 3] = ["t", "r", "u"];

/// One ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub epsilon: f64,
    /// Value of the scenario's functional.
    pub error: f64,
    pub grid_nodes: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub dt0: f64,
    /// `min (u_ε - z(·, t/ε))` for the lower-rate scenario.
    pub comparison_margin: Option<f64>,
    /// `max |u_h - u_{h/2}|` over the sampled lattice.
    pub richardson_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Slope change when the largest `ε` is dropped.
    pub leave_one_out: f64,
}

/// Functional recomputed at a refined resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichardsonCheck {
    pub epsilon: f64,
    /// `space`, `time` or `radius`.
    pub variant: String,
    pub baseline: f64,
    pub value: f64,
    /// `|value - baseline| / |baseline|`.
    pub shift: f64,
    pub flagged: bool,
}

/// Where the functional was sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub functional: String,
    pub k_r: (f64, f64),
    pub t_window: (f64, f64),
    pub t_samples: usize,
}

/// Acceptance interval for the fitted slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RateReport {
    pub scenario: String,
    pub dim: usize,
    pub points: Vec<RatePoint>,
    pub fit: Option<FitSummary>,
    pub expected: Option<Band>,
    /// Upper bound on every point's value, for scenarios without a rate.
    pub threshold: Option<f64>,
    pub validation: Vec<RichardsonCheck>,
    pub lattice: Option<Lattice>,
    /// Ladder entries whose solve failed, with the error text.
    pub failures: Vec<(f64, String)>,
    pub config: BTreeMap<String, String>,
}

impl RateReport {
    pub fn richardson_clear(&self) -> bool {
        self.validation.iter().all(|c| !c.flagged)
    }

    pub fn slope_in_band(&self) -> bool {
        match (&self.fit, &self.expected) {
            (Some(fit), Some(band)) => band.contains(fit.slope),
            _ => false,
        }
    }

    /// Slope in band, leave-one-out change below 0.08, Richardson flags
    /// clear, and for the lower-rate scenario positive values and
    /// comparison margins above `-10×` the Richardson estimate.
    /// With a threshold instead: every value at most the threshold and no
    /// failed entries.
    pub fn passed(&self) -> bool {
        if let Some(th) = self.threshold {
            return !self.points.is_empty()
                && self.failures.is_empty()
                && self.points.iter().all(|p| p.error <= th);
        }
        let stable = self
            .fit
            .as_ref()
            .is_some_and(|f| f.leave_one_out < crate::harness::LEAVE_ONE_OUT);
        let lower_ok =
            self.points
                .iter()
                .all(|p| match (p.comparison_margin, p.richardson_estimate) {
                    (Some(m), Some(e)) => p.error > 0.0 && m >= -10.0 * e,
                    _ => true,
                });
        self.slope_in_band() && stable && self.richardson_clear() && lower_ok
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_report_csv<W: Write>(report: &RateReport, out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for p in &report.points {
        w.write_record([
            float(p.epsilon),
            float(p.error),
            p.grid_nodes.to_string(),
            float(p.radius),
            float(p.dt0),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV columns back into bare points.
pub fn read_report_csv<R: std::io::Read>(input: R) -> Result<Vec<RatePoint>, LabError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != REPORT_COLUMNS {
        return Err(LabError::Config(format!(
            "unexpected CSV header {headers:?}"
        )));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64, LabError> {
            rec[i]
                .parse()
                .map_err(|_| LabError::Config(format!("bad number `{}`", &rec[i])))
        };
        points.push(RatePoint {
            epsilon: f(0)?,
            error: f(1)?,
            grid_nodes: rec[2]
                .parse()
                .map_err(|_| LabError::Config(format!("bad node count `{}`", &rec[2])))?,
            radius: f(3)?,
            dt0: f(4)?,
            comparison_margin: None,
            richardson_estimate: None,
        });
    }
    Ok(points)
}

pub fn write_report_json<W: Write>(report: &RateReport, out: W) -> Result<(), LabError> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

pub fn read_report_json(path: &Path) -> Result<RateReport, LabError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `<base>.csv` and `<base>.json`; returns both paths.
pub fn emit_report(report: &RateReport, base: &Path) -> Result<(PathBuf, PathBuf), LabError> {
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    write_report_csv(report, BufWriter::new(File::create(&csv_path)?))?;
    let mut w = BufWriter::new(File::create(&json_path)?);
    write_report_json(report, &mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok((csv_path, json_path))
}

/// Rows `t, r, u` for every snapshot and node.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS)?;
    for (t, r, u) in traj.rows() {
        w.write_record([float(t), float(r), float(u)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RateReport {
        RateReport {
            scenario: "upper_rate".into(),
            dim: 3,
            points: vec![
                RatePoint {
                    epsilon: 0.1,
                    error: 0.1 / 3.0,
                    grid_nodes: 2000,
                    radius: 1.0 + 8.0 * 20f64.sqrt(),
                    dt0: 1e-4,
                    comparison_margin: Some(-1.5e-17),
                    richardson_estimate: None,
                },
                RatePoint {
                    epsilon: 0.05,
                    error: std::f64::consts::PI * 1e-3,
                    grid_nodes: 2000,
                    radius: 32.0,
                    dt0: 5e-5,
                    comparison_margin: None,
                    richardson_estimate: Some(1e-9),
                },
            ],
            fit: Some(FitSummary {
                slope: 0.4483,
                intercept: -0.99,
                residual: 0.011,
                leave_one_out: 0.01,
            }),
            expected: Some(Band {
                lo: 0.45,
                hi: f64::MAX,
            }),
            threshold: None,
            validation: vec![],
            lattice: None,
            failures: vec![(0.025, "boom".into())],
            config: BTreeMap::from([("dim".into(), "3".into())]),
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rep = sample();
        let mut buf = Vec::new();
        write_report_json(&rep, &mut buf).unwrap();
        let back: RateReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, rep);
        for (a, b) in back.points.iter().zip(&rep.points) {
            assert_eq!(a.error.to_bits(), b.error.to_bits());
        }
    }

    #[test]
    fn csv_has_fixed_columns_and_round_trips() {
        let rep = sample();
        let mut buf = Vec::new();
        write_report_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("epsilon,error,grid_nodes,R,dt0\n"));
        assert!(text.contains("3.3333333333333333e-2"));
        let back = read_report_csv(buf.as_slice()).unwrap();
        for (a, b) in back.iter().zip(&rep.points) {
            assert_eq!(a.error.to_bits(), b.error.to_bits());
            assert_eq!(a.radius.to_bits(), b.radius.to_bits());
        }
    }

    #[test]
    fn empty_report_gives_header_only() {
        let mut buf = Vec::new();
        write_report_csv(&RateReport::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epsilon,error,grid_nodes,R,dt0\n"
        );
        assert!(!RateReport::default().passed());
    }
}
