//! Experiment driver for the exterior dynamical-boundary heat problem:
//! configuration files, epsilon sweeps with Richardson checks, rate
//! reports, and the acceptance criteria.

pub mod config;
pub mod criteria;
pub mod error;
pub mod harness;
pub mod report;

pub use error::LabError;
