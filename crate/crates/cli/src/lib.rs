//! Experiment orchestration for `infobound`: configuration, n-sweeps, CSV and SVG
//! output, and the calibration report.

pub mod analyze;
pub mod calibrate;
pub mod config;
pub mod plot;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, ProblemSpec};
