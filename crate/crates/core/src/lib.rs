//! Deterministic 2D simulation and navigation stack for servicing trunk rows
//! (vineyard-style plantings) with an omnidirectional ground robot.
//!
//! The crate covers the full loop in simulation:
//!
//! * [`world`] - ground-truth trunk rows, generated from a seeded config.
//! * [`perception`] - synthetic camera: FOV/range gating, misses, false
//!   positives, Gaussian position noise.
//! * [`filter`] - rolling-average clustering that turns raw detections into
//!   confirmed trunk estimates.
//! * [`row_geometry`] - total-least-squares row line fits and side splitting.
//! * [`planner`] - nearest-unvisited target selection and standoff waypoints.
//! * [`state_machine`] - search -> fit -> approach -> pause -> replan cycle.
//! * [`robot`] - proportional controller and kinematic integration.
//! * [`harness`] - scenario config, seeded trial runner, arrival statistics,
//!   CSV export.
//! * [`plot`] - SVG rendering of trials.
//!
//! Everything downstream of a seed is reproducible: the same scenario and
//! trial index always produce bit-identical logs, CSV files, and SVG plots.

pub mod cli;
pub mod filter;
pub mod geometry;
pub mod harness;
pub mod perception;
pub mod planner;
pub mod plot;
pub mod robot;
pub mod row_geometry;
pub mod state_machine;
pub mod world;

use thiserror::Error;

/// Crate version, also exposed through the C API.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A configuration value failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config: {0}")]
pub struct ConfigError(String);

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self(message.into())
    }
}
