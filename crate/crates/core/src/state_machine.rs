//! Navigation state machine.
//!
//! One `step` call per control tick turns the current state plus fresh filter
//! output into the next state and a motion command:
//!
//! ```text
//! InitialSearch -> FitRows -> Replan -> Approach -> TaskPause
//!                               ^          |            |
//!                               |          v            |
//!                               +-------- Done <--------+
//! ```
//!
//! During `InitialSearch` the robot rotates in place toward the working side
//! to sweep the camera across the rows. `FitRows` splits confirmed clusters
//! by corridor side, fits the row lines, and freezes the target list.
//! `Replan` picks the nearest unvisited target and builds its standoff
//! waypoint; `Approach` tracks it until pose tolerances are met; `TaskPause`
//! holds still for a fixed number of ticks (the on-station task), marks the
//! target visited, refits the rows against the latest cluster means, and
//! replans. `Done` is absorbing.
//!
//! `step` is a pure function: identical arguments produce identical results.
//! All mutation happens through the returned [`StepOutcome`].

use crate::filter::TrunkCluster;
use crate::planner::{next_target, waypoint_for, PlanError, PlanState, Waypoint};
use crate::robot::Pose;
use crate::row_geometry::{fit_row_clusters, split_sides, RowFitError, RowModel};
use crate::world::Side;
use crate::ConfigError;
use crate::geometry::wrap_angle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Behavior parameters for the state machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavConfig {
    /// Side of the corridor to service.
    pub work_side: Side,
    /// Camera frames consumed by the initial rotating search.
    pub search_frames: u32,
    /// Ticks to hold position at each waypoint.
    pub pause_ticks: u32,
    /// Position tolerance for declaring arrival, meters.
    pub arrival_pos_tol_m: f64,
    /// Heading tolerance for declaring arrival, radians.
    pub arrival_heading_tol_rad: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            work_side: Side::Right,
            search_frames: 60,
            pause_ticks: 20,
            arrival_pos_tol_m: 0.01,
            arrival_heading_tol_rad: 0.05,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.search_frames == 0 {
            return Err(ConfigError::new("nav.search_frames must be >= 1"));
        }
        if self.pause_ticks == 0 {
            return Err(ConfigError::new("nav.pause_ticks must be >= 1"));
        }
        if !(self.arrival_pos_tol_m > 0.0) {
            return Err(ConfigError::new("nav.arrival_pos_tol_m must be > 0"));
        }
        if !(self.arrival_heading_tol_rad > 0.0) {
            return Err(ConfigError::new("nav.arrival_heading_tol_rad must be > 0"));
        }
        Ok(())
    }
}

/// Discrete navigation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NavState {
    /// Rotating in place, accumulating detections.
    InitialSearch { frames_done: u32 },
    /// Splitting clusters by side and fitting row lines.
    FitRows,
    /// Choosing the next unvisited target.
    Replan,
    /// Driving to a waypoint.
    Approach { waypoint: Waypoint },
    /// Holding at a waypoint while the task executes.
    TaskPause { remaining: u32, waypoint: Waypoint },
    /// All targets serviced.
    Done,
}

impl NavState {
    pub const START: NavState = NavState::InitialSearch { frames_done: 0 };

    pub fn name(&self) -> &'static str {
        match self {
            NavState::InitialSearch { .. } => "initial_search",
            NavState::FitRows => "fit_rows",
            NavState::Replan => "replan",
            NavState::Approach { .. } => "approach",
            NavState::TaskPause { .. } => "task_pause",
            NavState::Done => "done",
        }
    }

    /// Cluster id currently being serviced, if any.
    pub fn target_id(&self) -> Option<u64> {
        match self {
            NavState::Approach { waypoint } | NavState::TaskPause { waypoint, .. } => {
                Some(waypoint.target_cluster_id)
            }
            _ => None,
        }
    }
}

/// Motion request for the current tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NavCommand {
    /// Spin in place; `clockwise` is the sweep direction.
    RotateInPlace { clockwise: bool },
    /// Track a waypoint with the proportional controller.
    Track(Waypoint),
    /// Hold position.
    Stop,
}

/// Fitted rows for the two corridor sides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RowPair {
    pub left: Option<RowModel>,
    pub right: Option<RowModel>,
}

impl RowPair {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn for_side(&self, side: Side) -> Option<&RowModel> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    fn set(&mut self, side: Side, model: RowModel) {
        match side {
            Side::Left => self.left = Some(model),
            Side::Right => self.right = Some(model),
        }
    }
}

/// Everything the machine reads for one tick.
#[derive(Debug, Clone)]
pub struct NavInputs<'a> {
    pub pose: Pose,
    /// Confirmed clusters from the detection filter.
    pub clusters: &'a [TrunkCluster],
    /// Heading of the corridor sweep, fixed at trial start. Used for side
    /// splitting so the partition does not depend on where the camera points.
    pub travel_heading_rad: f64,
}

/// Waypoint arrival notification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub target_id: u64,
    pub waypoint: Waypoint,
    pub achieved: Pose,
}

/// Result of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: NavState,
    pub command: NavCommand,
    pub rows: RowPair,
    pub plan: PlanState,
    /// Present exactly when this tick entered `TaskPause`.
    pub arrival: Option<Arrival>,
}

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("search finished with {confirmed_on_work_side} confirmed trunks on the working side (need 2)")]
    SearchFailed { confirmed_on_work_side: usize },
    #[error("row fit failed: {0}")]
    RowFit(#[from] RowFitError),
    #[error("planning failed: {0}")]
    Plan(#[from] PlanError),
    #[error("no fitted row for the working side")]
    MissingRow,
}

/// Splits clusters around the travel direction (not the current camera
/// heading) and refits whichever rows have enough support.
fn fit_both_rows(
    inputs: &NavInputs<'_>,
    rows: &RowPair,
    work_side: Side,
) -> Result<RowPair, NavError> {
    let travel_pose = Pose::new(inputs.pose.x, inputs.pose.y, inputs.travel_heading_rad);
    let (left, right) = split_sides(inputs.clusters, &travel_pose);
    let (work, off) = match work_side {
        Side::Left => (&left, &right),
        Side::Right => (&right, &left),
    };
    if work.len() < 2 {
        return Err(NavError::SearchFailed { confirmed_on_work_side: work.len() });
    }
    let mut out = rows.clone();
    out.set(work_side, fit_row_clusters(work, inputs.travel_heading_rad, work_side)?);
    if off.len() >= 2 {
        if let Ok(model) = fit_row_clusters(off, inputs.travel_heading_rad, work_side.opposite()) {
            out.set(work_side.opposite(), model);
        }
    }
    Ok(out)
}

fn replan(
    inputs: &NavInputs<'_>,
    rows: &RowPair,
    plan: &PlanState,
    config: &NavConfig,
) -> Result<(NavState, NavCommand), NavError> {
    match next_target(&inputs.pose, inputs.clusters, plan)? {
        None => Ok((NavState::Done, NavCommand::Stop)),
        Some(cluster) => {
            let row = rows.for_side(config.work_side).ok_or(NavError::MissingRow)?;
            let waypoint = waypoint_for(cluster, row, plan);
            Ok((NavState::Approach { waypoint }, NavCommand::Stop))
        }
    }
}

/// Advance the machine by one tick.
pub fn step(
    state: &NavState,
    inputs: &NavInputs<'_>,
    rows: &RowPair,
    plan: &PlanState,
    config: &NavConfig,
) -> Result<StepOutcome, NavError> {
    let mut out = StepOutcome {
        state: state.clone(),
        command: NavCommand::Stop,
        rows: rows.clone(),
        plan: plan.clone(),
        arrival: None,
    };
    match state {
        NavState::InitialSearch { frames_done } => {
            let done = frames_done + 1;
            if done >= config.search_frames {
                out.state = NavState::FitRows;
            } else {
                out.state = NavState::InitialSearch { frames_done: done };
                out.command = NavCommand::RotateInPlace {
                    clockwise: config.work_side == Side::Right,
                };
            }
        }
        NavState::FitRows => {
            out.rows = fit_both_rows(inputs, rows, config.work_side)?;
            let work_ids: Vec<u64> = out
                .rows
                .for_side(config.work_side)
                .expect("just fitted")
                .point_ids
                .clone();
            out.plan.set_targets(work_ids);
            out.state = NavState::Replan;
        }
        NavState::Replan => {
            let (state, command) = replan(inputs, rows, plan, config)?;
            out.state = state;
            out.command = command;
        }
        NavState::Approach { waypoint } => {
            let pos_err = waypoint.position.distance(inputs.pose.position());
            let heading_err = wrap_angle(waypoint.heading_rad - inputs.pose.heading_rad).abs();
            if pos_err <= config.arrival_pos_tol_m && heading_err <= config.arrival_heading_tol_rad {
                out.state = NavState::TaskPause { remaining: config.pause_ticks, waypoint: *waypoint };
                out.arrival = Some(Arrival {
                    target_id: waypoint.target_cluster_id,
                    waypoint: *waypoint,
                    achieved: inputs.pose,
                });
            } else {
                out.command = NavCommand::Track(*waypoint);
            }
        }
        NavState::TaskPause { remaining, waypoint } => {
            if *remaining > 1 {
                out.state = NavState::TaskPause { remaining: remaining - 1, waypoint: *waypoint };
            } else {
                out.plan.mark_visited(waypoint.target_cluster_id)?;
                // Cluster means have sharpened since the last fit; refresh the
                // row lines before picking the next target.
                out.rows = fit_both_rows(inputs, rows, config.work_side)?;
                out.state = NavState::Replan;
            }
        }
        NavState::Done => {}
    }
    Ok(out)
}
