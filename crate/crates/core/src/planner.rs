//! Target selection and standoff waypoint construction.
//!
//! The robot services trunks one at a time: always the nearest unvisited
//! confirmed trunk on the working side. Each target gets a waypoint offset
//! from the trunk by a fixed standoff, perpendicular to the fitted row, on
//! the corridor side, with the body held parallel to the row. Visited
//! targets are removed from consideration permanently.

use crate::filter::TrunkCluster;
use crate::geometry::{Point2, Vec2};
use crate::robot::Pose;
use crate::row_geometry::RowModel;
use crate::world::Side;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// A commanded stop: position plus body heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: Point2,
    /// Body heading at the stop, parallel to the row. Radians.
    pub heading_rad: f64,
    /// Cluster this waypoint services.
    pub target_cluster_id: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("cluster {cluster_id} already visited")]
    AlreadyVisited { cluster_id: u64 },
    #[error("cluster {cluster_id} is not a planned target")]
    UnknownTarget { cluster_id: u64 },
    #[error("planned target {cluster_id} missing from the cluster set")]
    MissingCluster { cluster_id: u64 },
}

/// Visit bookkeeping plus the plan parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanState {
    unvisited: BTreeSet<u64>,
    visited: Vec<u64>,
    /// Stand-off distance from trunk to waypoint, meters.
    pub standoff_m: f64,
    /// Side of the corridor being worked.
    pub work_side: Side,
}

impl PlanState {
    pub fn new(work_side: Side, standoff_m: f64) -> Self {
        Self { unvisited: BTreeSet::new(), visited: Vec::new(), standoff_m, work_side }
    }

    /// Install the target set. Ids already visited are not re-added, so a
    /// cluster can never be serviced twice.
    pub fn set_targets(&mut self, ids: impl IntoIterator<Item = u64>) {
        for id in ids {
            if !self.visited.contains(&id) {
                self.unvisited.insert(id);
            }
        }
    }

    pub fn unvisited(&self) -> impl Iterator<Item = u64> + '_ {
        self.unvisited.iter().copied()
    }

    /// Ids in visit order.
    pub fn visited(&self) -> &[u64] {
        &self.visited
    }

    pub fn is_exhausted(&self) -> bool {
        self.unvisited.is_empty()
    }

    pub fn mark_visited(&mut self, cluster_id: u64) -> Result<(), PlanError> {
        if self.visited.contains(&cluster_id) {
            return Err(PlanError::AlreadyVisited { cluster_id });
        }
        if !self.unvisited.remove(&cluster_id) {
            return Err(PlanError::UnknownTarget { cluster_id });
        }
        self.visited.push(cluster_id);
        Ok(())
    }
}

/// Corridor-side unit normal for a row being worked on `work_side`.
///
/// Working the right-hand row means the robot stands to the left of that
/// row's direction vector, and vice versa.
pub fn corridor_normal(row_direction: Vec2, work_side: Side) -> Vec2 {
    match work_side {
        Side::Right => row_direction.perp_left(),
        Side::Left => row_direction.perp_right(),
    }
}

/// Waypoint for one trunk: standoff along the corridor normal, heading
/// parallel to the row.
pub fn waypoint_for(trunk: &TrunkCluster, row: &RowModel, plan: &PlanState) -> Waypoint {
    let normal = corridor_normal(row.direction, plan.work_side);
    Waypoint {
        position: trunk.mean_position + normal * plan.standoff_m,
        heading_rad: row.heading_rad(),
        target_cluster_id: trunk.cluster_id,
    }
}

/// Nearest unvisited cluster to the robot, lowest id on exact distance ties.
/// `None` when every target has been visited.
pub fn next_target<'a>(
    pose: &Pose,
    clusters: &'a [TrunkCluster],
    plan: &PlanState,
) -> Result<Option<&'a TrunkCluster>, PlanError> {
    let mut best: Option<(&TrunkCluster, f64)> = None;
    for id in plan.unvisited() {
        let cluster = clusters
            .iter()
            .find(|c| c.cluster_id == id)
            .ok_or(PlanError::MissingCluster { cluster_id: id })?;
        let d2 = cluster.mean_position.distance(pose.position()).powi(2);
        // Ascending id iteration + strict < keeps the lowest id on ties.
        if best.map_or(true, |(_, bd2)| d2 < bd2) {
            best = Some((cluster, d2));
        }
    }
    Ok(best.map(|(c, _)| c))
}
