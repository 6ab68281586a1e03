//! Row line estimation from clustered trunk positions.
//!
//! A row is modeled as an infinite line: a unit direction plus an anchor at
//! the centroid of the points that produced it. The fit is total least
//! squares via the principal axis of the 2x2 scatter matrix, so it has no
//! preferred coordinate axis and is exact for collinear input. The direction
//! sign is aligned with the direction of travel so "along the row" means the
//! same thing everywhere downstream.

use crate::filter::TrunkCluster;
use crate::geometry::{Point2, Vec2};
use crate::robot::Pose;
use crate::world::Side;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fitted row line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowModel {
    /// Unit direction along the row, sign-aligned with travel.
    pub direction: Vec2,
    /// Centroid of the fitted points.
    pub anchor: Point2,
    /// Which side of the corridor this row bounds.
    pub side: Side,
    /// Cluster ids the fit consumed (empty when fit from bare points).
    pub point_ids: Vec<u64>,
}

impl RowModel {
    /// Heading of the row direction, radians.
    pub fn heading_rad(&self) -> f64 {
        self.direction.angle()
    }

    /// Perpendicular distance from `point` to the row line, signed positive
    /// on the left of the direction vector.
    pub fn signed_lateral_offset(&self, point: Point2) -> f64 {
        self.direction.cross(point - self.anchor)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RowFitError {
    #[error("row fit needs at least 2 distinct points, got {distinct}")]
    InsufficientPoints { distinct: usize },
    #[error("row direction is ambiguous: point scatter is isotropic")]
    AmbiguousDirection,
}

fn count_distinct(points: &[Point2]) -> usize {
    let mut distinct: Vec<Point2> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| q == p) {
            distinct.push(*p);
        }
    }
    distinct.len()
}

/// Total-least-squares line through `points`.
///
/// The principal axis angle is `0.5 * atan2(2*Sxy, Sxx - Syy)` of the
/// centered scatter sums. If the scatter is isotropic (equal eigenvalues)
/// there is no principal axis and the fit fails. The returned direction is
/// negated when it opposes `travel_heading_rad`; an exactly perpendicular
/// direction is kept as computed.
pub fn fit_row(
    points: &[Point2],
    travel_heading_rad: f64,
    side: Side,
) -> Result<RowModel, RowFitError> {
    let distinct = count_distinct(points);
    if distinct < 2 {
        return Err(RowFitError::InsufficientPoints { distinct });
    }
    let n = points.len() as f64;
    let mut centroid = Point2::ZERO;
    for p in points {
        centroid = centroid + *p;
    }
    centroid = centroid * (1.0 / n);

    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - centroid;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if sxx - syy == 0.0 && sxy == 0.0 {
        return Err(RowFitError::AmbiguousDirection);
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut direction = Vec2::from_angle(theta);
    let travel = Vec2::from_angle(travel_heading_rad);
    if direction.dot(travel) < 0.0 {
        direction = -direction;
    }
    Ok(RowModel { direction, anchor: centroid, side, point_ids: Vec::new() })
}

/// [`fit_row`] over cluster means, recording which clusters were used.
pub fn fit_row_clusters(
    clusters: &[TrunkCluster],
    travel_heading_rad: f64,
    side: Side,
) -> Result<RowModel, RowFitError> {
    let points: Vec<Point2> = clusters.iter().map(|c| c.mean_position).collect();
    let mut model = fit_row(&points, travel_heading_rad, side)?;
    model.point_ids = clusters.iter().map(|c| c.cluster_id).collect();
    Ok(model)
}

/// Refit an existing row from an updated point set, preserving its side.
pub fn update_row(
    row: &RowModel,
    points: &[Point2],
    travel_heading_rad: f64,
) -> Result<RowModel, RowFitError> {
    fit_row(points, travel_heading_rad, row.side)
}

/// Partition clusters into (left, right) of the ray from `pose.position()`
/// along `pose.heading_rad`. Points exactly on the ray count as right, so a
/// trunk dead ahead is still assigned a work side deterministically.
pub fn split_sides(clusters: &[TrunkCluster], pose: &Pose) -> (Vec<TrunkCluster>, Vec<TrunkCluster>) {
    let ahead = pose.heading_vec();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for c in clusters {
        if ahead.cross(c.mean_position - pose.position()) > 0.0 {
            left.push(*c);
        } else {
            right.push(*c);
        }
    }
    (left, right)
}
