//! Synthetic trunk perception.
//!
//! Stands in for a detector + depth camera: each frame yields world-frame
//! position guesses for trunks inside the field-of-view wedge, with
//! Gaussian position noise, Bernoulli missed detections, and Poisson false
//! positives distributed uniformly over the visible wedge area.
//!
//! RNG discipline: for every trunk that passes the visibility gate the
//! generator draws exactly one uniform (miss test) and, if kept, two normals
//! (noise). False-positive draws happen after all trunks. This fixed order
//! makes frames reproducible for a given seed.

use crate::geometry::{wrap_angle, Point2};
use crate::robot::Pose;
use crate::world::World;
use crate::ConfigError;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Sensor model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    /// Full field-of-view angle, radians.
    pub fov_rad: f64,
    /// Maximum detection range, meters.
    pub max_range_m: f64,
    /// Minimum detection range, meters.
    pub min_range_m: f64,
    /// Std of isotropic position noise on detections, meters.
    pub position_noise_std_m: f64,
    /// Probability a visible trunk is missed in a frame.
    pub miss_prob: f64,
    /// Expected false positives per frame (Poisson rate).
    pub false_positive_rate: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            fov_rad: 1.0,
            max_range_m: 4.0,
            min_range_m: 0.3,
            position_noise_std_m: 0.02,
            miss_prob: 0.0,
            false_positive_rate: 0.0,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.fov_rad > 0.0) || self.fov_rad > std::f64::consts::TAU {
            return Err(ConfigError::new("camera.fov_rad must be in (0, 2*pi]"));
        }
        if !(self.min_range_m >= 0.0) || !(self.max_range_m > self.min_range_m) {
            return Err(ConfigError::new("camera ranges must satisfy 0 <= min < max"));
        }
        if !(self.position_noise_std_m >= 0.0) {
            return Err(ConfigError::new("camera.position_noise_std_m must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.miss_prob) {
            return Err(ConfigError::new("camera.miss_prob must be in [0, 1]"));
        }
        if !(self.false_positive_rate >= 0.0) {
            return Err(ConfigError::new("camera.false_positive_rate must be >= 0"));
        }
        Ok(())
    }
}

/// Polar measurement in the sensor (body) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBearing {
    pub range_m: f64,
    /// Bearing from the body +x axis, counter-clockwise positive, radians.
    pub bearing_rad: f64,
}

/// One detection: a world-frame position guess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrunkDetection {
    /// Noisy world-frame position estimate.
    pub position: Point2,
    /// Frame the detection came from.
    pub frame_index: u64,
    /// Range the sensor reported (true range for real trunks, sampled range
    /// for false positives). Meters.
    pub range_m: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum PerceptionError {
    #[error("invalid measurement: range {0} must be finite and > 0")]
    InvalidRange(f64),
    #[error("invalid measurement: non-finite input")]
    NonFinite,
}

/// World-frame point to a body-frame polar measurement.
pub fn world_to_sensor(point: Point2, pose: &Pose) -> RangeBearing {
    let rel = (point - pose.position()).rotated(-pose.heading_rad);
    RangeBearing { range_m: rel.norm(), bearing_rad: rel.y.atan2(rel.x) }
}

/// Body-frame polar measurement back to a world-frame point.
pub fn sensor_to_world(measurement: RangeBearing, pose: &Pose) -> Result<Point2, PerceptionError> {
    if !measurement.range_m.is_finite() || !measurement.bearing_rad.is_finite() {
        return Err(PerceptionError::NonFinite);
    }
    if measurement.range_m <= 0.0 {
        return Err(PerceptionError::InvalidRange(measurement.range_m));
    }
    if !pose.x.is_finite() || !pose.y.is_finite() || !pose.heading_rad.is_finite() {
        return Err(PerceptionError::NonFinite);
    }
    let local = Point2::from_angle(measurement.bearing_rad) * measurement.range_m;
    Ok(pose.position() + local.rotated(pose.heading_rad))
}

fn visible(rb: &RangeBearing, config: &CameraConfig) -> bool {
    rb.range_m >= config.min_range_m
        && rb.range_m <= config.max_range_m
        && wrap_angle(rb.bearing_rad).abs() <= config.fov_rad / 2.0
}

/// Simulate one camera frame from `pose`.
///
/// Trunks are visited in world order. A visible trunk is kept with
/// probability `1 - miss_prob`; kept detections get isotropic Gaussian noise
/// on the world position while `range_m` stays the true range. False
/// positives are appended last, sampled uniformly over the wedge area.
pub fn sense<R: Rng + ?Sized>(
    world: &World,
    pose: &Pose,
    config: &CameraConfig,
    rng: &mut R,
    frame_index: u64,
) -> Vec<TrunkDetection> {
    let mut out = Vec::new();
    for trunk in &world.trunks {
        let rb = world_to_sensor(trunk.position, pose);
        if !visible(&rb, config) {
            continue;
        }
        let miss_draw: f64 = rng.gen();
        if miss_draw < config.miss_prob {
            continue;
        }
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        let noise = Point2::new(nx, ny) * config.position_noise_std_m;
        out.push(TrunkDetection {
            position: trunk.position + noise,
            frame_index,
            range_m: rb.range_m,
        });
    }
    if config.false_positive_rate > 0.0 {
        let poisson = Poisson::new(config.false_positive_rate).expect("validated rate");
        let count = poisson.sample(rng) as u64;
        for _ in 0..count {
            let bearing = rng.gen_range(-config.fov_rad / 2.0..=config.fov_rad / 2.0);
            // Uniform over wedge area, not over range: p(r) ~ r.
            let u: f64 = rng.gen();
            let r2 = config.min_range_m.powi(2)
                + u * (config.max_range_m.powi(2) - config.min_range_m.powi(2));
            let range = r2.sqrt();
            let position = sensor_to_world(RangeBearing { range_m: range, bearing_rad: bearing }, pose)
                .expect("range in band is valid");
            out.push(TrunkDetection { position, frame_index, range_m: range });
        }
    }
    out
}

/// Write detections as `frame,trunk_guess_x,trunk_guess_y,range` CSV.
pub fn write_detection_csv<W: Write>(mut w: W, detections: &[TrunkDetection]) -> io::Result<()> {
    writeln!(w, "frame,trunk_guess_x,trunk_guess_y,range")?;
    for d in detections {
        writeln!(w, "{},{},{},{}", d.frame_index, d.position.x, d.position.y, d.range_m)?;
    }
    Ok(())
}
