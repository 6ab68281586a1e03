//! Planar omnidirectional robot: proportional waypoint tracking and kinematic
//! integration.
//!
//! The base is modeled as a holonomic point with a body frame: it can translate
//! forward/backward, strafe, and yaw independently, each with its own speed
//! limit. [`track`] produces body-frame velocity commands from a pose error;
//! [`step_dynamics`] integrates a command over one control period with optional
//! actuation noise.

use crate::geometry::{wrap_angle, Point2};
use crate::planner::Waypoint;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

/// World-frame pose of the robot base.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading from +x, wrapped to (-pi, pi].
    pub heading_rad: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading_rad: f64) -> Self {
        Self { x, y, heading_rad: wrap_angle(heading_rad) }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn heading_vec(&self) -> Point2 {
        Point2::from_angle(self.heading_rad)
    }
}

/// Body geometry, actuation limits, and controller gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    /// Body length, used only for plotting. Meters.
    pub body_length_m: f64,
    /// Forward/backward speed limit, m/s.
    pub max_speed_mps: f64,
    /// Strafe speed limit, m/s.
    pub max_lateral_mps: f64,
    /// Yaw rate limit, rad/s.
    pub max_yaw_rate_rps: f64,
    /// Per-axis velocity noise std applied during integration
    /// (m/s on the linear axes, rad/s on yaw). 0 disables nothing but the
    /// effect: the same number of RNG draws happens either way.
    pub actuation_noise_std: f64,
    /// Control period, seconds.
    pub dt_s: f64,
    /// Proportional gain on body-frame position error, 1/s.
    pub k_pos: f64,
    /// Proportional gain on heading error, 1/s.
    pub k_heading: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            body_length_m: 0.61,
            max_speed_mps: 0.4,
            max_lateral_mps: 0.2,
            max_yaw_rate_rps: 0.6,
            actuation_noise_std: 0.0,
            dt_s: 0.05,
            k_pos: 1.0,
            k_heading: 2.0,
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.body_length_m > 0.0) {
            return Err(ConfigError::new("robot.body_length_m must be > 0"));
        }
        if !(self.max_speed_mps > 0.0) || !(self.max_lateral_mps > 0.0) || !(self.max_yaw_rate_rps > 0.0) {
            return Err(ConfigError::new("robot speed limits must be > 0"));
        }
        if !(self.dt_s > 0.0) || !self.dt_s.is_finite() {
            return Err(ConfigError::new("robot.dt_s must be a positive finite number"));
        }
        if !(self.k_pos > 0.0) || !(self.k_heading > 0.0) {
            return Err(ConfigError::new("robot gains must be > 0"));
        }
        if !(self.actuation_noise_std >= 0.0) {
            return Err(ConfigError::new("robot.actuation_noise_std must be >= 0"));
        }
        Ok(())
    }
}

/// Body-frame velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    /// Along the body +x (heading) axis, m/s.
    pub vx_mps: f64,
    /// Along the body +y (left) axis, m/s.
    pub vy_mps: f64,
    /// Counter-clockwise positive, rad/s.
    pub yaw_rate_rps: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand { vx_mps: 0.0, vy_mps: 0.0, yaw_rate_rps: 0.0 };

    pub fn rotate(yaw_rate_rps: f64) -> Self {
        Self { vx_mps: 0.0, vy_mps: 0.0, yaw_rate_rps }
    }
}

fn clamp(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

/// Proportional controller toward a waypoint.
///
/// The world-frame position error is rotated into the body frame, scaled by
/// `k_pos`, and clamped per axis; the heading error is wrapped, scaled by
/// `k_heading`, and clamped. At the waypoint the command is exactly zero.
pub fn track(pose: &Pose, waypoint: &Waypoint, config: &RobotConfig) -> VelocityCommand {
    let err_world = waypoint.position - pose.position();
    let err_body = err_world.rotated(-pose.heading_rad);
    let heading_err = wrap_angle(waypoint.heading_rad - pose.heading_rad);
    VelocityCommand {
        vx_mps: clamp(config.k_pos * err_body.x, config.max_speed_mps),
        vy_mps: clamp(config.k_pos * err_body.y, config.max_lateral_mps),
        yaw_rate_rps: clamp(config.k_heading * heading_err, config.max_yaw_rate_rps),
    }
}

/// One Euler step of the kinematics.
///
/// The command is perturbed per axis with N(0, actuation_noise_std^2), rotated
/// into the world frame, and integrated over `dt_s`. Exactly three RNG draws
/// happen per call regardless of the noise setting, so trajectories with
/// different noise levels stay draw-for-draw aligned.
pub fn step_dynamics<R: Rng + ?Sized>(
    pose: &Pose,
    command: &VelocityCommand,
    config: &RobotConfig,
    rng: &mut R,
) -> Pose {
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let nw: f64 = rng.sample(StandardNormal);
    let s = config.actuation_noise_std;
    let v_body = Point2::new(command.vx_mps + s * nx, command.vy_mps + s * ny);
    let v_world = v_body.rotated(pose.heading_rad);
    let yaw = command.yaw_rate_rps + s * nw;
    Pose::new(
        pose.x + v_world.x * config.dt_s,
        pose.y + v_world.y * config.dt_s,
        wrap_angle(pose.heading_rad + yaw * config.dt_s),
    )
}
