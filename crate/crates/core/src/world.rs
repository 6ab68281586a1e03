//! Ground-truth world: trunk rows on a planar field.
//!
//! A world is a flat list of trunks plus the nominal row heading. Trunks carry
//! the side of the corridor they belong to so downstream code can be checked
//! against ground truth; the robot itself never reads trunk sides or ids, only
//! noisy detections.
//!
//! Serialized form:
//!
//! ```json
//! {"trunks": [{"id": 0, "x": 0.0, "y": -1.2, "side": "R"}], "heading": 0.0}
//! ```

use crate::geometry::{Point2, Vec2};
use crate::ConfigError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which side of the corridor something is on, looking along the row heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L", alias = "left", alias = "Left")]
    Left,
    #[serde(rename = "R", alias = "right", alias = "Right")]
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l" | "left" => Ok(Side::Left),
            "r" | "right" => Ok(Side::Right),
            other => Err(format!("expected 'left' or 'right', got '{other}'")),
        }
    }
}

/// One trunk with its ground-truth position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TrunkRecord", into = "TrunkRecord")]
pub struct Trunk {
    pub id: u64,
    pub position: Point2,
    pub side: Side,
}

/// Flat serialized layout for [`Trunk`].
#[derive(Serialize, Deserialize)]
struct TrunkRecord {
    id: u64,
    x: f64,
    y: f64,
    side: Side,
}

impl From<TrunkRecord> for Trunk {
    fn from(r: TrunkRecord) -> Self {
        Trunk { id: r.id, position: Point2::new(r.x, r.y), side: r.side }
    }
}

impl From<Trunk> for TrunkRecord {
    fn from(t: Trunk) -> Self {
        TrunkRecord { id: t.id, x: t.position.x, y: t.position.y, side: t.side }
    }
}

/// Ground truth for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub trunks: Vec<Trunk>,
    /// Nominal row heading from +x, radians.
    #[serde(rename = "heading")]
    pub heading_rad: f64,
}

impl World {
    /// Unit vector along the nominal row direction.
    pub fn corridor_axis(&self) -> Vec2 {
        Vec2::from_angle(self.heading_rad)
    }

    pub fn trunks_on(&self, side: Side) -> impl Iterator<Item = &Trunk> {
        self.trunks.iter().filter(move |t| t.side == side)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Row layout parameters. All distances in meters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub trunks_per_row: usize,
    pub trunk_spacing_m: f64,
    /// Perpendicular distance between the two rows of a corridor.
    pub row_separation_m: f64,
    /// Std of along-row spacing jitter.
    pub spacing_jitter_std_m: f64,
    /// Std of perpendicular placement jitter.
    pub lateral_jitter_std_m: f64,
    pub row_heading_rad: f64,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            trunks_per_row: 5,
            trunk_spacing_m: 0.8,
            row_separation_m: 2.4,
            spacing_jitter_std_m: 0.0,
            lateral_jitter_std_m: 0.0,
            row_heading_rad: 0.0,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trunks_per_row == 0 {
            return Err(ConfigError::new("world.trunks_per_row must be >= 1"));
        }
        if !(self.trunk_spacing_m > 0.0) {
            return Err(ConfigError::new("world.trunk_spacing_m must be > 0"));
        }
        if !(self.row_separation_m > 0.0) {
            return Err(ConfigError::new("world.row_separation_m must be > 0"));
        }
        if !(self.spacing_jitter_std_m >= 0.0) || !(self.lateral_jitter_std_m >= 0.0) {
            return Err(ConfigError::new("world jitter stds must be >= 0"));
        }
        if !self.row_heading_rad.is_finite() {
            return Err(ConfigError::new("world.row_heading_rad must be finite"));
        }
        Ok(())
    }
}

/// Places one row of trunks starting at `origin`, walking along `dir`.
///
/// Jitter draws two standard normals per trunk (along, then lateral) and
/// scales them by the configured stds, so the RNG stream is identical whether
/// or not jitter is enabled.
fn place_row<R: Rng + ?Sized>(
    out: &mut Vec<Trunk>,
    origin: Point2,
    dir: Vec2,
    side: Side,
    config: &WorldConfig,
    rng: &mut R,
) {
    let perp = dir.perp_left();
    for k in 0..config.trunks_per_row {
        let za: f64 = rng.sample(StandardNormal);
        let zl: f64 = rng.sample(StandardNormal);
        let along = k as f64 * config.trunk_spacing_m + config.spacing_jitter_std_m * za;
        let lateral = config.lateral_jitter_std_m * zl;
        let id = out.len() as u64;
        out.push(Trunk { id, position: origin + dir * along + perp * lateral, side });
    }
}

/// Two parallel rows straddling the corridor centerline through the origin.
///
/// The right row comes first (ids `0..n`), then the left row (ids `n..2n`).
/// Deterministic in `config.seed`.
pub fn generate_world(config: &WorldConfig) -> World {
    debug_assert!(config.validate().is_ok(), "invalid WorldConfig");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dir = Vec2::from_angle(config.row_heading_rad);
    let half = config.row_separation_m / 2.0;
    let left_offset = dir.perp_left() * half;
    let mut trunks = Vec::with_capacity(config.trunks_per_row * 2);
    place_row(&mut trunks, -left_offset, dir, Side::Right, config, &mut rng);
    place_row(&mut trunks, left_offset, dir, Side::Left, config, &mut rng);
    World { trunks, heading_rad: config.row_heading_rad }
}

/// A single row of trunks on the corridor centerline, tagged [`Side::Right`].
///
/// Row separation is ignored; the robot is expected to start offset to the
/// left of the row so the trunks sit on its working side.
pub fn single_row_world(config: &WorldConfig) -> World {
    debug_assert!(config.validate().is_ok(), "invalid WorldConfig");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dir = Vec2::from_angle(config.row_heading_rad);
    let mut trunks = Vec::with_capacity(config.trunks_per_row);
    place_row(&mut trunks, Point2::ZERO, dir, Side::Right, config, &mut rng);
    World { trunks, heading_rad: config.row_heading_rad }
}
