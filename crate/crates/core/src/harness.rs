//! Experiment harness: scenario config, the closed-loop trial runner, and
//! arrival-precision statistics.
//!
//! A [`Scenario`] bundles every knob of the stack. [`run_trial`] wires the
//! full loop (sense -> filter -> state machine -> controller -> dynamics)
//! around one generated world and one seeded RNG stream, so a given
//! `(scenario, trial_index)` pair always reproduces bit-identical logs.
//! [`run_experiment`] repeats trials with per-trial seeds and aggregates
//! arrival errors.
//!
//! Each arrival records two errors:
//!
//! * `error_m`: distance from the achieved position to the ground-truth stop
//!   point (true trunk position offset by the standoff along the corridor
//!   normal). This measures what the whole pipeline got wrong, including
//!   perception bias, and is the headline statistic.
//! * `tracking_error_m`: distance to the commanded waypoint. This only
//!   measures the controller and is bounded by the arrival tolerance.
//!
//! With all noise off the commanded waypoint coincides with the ground-truth
//! point and the two errors agree.

use crate::filter::{FilterConfig, FilterState};
use crate::geometry::Point2;
use crate::perception::{sense, CameraConfig};
use crate::planner::{corridor_normal, PlanState, Waypoint};
use crate::robot::{step_dynamics, track, Pose, RobotConfig, VelocityCommand};
use crate::state_machine::{step, NavCommand, NavConfig, NavInputs, NavState, RowPair};
use crate::world::{generate_world, single_row_world, World, WorldConfig};
use crate::ConfigError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// How the trunk rows are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowLayout {
    /// One row on the corridor centerline, worked from the side.
    SingleRow,
    /// Two parallel rows straddling the centerline.
    TwoRow,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub world: WorldConfig,
    pub layout: RowLayout,
    pub camera: CameraConfig,
    pub filter: FilterConfig,
    pub nav: NavConfig,
    pub robot: RobotConfig,
    /// Trunk-to-waypoint standoff distance, meters.
    pub plan_standoff_m: f64,
    pub start_pose: Pose,
    pub n_trials: u64,
    pub base_seed: u64,
    /// Hard per-trial tick budget.
    pub max_ticks: u64,
}

impl Default for Scenario {
    /// Five trunks at 0.8 m spacing in a single row, worked from 0.8 m to
    /// the side. The camera range is raised so the far trunk (4.1 m from the
    /// start pose) is visible during the initial search.
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            layout: RowLayout::SingleRow,
            camera: CameraConfig { max_range_m: 5.0, ..CameraConfig::default() },
            filter: FilterConfig::default(),
            nav: NavConfig::default(),
            robot: RobotConfig::default(),
            plan_standoff_m: 0.8,
            start_pose: Pose::new(-0.8, 0.8, 0.0),
            n_trials: 10,
            base_seed: 0,
            max_ticks: 20_000,
        }
    }
}

impl Scenario {
    /// Default scenario with every noise source disabled.
    pub fn zero_noise() -> Self {
        let mut s = Self::default();
        s.camera.position_noise_std_m = 0.0;
        s.camera.miss_prob = 0.0;
        s.camera.false_positive_rate = 0.0;
        s.robot.actuation_noise_std = 0.0;
        s.world.spacing_jitter_std_m = 0.0;
        s.world.lateral_jitter_std_m = 0.0;
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.world.validate()?;
        self.camera.validate()?;
        self.filter.validate()?;
        self.nav.validate()?;
        self.robot.validate()?;
        if !(self.plan_standoff_m > 0.0) {
            return Err(ConfigError::new("plan_standoff_m must be > 0"));
        }
        if !(self.start_pose.x.is_finite()
            && self.start_pose.y.is_finite()
            && self.start_pose.heading_rad.is_finite())
        {
            return Err(ConfigError::new("start_pose must be finite"));
        }
        if self.n_trials == 0 {
            return Err(ConfigError::new("n_trials must be >= 1"));
        }
        if self.max_ticks == 0 {
            return Err(ConfigError::new("max_ticks must be >= 1"));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("override '{token}': {reason}")]
    BadOverride { token: String, reason: String },
}

/// Recursively overlay `patch` onto `base` (objects merge, anything else
/// replaces).
pub fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Set one dotted-path key (`camera.miss_prob=0.2`) in a scenario document.
///
/// Every path segment must already exist in the document, so typos fail
/// loudly instead of adding dead keys. The value is parsed as JSON first and
/// falls back to a plain string (so `nav.work_side=L` works unquoted).
pub fn apply_override(doc: &mut serde_json::Value, assignment: &str) -> Result<(), ScenarioError> {
    let bad = |reason: &str| ScenarioError::BadOverride {
        token: assignment.to_string(),
        reason: reason.to_string(),
    };
    let (path, raw) = assignment.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    if path.is_empty() {
        return Err(bad("empty key"));
    }
    let mut cursor = &mut *doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| bad("path runs through a non-object"))?;
        let slot = obj
            .get_mut(*segment)
            .ok_or_else(|| bad(&format!("unknown field '{segment}'")))?;
        if i == segments.len() - 1 {
            *slot = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            return Ok(());
        }
        cursor = slot;
    }
    unreachable!("split('.') yields at least one segment");
}

/// Build a scenario from an optional JSON document plus dotted overrides.
///
/// Defaults are materialized first so both the file and the overrides can be
/// sparse.
pub fn scenario_from_parts(
    file_json: Option<&str>,
    overrides: &[String],
) -> Result<Scenario, ScenarioError> {
    let mut doc = serde_json::to_value(Scenario::default()).expect("default serializes");
    if let Some(text) = file_json {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        merge_json(&mut doc, patch);
    }
    for assignment in overrides {
        apply_override(&mut doc, assignment)?;
    }
    let scenario: Scenario = serde_json::from_value(doc)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Ground truth for a scenario. Worlds depend only on the world config, so
/// every trial of an experiment runs in the same world.
pub fn build_world(scenario: &Scenario) -> World {
    match scenario.layout {
        RowLayout::SingleRow => single_row_world(&scenario.world),
        RowLayout::TwoRow => generate_world(&scenario.world),
    }
}

/// Per-trial RNG seed: distinct for every trial index under a fixed base.
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    base_seed.wrapping_add(trial_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// How a trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    /// Every planned target serviced.
    Done,
    /// The machine could not establish the working row.
    SearchFailed,
    /// `max_ticks` elapsed first.
    TickBudgetExceeded,
}

impl TerminalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminalStatus::Done => "done",
            TerminalStatus::SearchFailed => "search_failed",
            TerminalStatus::TickBudgetExceeded => "tick_budget_exceeded",
        }
    }
}

/// One control tick of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// State after this tick's transition.
    pub state: String,
    pub target_id: Option<u64>,
    /// Pose at the start of the tick (before dynamics).
    pub pose: Pose,
    /// Velocity actually applied this tick.
    pub command: VelocityCommand,
}

/// One waypoint arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRecord {
    pub tick: u64,
    /// Cluster the machine was servicing.
    pub target_cluster_id: u64,
    /// Ground-truth trunk nearest the serviced cluster.
    pub trunk_id: u64,
    /// Waypoint the controller tracked.
    pub commanded: Waypoint,
    /// Ground-truth stop point for the trunk.
    pub desired: Point2,
    pub achieved: Pose,
    /// |achieved - desired|, meters. Headline precision number.
    pub error_m: f64,
    /// |achieved - commanded|, meters. Bounded by the arrival tolerance.
    pub tracking_error_m: f64,
}

/// Full record of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub trial_index: u64,
    pub status: TerminalStatus,
    /// Present when the run ended on an internal error; carries its message.
    pub failure_detail: Option<String>,
    pub ticks_used: u64,
    pub arrivals: Vec<ArrivalRecord>,
    pub ticks: Vec<TickRecord>,
}

/// World + log bundle, enough to re-render a trial offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialArtifact {
    pub world: World,
    pub log: TrialLog,
}

fn velocity_for(command: &NavCommand, pose: &Pose, robot: &RobotConfig) -> VelocityCommand {
    match command {
        NavCommand::Stop => VelocityCommand::STOP,
        NavCommand::RotateInPlace { clockwise } => {
            let rate = if *clockwise { -robot.max_yaw_rate_rps } else { robot.max_yaw_rate_rps };
            VelocityCommand::rotate(rate)
        }
        NavCommand::Track(waypoint) => track(pose, waypoint, robot),
    }
}

/// Run one closed-loop trial. Deterministic in `(scenario, trial_index)`.
pub fn run_trial(scenario: &Scenario, trial_index: u64) -> TrialLog {
    let world = build_world(scenario);
    let axis = world.corridor_axis();
    let normal = corridor_normal(axis, scenario.nav.work_side);
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scenario.base_seed, trial_index));

    let mut pose = scenario.start_pose;
    let travel_heading = scenario.start_pose.heading_rad;
    let mut filter = FilterState::new();
    let mut rows = RowPair::new();
    let mut plan = PlanState::new(scenario.nav.work_side, scenario.plan_standoff_m);
    let mut state = NavState::START;

    let mut log = TrialLog {
        trial_index,
        status: TerminalStatus::TickBudgetExceeded,
        failure_detail: None,
        ticks_used: 0,
        arrivals: Vec::new(),
        ticks: Vec::new(),
    };

    for tick in 0..scenario.max_ticks {
        let detections = sense(&world, &pose, &scenario.camera, &mut rng, tick);
        filter.ingest(&detections, &scenario.filter);
        let clusters = filter.confirmed_trunks(&scenario.filter);
        let inputs = NavInputs { pose, clusters: &clusters, travel_heading_rad: travel_heading };

        let outcome = match step(&state, &inputs, &rows, &plan, &scenario.nav) {
            Ok(outcome) => outcome,
            Err(err) => {
                log.status = TerminalStatus::SearchFailed;
                log.failure_detail = Some(err.to_string());
                log.ticks_used = tick;
                return log;
            }
        };

        let velocity = velocity_for(&outcome.command, &pose, &scenario.robot);
        log.ticks.push(TickRecord {
            tick,
            state: outcome.state.name().to_string(),
            target_id: outcome.state.target_id(),
            pose,
            command: velocity,
        });

        if let Some(arrival) = outcome.arrival {
            let cluster = clusters
                .iter()
                .find(|c| c.cluster_id == arrival.target_id)
                .expect("arrived target is confirmed");
            let trunk = world
                .trunks
                .iter()
                .min_by(|a, b| {
                    let da = a.position.distance(cluster.mean_position);
                    let db = b.position.distance(cluster.mean_position);
                    da.partial_cmp(&db).expect("finite distances").then(a.id.cmp(&b.id))
                })
                .expect("world has trunks");
            let desired = trunk.position + normal * scenario.plan_standoff_m;
            let achieved = arrival.achieved;
            log.arrivals.push(ArrivalRecord {
                tick,
                target_cluster_id: arrival.target_id,
                trunk_id: trunk.id,
                commanded: arrival.waypoint,
                desired,
                achieved,
                error_m: achieved.position().distance(desired),
                tracking_error_m: achieved.position().distance(arrival.waypoint.position),
            });
        }

        state = outcome.state;
        rows = outcome.rows;
        plan = outcome.plan;
        log.ticks_used = tick + 1;

        if state == NavState::Done {
            log.status = TerminalStatus::Done;
            return log;
        }

        pose = step_dynamics(&pose, &velocity, &scenario.robot, &mut rng);
    }
    log
}

/// Arrival statistics over a set of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: Vec<TrialSummary>,
    pub n_arrivals: usize,
    /// Mean of `error_m` over all arrivals. NaN when there are none.
    pub mean_error_m: f64,
    /// Population standard deviation of `error_m`.
    pub std_pop_m: f64,
    /// Sample (n-1) standard deviation. NaN when fewer than 2 arrivals.
    pub std_sample_m: f64,
    /// Fraction of trials that finished `Done`.
    pub completion_rate: f64,
}

/// Per-trial slice of the summary (tick traces dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial_index: u64,
    pub status: TerminalStatus,
    pub ticks_used: u64,
    pub arrivals: Vec<ArrivalRecord>,
}

impl ExperimentSummary {
    pub fn from_trials(logs: &[TrialLog]) -> Self {
        let trials: Vec<TrialSummary> = logs
            .iter()
            .map(|log| TrialSummary {
                trial_index: log.trial_index,
                status: log.status,
                ticks_used: log.ticks_used,
                arrivals: log.arrivals.clone(),
            })
            .collect();
        let errors: Vec<f64> =
            trials.iter().flat_map(|t| t.arrivals.iter().map(|a| a.error_m)).collect();
        let n = errors.len();
        let mean = errors.iter().sum::<f64>() / n as f64;
        let var_pop = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
        let std_sample = if n >= 2 {
            (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        let done = trials.iter().filter(|t| t.status == TerminalStatus::Done).count();
        Self {
            n_arrivals: n,
            mean_error_m: mean,
            std_pop_m: var_pop.sqrt(),
            std_sample_m: std_sample,
            completion_rate: done as f64 / trials.len().max(1) as f64,
            trials,
        }
    }

    pub fn all_errors(&self) -> Vec<f64> {
        self.trials.iter().flat_map(|t| t.arrivals.iter().map(|a| a.error_m)).collect()
    }

    /// `Done` when every trial completed; otherwise the first failure status.
    pub fn overall_status(&self) -> TerminalStatus {
        self.trials
            .iter()
            .map(|t| t.status)
            .find(|s| *s != TerminalStatus::Done)
            .unwrap_or(TerminalStatus::Done)
    }
}

/// Run every trial of the scenario and keep the full logs.
pub fn run_trials(scenario: &Scenario) -> Vec<TrialLog> {
    (0..scenario.n_trials).map(|i| run_trial(scenario, i)).collect()
}

/// Run the experiment and aggregate.
pub fn run_experiment(scenario: &Scenario) -> ExperimentSummary {
    ExperimentSummary::from_trials(&run_trials(scenario))
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot parse {path} line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
}

pub const SUMMARY_DETAIL_HEADER: &str = "trial,target_id,wp_x,wp_y,ach_x,ach_y,err_m";
pub const SUMMARY_AGGREGATE_HEADER: &str = "n_arrivals,mean_m,std_pop_m,std_sample_m,completion_rate";

/// Serialize the summary CSV: one row per arrival, then aggregate stats.
///
/// `wp_x/wp_y` is the ground-truth stop point each `err_m` is measured
/// against, so `err_m == hypot(wp - ach)` holds row by row.
pub fn write_summary_csv<W: Write>(mut w: W, summary: &ExperimentSummary) -> io::Result<()> {
    writeln!(w, "{SUMMARY_DETAIL_HEADER}")?;
    for trial in &summary.trials {
        for a in &trial.arrivals {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                trial.trial_index,
                a.target_cluster_id,
                a.desired.x,
                a.desired.y,
                a.achieved.x,
                a.achieved.y,
                a.error_m
            )?;
        }
    }
    writeln!(w, "{SUMMARY_AGGREGATE_HEADER}")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        summary.n_arrivals,
        summary.mean_error_m,
        summary.std_pop_m,
        summary.std_sample_m,
        summary.completion_rate
    )?;
    Ok(())
}

/// Write the summary CSV to a file.
pub fn export_summary(summary: &ExperimentSummary, path: &Path) -> Result<(), ExportError> {
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, summary).expect("in-memory write cannot fail");
    fs::write(path, buf).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

/// One parsed detail row of a summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub trial: u64,
    pub target_id: u64,
    pub waypoint: Point2,
    pub achieved: Point2,
    pub error_m: f64,
}

/// Parsed summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSummary {
    pub rows: Vec<SummaryRow>,
    pub n_arrivals: usize,
    pub mean_error_m: f64,
    pub std_pop_m: f64,
    pub std_sample_m: f64,
    pub completion_rate: f64,
}

/// Parse a file produced by [`export_summary`]. Used as the round-trip oracle
/// for the export path and by external tooling.
pub fn read_summary_csv(path: &Path) -> Result<ParsedSummary, ExportError> {
    let io_err = |source| ExportError::Io { path: path.to_path_buf(), source };
    let parse_err = |line: usize, reason: &str| ExportError::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut lines = io::BufReader::new(file).lines().enumerate();

    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let first = first.map_err(io_err)?;
    if first != SUMMARY_DETAIL_HEADER {
        return Err(parse_err(1, "bad detail header"));
    }

    let mut rows = Vec::new();
    let mut aggregate: Option<(usize, String)> = None;
    for (idx, line) in &mut lines {
        let line = line.map_err(io_err)?;
        if line == SUMMARY_AGGREGATE_HEADER {
            let (aidx, aline) =
                lines.next().ok_or_else(|| parse_err(idx + 2, "missing aggregate row"))?;
            aggregate = Some((aidx + 1, aline.map_err(io_err)?));
            break;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(idx + 1, "expected 7 fields"));
        }
        let num = |i: usize| -> Result<f64, ExportError> {
            fields[i].parse().map_err(|_| parse_err(idx + 1, "bad number"))
        };
        rows.push(SummaryRow {
            trial: fields[0].parse().map_err(|_| parse_err(idx + 1, "bad trial"))?,
            target_id: fields[1].parse().map_err(|_| parse_err(idx + 1, "bad target"))?,
            waypoint: Point2::new(num(2)?, num(3)?),
            achieved: Point2::new(num(4)?, num(5)?),
            error_m: num(6)?,
        });
    }
    let (aline_no, aline) = aggregate.ok_or_else(|| parse_err(rows.len() + 2, "missing aggregate header"))?;
    let fields: Vec<&str> = aline.split(',').collect();
    if fields.len() != 5 {
        return Err(parse_err(aline_no, "expected 5 aggregate fields"));
    }
    let num = |i: usize| -> Result<f64, ExportError> {
        fields[i].parse().map_err(|_| parse_err(aline_no, "bad number"))
    };
    Ok(ParsedSummary {
        n_arrivals: fields[0].parse().map_err(|_| parse_err(aline_no, "bad count"))?,
        mean_error_m: num(1)?,
        std_pop_m: num(2)?,
        std_sample_m: num(3)?,
        completion_rate: num(4)?,
        rows,
    })
}

pub const RUN_LOG_HEADER: &str = "tick,state,target_id,pose_x,pose_y,pose_theta";

/// Per-tick trace as CSV.
pub fn write_run_log_csv<W: Write>(mut w: W, log: &TrialLog) -> io::Result<()> {
    writeln!(w, "{RUN_LOG_HEADER}")?;
    for t in &log.ticks {
        let target = t.target_id.map(|id| id.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{}", t.tick, t.state, target, t.pose.x, t.pose.y, t.pose.heading_rad)?;
    }
    Ok(())
}
