//! Detection filter: greedy nearest-cluster association with rolling means.
//!
//! Raw per-frame detections are noisy and contain occasional false positives.
//! The filter maintains a set of clusters, one per physical trunk in the happy
//! path. Each incoming detection either joins the nearest cluster within the
//! gate radius, updating that cluster's rolling mean, or spawns a new cluster.
//! Clusters are never deleted; sporadic false positives simply never reach the
//! confirmation threshold.
//!
//! By default the mean is cumulative over every associated detection. An
//! optional window limits the mean to the last N detections, which lets the
//! estimate track slow drift at the cost of higher variance.

use crate::geometry::Point2;
use crate::perception::TrunkDetection;
use crate::ConfigError;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Association and confirmation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Max distance from a cluster mean for a detection to join it. Meters.
    pub gate_radius_m: f64,
    /// Observations a cluster needs before it counts as a confirmed trunk.
    pub min_observations: usize,
    /// `None`: cumulative mean over all observations. `Some(n)`: mean over the
    /// last `n` observations only.
    pub rolling_window: Option<usize>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { gate_radius_m: 0.4, min_observations: 3, rolling_window: None }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gate_radius_m > 0.0) {
            return Err(ConfigError::new("filter.gate_radius_m must be > 0"));
        }
        if self.min_observations == 0 {
            return Err(ConfigError::new("filter.min_observations must be >= 1"));
        }
        if let Some(w) = self.rolling_window {
            if w == 0 {
                return Err(ConfigError::new("filter.rolling_window must be >= 1 when set"));
            }
        }
        Ok(())
    }
}

/// Snapshot of one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrunkCluster {
    #[serde(rename = "id")]
    pub cluster_id: u64,
    #[serde(rename = "mean")]
    pub mean_position: Point2,
    #[serde(rename = "count")]
    pub observation_count: usize,
    #[serde(rename = "last_seen")]
    pub last_seen_frame: u64,
}

/// How one detection was resolved during [`FilterState::ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Association {
    /// Index of the detection in the ingested slice.
    pub detection_index: usize,
    /// Cluster the detection joined (or spawned).
    pub cluster_id: u64,
    /// True when the detection started a new cluster.
    pub is_new: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Cluster {
    mean: Point2,
    count: usize,
    last_seen: u64,
    /// Recent positions, kept only in windowed mode.
    window: VecDeque<Point2>,
}

/// Mutable filter state. Cluster ids are dense indices in creation order and
/// stay valid forever since clusters are never removed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterState {
    clusters: Vec<Cluster>,
}

impl FilterState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Total detections absorbed into `cluster_id`.
    pub fn observation_count(&self, cluster_id: u64) -> Option<usize> {
        self.clusters.get(cluster_id as usize).map(|c| c.count)
    }

    /// Greedy in-order association of one frame's detections.
    ///
    /// For each detection, the nearest cluster mean within `gate_radius_m`
    /// wins; distance ties go to the lowest cluster id. A detection outside
    /// every gate spawns a new cluster seeded at the detection. Means update
    /// immediately, so later detections in the same call see the shifted
    /// means.
    pub fn ingest(&mut self, detections: &[TrunkDetection], config: &FilterConfig) -> Vec<Association> {
        let mut out = Vec::with_capacity(detections.len());
        for (i, det) in detections.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for (idx, c) in self.clusters.iter().enumerate() {
                let d = c.mean.distance(det.position);
                if d > config.gate_radius_m {
                    continue;
                }
                // Strict < keeps the lowest id on exact ties.
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((idx, d));
                }
            }
            let (cluster_id, is_new) = match best {
                Some((idx, _)) => {
                    let c = &mut self.clusters[idx];
                    c.count += 1;
                    c.last_seen = det.frame_index;
                    match config.rolling_window {
                        None => {
                            let delta = det.position - c.mean;
                            c.mean = c.mean + delta * (1.0 / c.count as f64);
                        }
                        Some(w) => {
                            c.window.push_back(det.position);
                            while c.window.len() > w {
                                c.window.pop_front();
                            }
                            let mut sum = Point2::ZERO;
                            for p in &c.window {
                                sum = sum + *p;
                            }
                            c.mean = sum * (1.0 / c.window.len() as f64);
                        }
                    }
                    (idx as u64, false)
                }
                None => {
                    let id = self.clusters.len() as u64;
                    let mut window = VecDeque::new();
                    if config.rolling_window.is_some() {
                        window.push_back(det.position);
                    }
                    self.clusters.push(Cluster {
                        mean: det.position,
                        count: 1,
                        last_seen: det.frame_index,
                        window,
                    });
                    (id, true)
                }
            };
            out.push(Association { detection_index: i, cluster_id, is_new });
        }
        out
    }

    /// Snapshot of every cluster, in id order.
    pub fn clusters(&self) -> Vec<TrunkCluster> {
        self.clusters
            .iter()
            .enumerate()
            .map(|(id, c)| TrunkCluster {
                cluster_id: id as u64,
                mean_position: c.mean,
                observation_count: c.count,
                last_seen_frame: c.last_seen,
            })
            .collect()
    }

    /// Clusters with at least `min_observations` detections, in id order.
    pub fn confirmed_trunks(&self, config: &FilterConfig) -> Vec<TrunkCluster> {
        self.clusters()
            .into_iter()
            .filter(|c| c.observation_count >= config.min_observations)
            .collect()
    }

    /// JSON dump of all clusters, for debugging and external tooling.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.clusters()).expect("clusters serialize")
    }
}
