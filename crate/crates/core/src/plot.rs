//! SVG rendering of a trial: trunks, robot path, waypoints, and arrivals.
//!
//! Pure string building with fixed-precision coordinates, so the same
//! artifact always renders byte-identical output.

use crate::geometry::Point2;
use crate::harness::{TrialArtifact, TrialLog};
use crate::world::{Side, World};
use std::fmt::Write;

const SCALE_PX_PER_M: f64 = 120.0;
const MARGIN_M: f64 = 0.5;
/// Cap on path points; longer traces are decimated evenly.
const MAX_PATH_POINTS: usize = 2000;

struct Frame {
    min: Point2,
    max: Point2,
}

impl Frame {
    fn grow(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    fn to_px(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.min.x + MARGIN_M) * SCALE_PX_PER_M,
            (self.max.y - p.y + MARGIN_M) * SCALE_PX_PER_M,
        )
    }

    fn size_px(&self) -> (f64, f64) {
        (
            (self.max.x - self.min.x + 2.0 * MARGIN_M) * SCALE_PX_PER_M,
            (self.max.y - self.min.y + 2.0 * MARGIN_M) * SCALE_PX_PER_M,
        )
    }
}

/// Render one trial to an SVG document.
pub fn trial_svg(world: &World, log: &TrialLog) -> String {
    let mut frame = Frame {
        min: Point2::new(f64::INFINITY, f64::INFINITY),
        max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    for t in &world.trunks {
        frame.grow(t.position);
    }
    for t in &log.ticks {
        frame.grow(t.pose.position());
    }
    for a in &log.arrivals {
        frame.grow(a.commanded.position);
        frame.grow(a.desired);
    }
    if !frame.min.is_finite() {
        frame = Frame { min: Point2::ZERO, max: Point2::new(1.0, 1.0) };
    }

    let (w, h) = frame.size_px();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.1} {h:.1}" width="{w:.1}" height="{h:.1}">"#
    );
    let _ = writeln!(svg, r##"<rect width="{w:.1}" height="{h:.1}" fill="#ffffff"/>"##);

    // Robot path, decimated to keep files manageable.
    if log.ticks.len() >= 2 {
        let stride = (log.ticks.len() / MAX_PATH_POINTS).max(1);
        let mut points = String::new();
        for (i, t) in log.ticks.iter().enumerate() {
            if i % stride != 0 && i != log.ticks.len() - 1 {
                continue;
            }
            let (x, y) = frame.to_px(t.pose.position());
            let _ = write!(points, "{x:.1},{y:.1} ");
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#2563eb" stroke-width="2"/>"##,
            points.trim_end()
        );
    }

    // Trunks, colored by corridor side.
    for t in &world.trunks {
        let (x, y) = frame.to_px(t.position);
        let fill = match t.side {
            Side::Left => "#8a5a2b",
            Side::Right => "#5b3a18",
        };
        let r = 0.06 * SCALE_PX_PER_M;
        let _ = writeln!(svg, r##"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="{fill}"/>"##);
    }

    // Commanded waypoints (crosses) and achieved stops (dots).
    for a in &log.arrivals {
        let (x, y) = frame.to_px(a.commanded.position);
        let d = 0.08 * SCALE_PX_PER_M;
        let _ = writeln!(
            svg,
            r##"<path d="M {x0:.1} {y:.1} H {x1:.1} M {x:.1} {y0:.1} V {y1:.1}" stroke="#16a34a" stroke-width="2" fill="none"/>"##,
            x0 = x - d,
            x1 = x + d,
            y0 = y - d,
            y1 = y + d,
        );
        let (ax, ay) = frame.to_px(a.achieved.position());
        let _ = writeln!(svg, r##"<circle cx="{ax:.1}" cy="{ay:.1}" r="3.0" fill="#dc2626"/>"##);
    }

    // Start pose marker.
    if let Some(first) = log.ticks.first() {
        let (x, y) = frame.to_px(first.pose.position());
        let _ = writeln!(svg, r##"<rect x="{:.1}" y="{:.1}" width="8" height="8" fill="#111111"/>"##, x - 4.0, y - 4.0);
    }

    let _ = writeln!(
        svg,
        r##"<text x="8" y="16" font-family="monospace" font-size="12" fill="#111111">trial {} status={} arrivals={} ticks={}</text>"##,
        log.trial_index,
        log.status.as_str(),
        log.arrivals.len(),
        log.ticks_used
    );
    svg.push_str("</svg>\n");
    svg
}

/// Render a saved artifact (world + log).
pub fn artifact_svg(artifact: &TrialArtifact) -> String {
    trial_svg(&artifact.world, &artifact.log)
}
