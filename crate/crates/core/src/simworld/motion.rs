//! Planar straight-line motion with footprint collision sweeps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Rect, RobotState, WorldScene, ROBOT_RADIUS};
use crate::geometry::{normalize_angle, RobotPose, Vec3};

/// Backoff from an obstacle boundary when a sweep is blocked, meters.
const BLOCK_BACKOFF: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    #[error("target ({0:.3}, {1:.3}) is outside the walkable bounds")]
    TargetOutOfBounds(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MoveOutcome {
    Reached,
    Blocked { at: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveResult {
    pub outcome: MoveOutcome,
    /// Distance actually traveled, meters.
    pub path_length: f64,
}

impl MoveResult {
    pub fn reached(&self) -> bool {
        matches!(self.outcome, MoveOutcome::Reached)
    }
}

/// Entry parameter of the segment p0 + t*(p1-p0), t in (0, 1], into an
/// axis-aligned rectangle, or `None` when the segment stays clear.
fn segment_rect_entry(p0: (f64, f64), p1: (f64, f64), rect: &Rect) -> Option<f64> {
    let d = (p1.0 - p0.0, p1.1 - p0.1);
    let mut t_enter: f64 = 0.0;
    let mut t_exit: f64 = 1.0;
    for (o, d, lo, hi) in [
        (p0.0, d.0, rect.min_x, rect.max_x),
        (p0.1, d.1, rect.min_y, rect.max_y),
    ] {
        if d.abs() < 1e-15 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let t1 = (lo - o) / d;
        let t2 = (hi - o) / d;
        t_enter = t_enter.max(t1.min(t2));
        t_exit = t_exit.min(t1.max(t2));
        if t_enter > t_exit {
            return None;
        }
    }
    Some(t_enter)
}

/// True when the straight segment between two floor points stays clear of
/// every obstacle footprint (expanded by the robot radius).
pub fn path_clear(scene: &WorldScene, from: (f64, f64), to: (f64, f64)) -> bool {
    !scene.objects.iter().any(|obj| {
        !obj.category.traversable()
            && segment_rect_entry(from, to, &obj.footprint().expand(ROBOT_RADIUS)).is_some()
    })
}

/// Move the robot in a straight line toward `target`, stopping at the first
/// obstacle. The robot ends facing its direction of travel.
pub fn move_to(
    scene: &WorldScene,
    robot: &mut RobotState,
    target: Vec3,
) -> Result<MoveResult, MotionError> {
    let inner = scene.bounds.shrink(ROBOT_RADIUS);
    if !inner.contains(target.x, target.y) {
        return Err(MotionError::TargetOutOfBounds(target.x, target.y));
    }

    let p0 = robot.position_xy();
    let p1 = (target.x, target.y);
    let total = ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt();
    if total < 1e-12 {
        return Ok(MoveResult { outcome: MoveOutcome::Reached, path_length: 0.0 });
    }

    let mut t_block: Option<f64> = None;
    for obj in &scene.objects {
        if obj.category.traversable() {
            continue;
        }
        let swept = obj.footprint().expand(ROBOT_RADIUS);
        if let Some(t) = segment_rect_entry(p0, p1, &swept) {
            if t_block.map(|b| t < b).unwrap_or(true) {
                t_block = Some(t);
            }
        }
    }

    let (end, traveled, outcome) = match t_block {
        None => (p1, total, MoveOutcome::Reached),
        Some(t) => {
            let free = (t * total - BLOCK_BACKOFF).max(0.0);
            let k = free / total;
            let at = (p0.0 + k * (p1.0 - p0.0), p0.1 + k * (p1.1 - p0.1));
            (at, free, MoveOutcome::Blocked { at: Vec3::new(at.0, at.1, 0.0) })
        }
    };

    let heading = if traveled > 1e-9 {
        normalize_angle((p1.1 - p0.1).atan2(p1.0 - p0.0))
    } else {
        robot.pose.heading()
    };
    robot.pose = RobotPose::planar(end.0, end.1, heading);

    Ok(MoveResult { outcome, path_length: traveled })
}
