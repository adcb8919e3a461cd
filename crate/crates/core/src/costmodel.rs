//! Time-based cost model.
//!
//! Every cost is a time in seconds: driving across a cell takes
//! `cell_size / speed` (times `sqrt(2)` on a diagonal), and climbing or
//! descending a step takes a per-meter time on top of that. The search
//! heuristic is a distance-over-speed estimate and is kept free of climbing
//! terms so that it stays admissible; climbing is charged on edges.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, HeightGrid, MoveKind, TraversalClass};

/// Physical capabilities of a robot.
///
/// Lengths are meters, times seconds, speeds m/s, angular rates rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotProfile {
    /// Cruise speed used by the planners.
    pub speed: f64,
    /// Seconds per meter of climb.
    pub t_up: f64,
    /// Seconds per meter of descent.
    pub t_down: f64,
    /// Steps strictly below this height are driven over without climbing.
    pub max_direct_height: f64,
    /// Steps strictly above this height cannot be overcome.
    pub max_overcome_height: f64,
    pub footprint_radius: f64,
    pub v_max: f64,
    pub v_min: f64,
    pub omega_max: f64,
    pub accel_v: f64,
    pub accel_omega: f64,
    /// When false the robot behaves like a planar vehicle: every step that
    /// would need climbing is blocked.
    pub overcoming_enabled: bool,
}

impl Default for RobotProfile {
    fn default() -> Self {
        RobotProfile {
            speed: 1.0,
            t_up: 4.0,
            t_down: 3.0,
            max_direct_height: 0.05,
            max_overcome_height: 0.5,
            footprint_radius: 0.2,
            v_max: 1.0,
            v_min: 0.0,
            omega_max: 2.0,
            accel_v: 2.0,
            accel_omega: 6.0,
            overcoming_enabled: true,
        }
    }
}

impl RobotProfile {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("speed", self.speed),
            ("t_up", self.t_up),
            ("t_down", self.t_down),
            ("max_direct_height", self.max_direct_height),
            ("max_overcome_height", self.max_overcome_height),
            ("footprint_radius", self.footprint_radius),
            ("v_max", self.v_max),
            ("v_min", self.v_min),
            ("omega_max", self.omega_max),
            ("accel_v", self.accel_v),
            ("accel_omega", self.accel_omega),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(format!("profile.{name}"), "must be finite"));
            }
        }
        let checks = [
            ("speed", self.speed > 0.0, "must be positive"),
            ("t_up", self.t_up >= 0.0, "must be non-negative"),
            ("t_down", self.t_down >= 0.0, "must be non-negative"),
            (
                "max_direct_height",
                self.max_direct_height >= 0.0,
                "must be non-negative",
            ),
            (
                "max_overcome_height",
                self.max_overcome_height >= self.max_direct_height,
                "must be at least max_direct_height",
            ),
            ("footprint_radius", self.footprint_radius > 0.0, "must be positive"),
            ("v_max", self.v_max >= self.v_min, "must be at least v_min"),
            ("omega_max", self.omega_max >= 0.0, "must be non-negative"),
            ("accel_v", self.accel_v > 0.0, "must be positive"),
            ("accel_omega", self.accel_omega > 0.0, "must be positive"),
        ];
        for (name, ok, reason) in checks {
            if !ok {
                return Err(Error::invalid(format!("profile.{name}"), reason));
            }
        }
        Ok(())
    }

    /// Same robot with climbing disabled.
    pub fn planar(&self) -> RobotProfile {
        RobotProfile {
            overcoming_enabled: false,
            ..self.clone()
        }
    }

    /// Class of a move whose target is `dh` meters above its source.
    #[inline]
    pub fn classify_height_step(&self, dh: f64, kind: MoveKind) -> TraversalClass {
        let dh = dh.abs();
        if dh > self.max_overcome_height {
            TraversalClass::Blocked
        } else if dh < self.max_direct_height {
            TraversalClass::Direct
        } else if kind.is_diagonal() || !self.overcoming_enabled {
            TraversalClass::Blocked
        } else {
            TraversalClass::Overcome
        }
    }

    /// True when a step of `dh` meters is too tall to climb at all,
    /// regardless of the approach direction.
    #[inline]
    pub fn is_insurmountable(&self, dh: f64) -> bool {
        let dh = dh.abs();
        dh > self.max_overcome_height || (!self.overcoming_enabled && dh >= self.max_direct_height)
    }

    #[inline]
    pub(crate) fn climb_time(&self, dh: f64) -> f64 {
        if dh.abs() < self.max_direct_height {
            0.0
        } else if dh > 0.0 {
            dh * self.t_up
        } else {
            -dh * self.t_down
        }
    }
}

/// Heuristic distance metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Shortest 8-connected distance; admissible for this cost model.
    #[default]
    Octile,
    /// Sum of axis distances; overestimates when diagonals are available.
    Manhattan,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "octile" => Ok(Metric::Octile),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::invalid("metric", format!("unknown metric `{other}`"))),
        }
    }
}

/// Cost of one edge of the search graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub travel_time: f64,
    pub overcome_time: f64,
    pub total: f64,
}

/// Time spent climbing (`dh > 0`) or descending (`dh < 0`) a step.
///
/// Steps lower than `max_direct_height` cost nothing. The caller classifies
/// the move first; a step taller than `max_overcome_height` is rejected.
pub fn overcoming_time(dh: f64, profile: &RobotProfile) -> Result<f64> {
    if !dh.is_finite() || dh.abs() > profile.max_overcome_height {
        return Err(Error::Contract(format!(
            "height step {dh} m exceeds the overcoming limit {} m",
            profile.max_overcome_height
        )));
    }
    Ok(profile.climb_time(dh))
}

#[inline]
pub(crate) fn octile_cells(dx: usize, dy: usize) -> f64 {
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) as f64 + SQRT_2 * lo as f64
}

/// Estimated time to reach `goal` from `from`.
pub fn heuristic_time(
    from: CellIndex,
    goal: CellIndex,
    grid: &HeightGrid,
    profile: &RobotProfile,
    metric: Metric,
) -> f64 {
    let dx = from.x.abs_diff(goal.x);
    let dy = from.y.abs_diff(goal.y);
    let cells = match metric {
        Metric::Manhattan => (dx + dy) as f64,
        Metric::Octile => octile_cells(dx, dy),
    };
    cells * grid.cell_size() / profile.speed
}

#[inline]
pub(crate) fn travel_time(kind: MoveKind, grid: &HeightGrid, profile: &RobotProfile) -> f64 {
    match kind {
        MoveKind::Cardinal => grid.cell_size() / profile.speed,
        MoveKind::Diagonal => SQRT_2 * grid.cell_size() / profile.speed,
    }
}

#[inline]
pub(crate) fn edge_total(
    grid: &HeightGrid,
    from: CellIndex,
    to: CellIndex,
    kind: MoveKind,
    class: TraversalClass,
    profile: &RobotProfile,
) -> f64 {
    let travel = travel_time(kind, grid, profile);
    if class == TraversalClass::Overcome {
        travel + profile.climb_time(grid.elevation(to) - grid.elevation(from))
    } else {
        travel
    }
}

/// Cost of moving from `from` to the adjacent `to`.
pub fn step_cost(
    grid: &HeightGrid,
    from: CellIndex,
    to: CellIndex,
    kind: MoveKind,
    class: TraversalClass,
    profile: &RobotProfile,
) -> Result<EdgeCost> {
    if class == TraversalClass::Blocked {
        return Err(Error::Contract(format!("no cost for blocked move {from:?} -> {to:?}")));
    }
    grid.check(from)?;
    grid.check(to)?;
    if from.move_kind_to(to) != Some(kind) {
        return Err(Error::Contract(format!("{from:?} -> {to:?} is not a {kind:?} move")));
    }
    let travel_time = travel_time(kind, grid, profile);
    let overcome_time = match class {
        TraversalClass::Overcome => overcoming_time(grid.elevation(to) - grid.elevation(from), profile)?,
        _ => 0.0,
    };
    Ok(EdgeCost {
        travel_time,
        overcome_time,
        total: travel_time + overcome_time,
    })
}

/// Evaluation function of the best-first search: elapsed plus estimated time.
#[inline]
pub fn evaluate_f(g_time: f64, h_time: f64) -> f64 {
    g_time + h_time
}
