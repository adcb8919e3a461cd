//! Plan-then-track executor.
//!
//! A global plan is computed on the known height map. The robot then drives
//! it in closed loop: a dynamic-window controller steers toward a lookahead
//! waypoint while avoiding the known cells it cannot climb and any unknown
//! obstacles that come into sensing range. Steps the robot can climb are not
//! obstacles; crossing one holds the robot in place for its climbing time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::costmodel::{Metric, RobotProfile};
use crate::dwa::{dwa_step, integrate, normalize_angle, DwaParams, Obstacle, RobotState, VelocityCommand};
use crate::error::{Error, Result};
use crate::gridmap::{read_map_file, CellIndex, HeightGrid, NEIGHBOR_OFFSETS};
use crate::planner::{plan, PlanOutcome, Strategy};

type Point = (f64, f64);

/// Obstacle unknown to the planner. Without waypoints it moves in a straight
/// line at `velocity`; with waypoints it patrols the closed loop
/// `position -> waypoints[0] -> .. -> position` at the speed `|velocity|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicObstacle {
    pub position: (f64, f64),
    pub radius: f64,
    #[serde(default)]
    pub velocity: (f64, f64),
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<(f64, f64)>,
}

impl DynamicObstacle {
    pub fn fixed(x: f64, y: f64, radius: f64) -> Self {
        DynamicObstacle {
            position: (x, y),
            radius,
            velocity: (0.0, 0.0),
            waypoints: Vec::new(),
        }
    }

    fn validate(&self, i: usize) -> Result<()> {
        let finite = [self.position.0, self.position.1, self.velocity.0, self.velocity.1]
            .iter()
            .chain(self.waypoints.iter().flat_map(|w| [&w.0, &w.1]))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(
                format!("unknown_obstacles[{i}]"),
                "motion must be finite",
            ));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(
                format!("unknown_obstacles[{i}].radius"),
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.velocity == (0.0, 0.0)
    }

    /// Disc with its position and instantaneous velocity at time `t`.
    pub fn at(&self, t: f64) -> Obstacle {
        let (vx, vy) = self.velocity;
        let speed = vx.hypot(vy);
        if self.waypoints.is_empty() || speed == 0.0 {
            return Obstacle {
                x: self.position.0 + vx * t,
                y: self.position.1 + vy * t,
                radius: self.radius,
                vx,
                vy,
            };
        }
        let mut loop_pts = vec![self.position];
        loop_pts.extend(self.waypoints.iter().copied());
        let legs: Vec<(Point, Point, f64)> = (0..loop_pts.len())
            .map(|i| {
                let a = loop_pts[i];
                let b = loop_pts[(i + 1) % loop_pts.len()];
                (a, b, (b.0 - a.0).hypot(b.1 - a.1))
            })
            .collect();
        let perimeter: f64 = legs.iter().map(|l| l.2).sum();
        if perimeter == 0.0 {
            return Obstacle::fixed(self.position.0, self.position.1, self.radius);
        }
        let mut s = (speed * t) % perimeter;
        for &(a, b, len) in &legs {
            if s <= len && len > 0.0 {
                let f = s / len;
                let (ux, uy) = ((b.0 - a.0) / len, (b.1 - a.1) / len);
                return Obstacle {
                    x: a.0 + (b.0 - a.0) * f,
                    y: a.1 + (b.1 - a.1) * f,
                    radius: self.radius,
                    vx: ux * speed,
                    vy: uy * speed,
                };
            }
            s -= len;
        }
        Obstacle::fixed(self.position.0, self.position.1, self.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingParams {
    /// Unknown obstacles closer than this (m, to their edge) are sensed.
    pub sensing_radius_m: f64,
    /// Lookahead distance of the active waypoint, in cells.
    pub lookahead_cells: f64,
    /// Cross-track distance that triggers a global replan, in cells.
    pub replan_cells: f64,
}

impl Default for TrackingParams {
    fn default() -> Self {
        TrackingParams {
            sensing_radius_m: 5.0,
            lookahead_cells: 3.0,
            replan_cells: 3.0,
        }
    }
}

fn default_sim_dt() -> f64 {
    0.1
}

fn default_max_sim_time() -> f64 {
    300.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Map file, relative to the scenario file.
    pub map: String,
    pub start: CellIndex,
    pub goal: CellIndex,
    #[serde(default)]
    pub profile: RobotProfile,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub unknown_obstacles: Vec<DynamicObstacle>,
    #[serde(default)]
    pub dwa: DwaParams,
    #[serde(default)]
    pub tracking: TrackingParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sim_dt")]
    pub sim_dt_s: f64,
    #[serde(default = "default_max_sim_time")]
    pub max_sim_time_s: f64,
}

impl Scenario {
    /// Scenario on `map` with every optional field at its default.
    pub fn new(map: impl Into<String>, start: CellIndex, goal: CellIndex) -> Self {
        Scenario {
            map: map.into(),
            start,
            goal,
            profile: RobotProfile::default(),
            strategy: Strategy::default(),
            metric: Metric::default(),
            unknown_obstacles: Vec::new(),
            dwa: DwaParams::default(),
            tracking: TrackingParams::default(),
            seed: 0,
            sim_dt_s: default_sim_dt(),
            max_sim_time_s: default_max_sim_time(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("scenario serializes");
        out.push(b'\n');
        out
    }

    /// Checks the scenario against the map it will run on.
    pub fn validate(&self, grid: &HeightGrid) -> Result<()> {
        grid.check(self.start)
            .map_err(|e| Error::invalid("start", e.to_string()))?;
        grid.check(self.goal)
            .map_err(|e| Error::invalid("goal", e.to_string()))?;
        self.profile.validate()?;
        self.dwa.validate()?;
        if !(self.sim_dt_s > 0.0 && self.sim_dt_s.is_finite()) {
            return Err(Error::invalid("sim_dt_s", "must be positive"));
        }
        if !(self.max_sim_time_s > 0.0 && self.max_sim_time_s.is_finite()) {
            return Err(Error::invalid("max_sim_time_s", "must be positive"));
        }
        let t = &self.tracking;
        for (name, v) in [
            ("tracking.sensing_radius_m", t.sensing_radius_m),
            ("tracking.lookahead_cells", t.lookahead_cells),
            ("tracking.replan_cells", t.replan_cells),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        for (i, o) in self.unknown_obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        Ok(())
    }

    /// Goal tolerance in meters on `grid`.
    pub fn goal_tolerance(&self, grid: &HeightGrid) -> f64 {
        self.dwa.goal_tolerance.unwrap_or(0.5 * grid.cell_size())
    }
}

/// A scenario read from disk together with its map.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub grid: HeightGrid,
    pub map_path: PathBuf,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let scenario = Scenario::from_json(&bytes)?;
    let map_path = path.parent().unwrap_or(Path::new(".")).join(&scenario.map);
    let grid = read_map_file(&map_path)?;
    scenario.validate(&grid)?;
    Ok(LoadedScenario {
        scenario,
        grid,
        map_path,
    })
}

/// Local controller used while tracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    #[default]
    Dwa,
    /// Heading-proportional path follower that ignores obstacles.
    Follow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    WaypointReached { index: usize, cell: CellIndex },
    ObstacleDetected { obstacle: usize },
    ClimbStarted { cell: CellIndex, duration_s: f64 },
    Replanned { from: CellIndex, path_steps: usize },
    Collision { with: String },
    GoalReached,
    Timeout,
    NoPath,
}

impl EventKind {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            EventKind::Collision { .. } | EventKind::GoalReached | EventKind::Timeout | EventKind::NoPath
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Robot state at a simulation instant, serialized as
/// `[t, x, y, theta, v, omega]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct Sample {
    pub t: f64,
    pub state: RobotState,
}

impl From<[f64; 6]> for Sample {
    fn from(a: [f64; 6]) -> Self {
        Sample {
            t: a[0],
            state: RobotState {
                x: a[1],
                y: a[2],
                theta: a[3],
                v: a[4],
                omega: a[5],
            },
        }
    }
}

impl From<Sample> for [f64; 6] {
    fn from(s: Sample) -> Self {
        [s.t, s.state.x, s.state.y, s.state.theta, s.state.v, s.state.omega]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
    NoPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLog {
    pub controller: Controller,
    pub outcome: Outcome,
    /// Cost of the initial global plan, when one was found.
    pub plan_time_s: Option<f64>,
    /// Cells of the initial global plan.
    pub plan_path: Vec<CellIndex>,
    pub trajectory: Vec<Sample>,
    pub events: Vec<Event>,
    /// Smallest footprint-to-obstacle gap over the run; `None` when no
    /// obstacle was ever considered.
    pub min_clearance_m: Option<f64>,
    pub elapsed_sim_time_s: f64,
    /// Largest distance between the robot and the path it was following.
    pub max_cross_track_m: f64,
}

impl ExecutionLog {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("log serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn has_event(&self, pred: impl Fn(&EventKind) -> bool) -> bool {
        self.events.iter().any(|e| pred(&e.kind))
    }

    /// All obstacles the run has to stay clear of for the given scenario
    /// are recorded through `min_clearance_m`; this is the collision flag.
    pub fn collided(&self) -> bool {
        self.outcome == Outcome::Collision
    }
}

fn cell_disc(grid: &HeightGrid, c: CellIndex) -> Obstacle {
    let (x, y) = grid.cell_center(c);
    Obstacle::fixed(x, y, 0.5 * grid.cell_size())
}

/// Known cells that border the corridor around `path` and cannot be
/// climbed from it, in row-major order.
///
/// The corridor is the path plus every cell one non-insurmountable step away
/// from it. Cells that are only surmountable never appear.
pub fn blocked_corridor_cells(grid: &HeightGrid, path: &[CellIndex], profile: &RobotProfile) -> Vec<CellIndex> {
    let n = grid.len();
    let mut corridor = vec![false; n];
    for &p in path {
        corridor[grid.index_of(p)] = true;
        for &(dx, dy) in &NEIGHBOR_OFFSETS {
            if let Some(c) = grid.step(p, dx, dy) {
                if !profile.is_insurmountable(grid.elevation(c) - grid.elevation(p)) {
                    corridor[grid.index_of(c)] = true;
                }
            }
        }
    }
    let mut blocked = vec![false; n];
    for i in 0..n {
        if !corridor[i] {
            continue;
        }
        let k = grid.cell_at(i);
        for &(dx, dy) in &NEIGHBOR_OFFSETS {
            if let Some(c) = grid.step(k, dx, dy) {
                let j = grid.index_of(c);
                if !corridor[j] && profile.is_insurmountable(grid.elevation(c) - grid.elevation(k)) {
                    blocked[j] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| blocked[i]).map(|i| grid.cell_at(i)).collect()
}

/// Obstacle set handed to the local planner: corridor-bordering cells the
/// robot cannot climb, as discs at their centers, followed by the unknown
/// obstacles at time `t`.
pub fn build_obstacle_overlay(
    grid: &HeightGrid,
    path: &[CellIndex],
    unknown: &[DynamicObstacle],
    profile: &RobotProfile,
    t: f64,
) -> Vec<Obstacle> {
    let mut out: Vec<Obstacle> = blocked_corridor_cells(grid, path, profile)
        .into_iter()
        .map(|c| cell_disc(grid, c))
        .collect();
    out.extend(unknown.iter().map(|o| o.at(t)));
    out
}

/// Distance from `(x, y)` to the polyline through the centers of `path`.
pub fn cross_track(grid: &HeightGrid, path: &[CellIndex], x: f64, y: f64) -> f64 {
    let pts: Vec<(f64, f64)> = path.iter().map(|&c| grid.cell_center(c)).collect();
    if pts.len() == 1 {
        return (x - pts[0].0).hypot(y - pts[0].1);
    }
    pts.windows(2)
        .map(|w| point_segment(x, y, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment(x: f64, y: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let f = if len2 == 0.0 {
        0.0
    } else {
        (((x - a.0) * dx + (y - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (x - a.0 - f * dx).hypot(y - a.1 - f * dy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplanDecision {
    Continue,
    Replan,
}

/// Replan when the robot is more than `threshold_cells` away from `path`.
pub fn replan_check(grid: &HeightGrid, state: &RobotState, path: &[CellIndex], threshold_cells: f64) -> ReplanDecision {
    if cross_track(grid, path, state.x, state.y) > threshold_cells * grid.cell_size() {
        ReplanDecision::Replan
    } else {
        ReplanDecision::Continue
    }
}

/// Replaces the remainder of the route with a fresh plan from `here`.
/// Returns the new path, which starts at `here` and ends at the goal.
pub fn splice_replan(
    grid: &HeightGrid,
    here: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    strategy: Strategy,
    metric: Metric,
) -> Result<Option<Vec<CellIndex>>> {
    Ok(plan(grid, here, goal, profile, strategy, metric)?
        .found()
        .map(|r| r.path))
}

/// Heading-proportional follower used when the local planner is bypassed.
fn follow_command(state: &RobotState, target: (f64, f64), profile: &RobotProfile, dt: f64) -> VelocityCommand {
    let err = normalize_angle((target.1 - state.y).atan2(target.0 - state.x) - state.theta);
    let want_omega = (2.0 * err).clamp(-profile.omega_max, profile.omega_max);
    let want_v = profile.v_max * err.cos().max(0.0);
    let dv = profile.accel_v * dt;
    let dw = profile.accel_omega * dt;
    VelocityCommand {
        v: want_v
            .clamp(state.v - dv, state.v + dv)
            .clamp(profile.v_min, profile.v_max),
        omega: want_omega.clamp(state.omega - dw, state.omega + dw),
    }
}

struct Route {
    points: Vec<(f64, f64)>,
    cells: Vec<CellIndex>,
    /// Index of the last waypoint the robot has passed.
    progress: usize,
    known: Vec<Obstacle>,
}

impl Route {
    fn new(grid: &HeightGrid, cells: Vec<CellIndex>, profile: &RobotProfile) -> Self {
        let known = blocked_corridor_cells(grid, &cells, profile)
            .into_iter()
            .map(|c| cell_disc(grid, c))
            .collect();
        Route {
            points: cells.iter().map(|&c| grid.cell_center(c)).collect(),
            cells,
            progress: 0,
            known,
        }
    }

    /// Advances `progress` to the nearest waypoint within a short window
    /// ahead and returns the indices passed.
    fn advance(&mut self, x: f64, y: f64, window: usize) -> std::ops::Range<usize> {
        let before = self.progress;
        let end = (self.progress + window + 1).min(self.points.len());
        let mut best = (f64::INFINITY, self.progress);
        for i in self.progress..end {
            let p = self.points[i];
            let d = (p.0 - x).hypot(p.1 - y);
            if d < best.0 {
                best = (d, i);
            }
        }
        self.progress = best.1;
        before + 1..self.progress + 1
    }

    /// First waypoint past the current progress farther than `lookahead`.
    fn target(&self, x: f64, y: f64, lookahead: f64) -> (f64, f64) {
        self.points[self.progress..]
            .iter()
            .copied()
            .find(|p| (p.0 - x).hypot(p.1 - y) > lookahead)
            .unwrap_or(*self.points.last().expect("routes are non-empty"))
    }
}

/// Marks the cells a robot center cannot occupy next to a sensed static
/// obstacle as insurmountable in `runtime`. Returns the marked cells.
fn mark_static_obstacle(
    runtime: &mut [f64],
    grid: &HeightGrid,
    o: &Obstacle,
    profile: &RobotProfile,
) -> Vec<CellIndex> {
    let cs = grid.cell_size();
    let reach = o.radius + profile.footprint_radius + 0.5 * cs;
    let wall = grid.heights().iter().copied().fold(f64::NEG_INFINITY, f64::max)
        + profile.max_overcome_height.max(profile.max_direct_height)
        + 1.0;
    let mut marked = Vec::new();
    for (i, h) in runtime.iter_mut().enumerate() {
        let c = grid.cell_at(i);
        let (x, y) = grid.cell_center(c);
        if (x - o.x).hypot(y - o.y) < reach {
            *h = wall;
            marked.push(c);
        }
    }
    marked
}

/// Runs the scenario on `grid` with the given local controller.
pub fn track(grid: &HeightGrid, scenario: &Scenario, controller: Controller) -> Result<ExecutionLog> {
    scenario.validate(grid)?;
    let profile = &scenario.profile;
    let cs = grid.cell_size();
    let dt = scenario.sim_dt_s;
    let tol = scenario.goal_tolerance(grid);
    let mut log = ExecutionLog {
        controller,
        outcome: Outcome::NoPath,
        plan_time_s: None,
        plan_path: Vec::new(),
        trajectory: Vec::new(),
        events: Vec::new(),
        min_clearance_m: None,
        elapsed_sim_time_s: 0.0,
        max_cross_track_m: 0.0,
    };

    let first = match plan(
        grid,
        scenario.start,
        scenario.goal,
        profile,
        scenario.strategy,
        scenario.metric,
    )? {
        PlanOutcome::Found(r) => r,
        PlanOutcome::NoPath(_) => {
            log.events.push(Event {
                t: 0.0,
                kind: EventKind::NoPath,
            });
            return Ok(log);
        }
    };
    log.plan_time_s = Some(first.total_time_s);
    log.plan_path = first.path.clone();
    let mut route = Route::new(grid, first.path, profile);

    let (sx, sy) = grid.cell_center(scenario.start);
    let aim = route.points.get(1).copied().unwrap_or((sx, sy));
    let mut state = RobotState {
        x: sx,
        y: sy,
        theta: if aim == (sx, sy) {
            0.0
        } else {
            (aim.1 - sy).atan2(aim.0 - sx)
        },
        v: 0.0,
        omega: 0.0,
    };
    let mut cell = scenario.start;
    let mut t = 0.0;
    let mut steps: u64 = 0;
    let mut hold_until = 0.0f64;
    let mut detected = vec![false; scenario.unknown_obstacles.len()];
    // Known map plus the static obstacles sensed so far; only replanning
    // reads it.
    let mut runtime = grid.heights().to_vec();
    let mut runtime_dirty = false;
    let lookahead = match controller {
        Controller::Dwa => scenario.tracking.lookahead_cells * cs,
        // The bare follower has no obstacle model, so it keeps to the path.
        Controller::Follow => cs,
    };
    let window = (scenario.tracking.lookahead_cells.ceil() as usize).max(1) * 2;

    log.trajectory.push(Sample { t, state });
    let terminal = loop {
        let (gx, gy) = grid.cell_center(scenario.goal);
        if (state.x - gx).hypot(state.y - gy) <= tol {
            break EventKind::GoalReached;
        }
        if t >= scenario.max_sim_time_s - 1e-9 {
            break EventKind::Timeout;
        }

        // Sensing and clearance against the true obstacle positions.
        let mut sensed = Vec::new();
        for (i, o) in scenario.unknown_obstacles.iter().enumerate() {
            let disc = o.at(t);
            let gap = (disc.x - state.x).hypot(disc.y - state.y) - disc.radius;
            if gap <= scenario.tracking.sensing_radius_m {
                if !detected[i] {
                    detected[i] = true;
                    log.events.push(Event {
                        t,
                        kind: EventKind::ObstacleDetected { obstacle: i },
                    });
                    if controller == Controller::Dwa && o.is_static() {
                        let marked = mark_static_obstacle(&mut runtime, grid, &disc, profile);
                        let ahead = &route.cells[route.progress..];
                        if marked.iter().any(|m| ahead.contains(m) && *m != cell) {
                            runtime_dirty = true;
                        }
                    }
                }
                sensed.push(disc);
            }
        }
        let mut collision = None;
        let mut clearance = log.min_clearance_m.unwrap_or(f64::INFINITY);
        for (i, o) in scenario.unknown_obstacles.iter().enumerate() {
            let d = o.at(t);
            let gap = (d.x - state.x).hypot(d.y - state.y) - d.radius - profile.footprint_radius;
            clearance = clearance.min(gap);
            if gap <= 0.0 && collision.is_none() {
                collision = Some(format!("unknown obstacle {i}"));
            }
        }
        for d in &route.known {
            if (d.x - state.x).abs() > 2.0 * cs || (d.y - state.y).abs() > 2.0 * cs {
                continue;
            }
            let gap = (d.x - state.x).hypot(d.y - state.y) - d.radius - profile.footprint_radius;
            clearance = clearance.min(gap);
            if gap <= 0.0 && collision.is_none() {
                collision = Some("known obstacle".to_string());
            }
        }
        if clearance.is_finite() {
            log.min_clearance_m = Some(clearance);
        }
        if let Some(with) = collision {
            break EventKind::Collision { with };
        }

        for i in route.advance(state.x, state.y, window) {
            log.events.push(Event {
                t,
                kind: EventKind::WaypointReached {
                    index: i,
                    cell: route.cells[i],
                },
            });
        }
        let xt = cross_track(grid, &route.cells, state.x, state.y);
        log.max_cross_track_m = log.max_cross_track_m.max(xt);
        if controller == Controller::Dwa && (runtime_dirty || xt > scenario.tracking.replan_cells * cs) {
            runtime_dirty = false;
            let known = HeightGrid::new(grid.width(), grid.height(), cs, runtime.clone())?;
            match splice_replan(&known, cell, scenario.goal, profile, scenario.strategy, scenario.metric)? {
                Some(path) => {
                    log.events.push(Event {
                        t,
                        kind: EventKind::Replanned {
                            from: cell,
                            path_steps: path.len() - 1,
                        },
                    });
                    route = Route::new(grid, path, profile);
                }
                None => break EventKind::NoPath,
            }
        }

        let cmd = if t < hold_until - 1e-9 {
            VelocityCommand::STOP
        } else {
            let target = route.target(state.x, state.y, lookahead);
            match controller {
                Controller::Dwa => {
                    let mut obstacles = route.known.clone();
                    obstacles.extend(sensed);
                    dwa_step(&state, target, &obstacles, profile, &scenario.dwa).0
                }
                Controller::Follow => follow_command(&state, target, profile, dt),
            }
        };
        let (x, y, th) = integrate(state.x, state.y, state.theta, cmd, dt);
        state = RobotState {
            x,
            y,
            theta: th,
            v: cmd.v,
            omega: cmd.omega,
        };
        steps += 1;
        t = steps as f64 * dt;

        match grid.cell_at_point(state.x, state.y) {
            None => {
                log.trajectory.push(Sample { t, state });
                break EventKind::Collision {
                    with: "map boundary".to_string(),
                };
            }
            Some(next) if next != cell => {
                let dh = grid.elevation(next) - grid.elevation(cell);
                if profile.is_insurmountable(dh) {
                    log.trajectory.push(Sample { t, state });
                    break EventKind::Collision {
                        with: format!("step into {next:?}"),
                    };
                }
                if dh.abs() >= profile.max_direct_height {
                    let duration = if dh > 0.0 {
                        dh * profile.t_up
                    } else {
                        -dh * profile.t_down
                    };
                    log.events.push(Event {
                        t,
                        kind: EventKind::ClimbStarted {
                            cell: next,
                            duration_s: duration,
                        },
                    });
                    hold_until = t + duration;
                    state.v = 0.0;
                    state.omega = 0.0;
                }
                cell = next;
            }
            Some(_) => {}
        }
        log.trajectory.push(Sample { t, state });
    };

    log.outcome = match terminal {
        EventKind::GoalReached => Outcome::GoalReached,
        EventKind::Collision { .. } => Outcome::Collision,
        EventKind::Timeout => Outcome::Timeout,
        _ => Outcome::NoPath,
    };
    log.events.push(Event { t, kind: terminal });
    log.elapsed_sim_time_s = t;
    Ok(log)
}
