//! Dynamic-window local planner.
//!
//! Each control step samples a grid of (v, omega) commands reachable within
//! one period under the acceleration limits, rolls every command out as a
//! constant-velocity unicycle arc, and picks the best-scoring one. The score
//! blends clearance against path alignment:
//!
//! ```text
//! score = lambda * G_clear + (1 - lambda) * G_path
//! ```
//!
//! where `G_path` is a weighted mean of heading alignment and forward speed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::costmodel::RobotProfile;
use crate::error::{Error, Result};

/// Scores closer than this are ties.
pub const SCORE_TIE_EPS: f64 = 1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand { v: 0.0, omega: 0.0 };
}

/// A rolled-out pose `t` seconds after the start of the rollout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Disc obstacle moving at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

impl Obstacle {
    pub fn fixed(x: f64, y: f64, radius: f64) -> Self {
        Obstacle {
            x,
            y,
            radius,
            vx: 0.0,
            vy: 0.0,
        }
    }

    /// Center after `t` seconds.
    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.x + self.vx * t, self.y + self.vy * t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRollout {
    pub command: VelocityCommand,
    pub poses: Vec<Pose>,
    /// Smallest gap between the footprint and any obstacle along the
    /// rollout; infinite without obstacles.
    pub min_clearance: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DwaParams {
    pub lambda: f64,
    pub dt: f64,
    pub horizon: f64,
    pub v_samples: usize,
    pub omega_samples: usize,
    /// Distance at which the goal counts as reached. `None` means half a
    /// cell of the map being driven.
    pub goal_tolerance: Option<f64>,
    pub heading_weight: f64,
    pub velocity_weight: f64,
    /// Clearance (m) beyond which no extra score is earned.
    pub clear_cap: f64,
    /// Treat moving obstacles as standing still during rollouts.
    pub freeze_obstacles: bool,
}

impl Default for DwaParams {
    fn default() -> Self {
        DwaParams {
            lambda: 0.5,
            dt: 0.1,
            horizon: 2.0,
            v_samples: 11,
            omega_samples: 21,
            goal_tolerance: None,
            heading_weight: 0.7,
            velocity_weight: 0.3,
            clear_cap: 2.0,
            freeze_obstacles: false,
        }
    }
}

impl DwaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, r: &str| Err(Error::invalid(format!("dwa.{f}"), r));
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda", "must lie in [0, 1]");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", "must be positive");
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return bad("horizon", "must be at least dt");
        }
        if self.v_samples < 2 {
            return bad("v_samples", "must be at least 2");
        }
        if self.omega_samples < 2 {
            return bad("omega_samples", "must be at least 2");
        }
        if let Some(t) = self.goal_tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return bad("goal_tolerance", "must be positive");
            }
        }
        if !(self.heading_weight >= 0.0 && self.velocity_weight >= 0.0)
            || self.heading_weight + self.velocity_weight <= 0.0
        {
            return bad("heading_weight", "weights must be non-negative and not both zero");
        }
        if !(self.clear_cap > 0.0 && self.clear_cap.is_finite()) {
            return bad("clear_cap", "must be positive");
        }
        Ok(())
    }

    /// Number of rollout steps, `horizon / dt` rounded to the nearest step.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }
}

fn linspace(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

fn window_range(cur: f64, accel: f64, dt: f64, lo: f64, hi: f64) -> (f64, f64) {
    let a = (cur - accel * dt).max(lo);
    let b = (cur + accel * dt).min(hi);
    if a <= b {
        (a, b)
    } else {
        // The state is outside the limits; the window collapses onto the
        // nearest reachable limit.
        let c = cur.clamp(lo, hi);
        (c, c)
    }
}

/// Commands reachable from `state` in one period, `v` major and `omega`
/// minor, both ascending.
pub fn sample_window(state: &RobotState, profile: &RobotProfile, params: &DwaParams) -> Vec<VelocityCommand> {
    let (v_lo, v_hi) = window_range(state.v, profile.accel_v, params.dt, profile.v_min, profile.v_max);
    let (w_lo, w_hi) = window_range(
        state.omega,
        profile.accel_omega,
        params.dt,
        -profile.omega_max,
        profile.omega_max,
    );
    let mut out = Vec::with_capacity(params.v_samples * params.omega_samples);
    for i in 0..params.v_samples {
        let v = linspace(v_lo, v_hi, params.v_samples, i);
        for j in 0..params.omega_samples {
            out.push(VelocityCommand {
                v,
                omega: linspace(w_lo, w_hi, params.omega_samples, j),
            });
        }
    }
    out
}

/// Advances a pose by `dt` along the exact arc of `cmd`.
pub fn integrate(x: f64, y: f64, theta: f64, cmd: VelocityCommand, dt: f64) -> (f64, f64, f64) {
    let th1 = theta + cmd.omega * dt;
    if cmd.omega.abs() < 1e-9 {
        (x + cmd.v * dt * theta.cos(), y + cmd.v * dt * theta.sin(), theta)
    } else {
        let r = cmd.v / cmd.omega;
        (
            x + r * (th1.sin() - theta.sin()),
            y - r * (th1.cos() - theta.cos()),
            normalize_angle(th1),
        )
    }
}

/// Poses at `dt, 2 dt, .., horizon` under a constant command.
pub fn rollout(state: &RobotState, cmd: VelocityCommand, params: &DwaParams) -> Vec<Pose> {
    let n = params.steps();
    let mut poses = Vec::with_capacity(n);
    let (mut x, mut y, mut th) = (state.x, state.y, state.theta);
    for k in 1..=n {
        (x, y, th) = integrate(x, y, th, cmd, params.dt);
        poses.push(Pose {
            t: k as f64 * params.dt,
            x,
            y,
            theta: th,
        });
    }
    poses
}

/// Smallest footprint-to-obstacle gap over the poses.
pub fn min_clearance(poses: &[Pose], obstacles: &[Obstacle], footprint: f64, freeze: bool) -> f64 {
    let mut best = f64::INFINITY;
    for p in poses {
        let t = if freeze { 0.0 } else { p.t };
        for o in obstacles {
            let (ox, oy) = o.at(t);
            let gap = (p.x - ox).hypot(p.y - oy) - o.radius - footprint;
            if gap < best {
                best = gap;
            }
        }
    }
    best
}

/// Individual terms of the score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTerms {
    pub clear: f64,
    pub head: f64,
    pub vel: f64,
    pub path: f64,
}

pub fn score_terms(
    rollout: &TrajectoryRollout,
    target: (f64, f64),
    has_obstacles: bool,
    profile: &RobotProfile,
    params: &DwaParams,
) -> ScoreTerms {
    let clear = if has_obstacles {
        rollout.min_clearance.clamp(0.0, params.clear_cap) / params.clear_cap
    } else {
        1.0
    };
    let last = rollout.poses.last().expect("rollouts have at least one pose");
    let bearing = (target.1 - last.y).atan2(target.0 - last.x);
    let head = 1.0 - normalize_angle(bearing - last.theta).abs() / PI;
    let vel = if profile.v_max > 0.0 {
        rollout.command.v / profile.v_max
    } else {
        0.0
    };
    let path = (params.heading_weight * head + params.velocity_weight * vel)
        / (params.heading_weight + params.velocity_weight);
    ScoreTerms { clear, head, vel, path }
}

/// Blended score of a rollout, `-inf` when it touches an obstacle.
pub fn score(
    rollout: &TrajectoryRollout,
    target: (f64, f64),
    obstacles: &[Obstacle],
    profile: &RobotProfile,
    params: &DwaParams,
) -> f64 {
    if rollout.min_clearance <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let t = score_terms(rollout, target, !obstacles.is_empty(), profile, params);
    params.lambda * t.clear + (1.0 - params.lambda) * t.path
}

/// Index of the winning command: highest score, then smaller `|omega|`,
/// then earlier in window order. `None` when no score is finite.
pub fn select_best(commands: &[VelocityCommand], scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&c, &s)) in commands.iter().zip(scores).enumerate() {
        if !s.is_finite() {
            continue;
        }
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        let (bc, bs) = (commands[b], scores[b]);
        if s > bs + SCORE_TIE_EPS || ((s - bs).abs() <= SCORE_TIE_EPS && c.omega.abs() < bc.omega.abs() - 1e-12) {
            best = Some(i);
        }
    }
    best
}

/// One control step: the best admissible command toward `target` and its
/// rollout. Falls back to the stop command when every sample collides.
pub fn dwa_step(
    state: &RobotState,
    target: (f64, f64),
    obstacles: &[Obstacle],
    profile: &RobotProfile,
    params: &DwaParams,
) -> (VelocityCommand, TrajectoryRollout) {
    // Obstacles that cannot come within clear_cap of any rollout do not
    // change a score.
    let reach =
        profile.v_max.abs().max(profile.v_min.abs()) * params.horizon + profile.footprint_radius + params.clear_cap;
    let near: Vec<Obstacle> = obstacles
        .iter()
        .filter(|o| {
            let drift = if params.freeze_obstacles {
                0.0
            } else {
                o.vx.hypot(o.vy) * params.horizon
            };
            (o.x - state.x).hypot(o.y - state.y) - o.radius - drift <= reach
        })
        .copied()
        .collect();
    let has_obstacles = !obstacles.is_empty();

    let commands = sample_window(state, profile, params);
    let mut rollouts = Vec::with_capacity(commands.len());
    let mut scores = Vec::with_capacity(commands.len());
    for &cmd in &commands {
        let poses = rollout(state, cmd, params);
        let min_clear = min_clearance(&poses, &near, profile.footprint_radius, params.freeze_obstacles);
        let mut r = TrajectoryRollout {
            command: cmd,
            poses,
            min_clearance: min_clear,
            score: 0.0,
        };
        r.score = if r.min_clearance <= 0.0 {
            f64::NEG_INFINITY
        } else {
            let t = score_terms(&r, target, has_obstacles, profile, params);
            params.lambda * t.clear + (1.0 - params.lambda) * t.path
        };
        scores.push(r.score);
        rollouts.push(r);
    }
    match select_best(&commands, &scores) {
        Some(i) => (commands[i], rollouts.swap_remove(i)),
        None => {
            let poses = rollout(state, VelocityCommand::STOP, params);
            let min_clear = min_clearance(&poses, &near, profile.footprint_radius, params.freeze_obstacles);
            (
                VelocityCommand::STOP,
                TrajectoryRollout {
                    command: VelocityCommand::STOP,
                    poses,
                    min_clearance: min_clear,
                    score: f64::NEG_INFINITY,
                },
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still() -> RobotState {
        RobotState::default()
    }

    #[test]
    fn angle_wrap() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(0.5 - 4.0 * PI) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unclipped_window_from_rest() {
        let profile = RobotProfile {
            accel_v: 20.0,
            ..RobotProfile::default()
        };
        let w = sample_window(&still(), &profile, &DwaParams::default());
        assert_eq!(w.len(), 11 * 21);
        assert_eq!(w.first().unwrap().v, 0.0);
        assert_eq!(w.last().unwrap().v, 1.0);
    }

    #[test]
    fn two_by_two_is_corners() {
        let params = DwaParams {
            v_samples: 2,
            omega_samples: 2,
            ..DwaParams::default()
        };
        let s = RobotState {
            v: 0.5,
            omega: 0.0,
            ..still()
        };
        let w = sample_window(&s, &RobotProfile::default(), &params);
        let expect = [(0.3, -0.6), (0.3, 0.6), (0.7, -0.6), (0.7, 0.6)];
        assert_eq!(w.len(), 4);
        for (c, (v, om)) in w.iter().zip(expect) {
            assert!((c.v - v).abs() < 1e-12 && (c.omega - om).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn window_clips_at_v_max() {
        let s = RobotState { v: 1.0, ..still() };
        let w = sample_window(&s, &RobotProfile::default(), &DwaParams::default());
        assert!(w.iter().all(|c| c.v <= 1.0));
        assert_eq!(w.last().unwrap().v, 1.0);
    }

    #[test]
    fn straight_and_spin() {
        let params = DwaParams {
            horizon: 1.0,
            ..DwaParams::default()
        };
        let p = rollout(&still(), VelocityCommand { v: 1.0, omega: 0.0 }, &params);
        assert_eq!(p.len(), 10);
        let last = p.last().unwrap();
        assert!((last.x - 1.0).abs() < 1e-12 && last.y.abs() < 1e-12);

        let p = rollout(&still(), VelocityCommand { v: 0.0, omega: 1.0 }, &params);
        let last = p.last().unwrap();
        assert_eq!((last.x, last.y), (0.0, 0.0));
        assert!((last.theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_obstacle_set_has_full_clearance_score() {
        let params = DwaParams::default();
        let cmd = VelocityCommand { v: 0.5, omega: 0.0 };
        let poses = rollout(&still(), cmd, &params);
        let r = TrajectoryRollout {
            command: cmd,
            min_clearance: min_clearance(&poses, &[], 0.2, false),
            poses,
            score: 0.0,
        };
        let t = score_terms(&r, (5.0, 0.0), false, &RobotProfile::default(), &params);
        assert_eq!(t.clear, 1.0);
        assert_eq!(t.head, 1.0);
        assert_eq!(t.vel, 0.5);
    }

    #[test]
    fn straight_ahead_when_unobstructed() {
        let s = RobotState { v: 0.5, ..still() };
        let (cmd, r) = dwa_step(&s, (10.0, 0.0), &[], &RobotProfile::default(), &DwaParams::default());
        assert!(cmd.omega.abs() < 1e-12);
        assert!((cmd.v - 0.7).abs() < 1e-12);
        assert!(r.score.is_finite());
    }

    #[test]
    fn boxed_in_stops() {
        let obstacles: Vec<_> = (0..16)
            .map(|k| {
                let a = k as f64 * PI / 8.0;
                Obstacle::fixed(0.3 * a.cos(), 0.3 * a.sin(), 0.2)
            })
            .collect();
        let (cmd, r) = dwa_step(
            &still(),
            (5.0, 0.0),
            &obstacles,
            &RobotProfile::default(),
            &DwaParams::default(),
        );
        assert_eq!(cmd, VelocityCommand::STOP);
        assert_eq!(r.score, f64::NEG_INFINITY);
    }

    #[test]
    fn moving_obstacle_is_extrapolated() {
        let o = Obstacle {
            x: 0.0,
            y: 0.0,
            radius: 0.1,
            vx: 1.0,
            vy: 0.0,
        };
        let poses = [Pose {
            t: 1.0,
            x: 1.0,
            y: 0.0,
            theta: 0.0,
        }];
        assert!(min_clearance(&poses, &[o], 0.2, false) < 0.0);
        assert!((min_clearance(&poses, &[o], 0.2, true) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn param_validation() {
        assert!(DwaParams::default().validate().is_ok());
        let e = DwaParams {
            lambda: 1.5,
            ..DwaParams::default()
        }
        .validate()
        .unwrap_err();
        assert!(e.to_string().contains("dwa.lambda"));
        assert!(DwaParams {
            v_samples: 1,
            ..DwaParams::default()
        }
        .validate()
        .is_err());
        assert!(DwaParams {
            horizon: 0.01,
            ..DwaParams::default()
        }
        .validate()
        .is_err());
    }
}
