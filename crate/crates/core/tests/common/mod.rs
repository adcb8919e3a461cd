//! Test-side reference implementations shared by several test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepnav::costmodel::RobotProfile;
use stepnav::dwa::{DwaParams, Obstacle, RobotState, VelocityCommand};

/// Closed-form unicycle pose after `t` seconds from `s` under `cmd`.
pub fn arc_pose(s: &RobotState, cmd: VelocityCommand, t: f64) -> (f64, f64, f64) {
    if cmd.omega == 0.0 {
        return (
            s.x + cmd.v * t * s.theta.cos(),
            s.y + cmd.v * t * s.theta.sin(),
            s.theta,
        );
    }
    let r = cmd.v / cmd.omega;
    // Center of the turning circle, then rotate about it.
    let cx = s.x - r * s.theta.sin();
    let cy = s.y + r * s.theta.cos();
    let th = s.theta + cmd.omega * t;
    (cx + r * th.sin(), cy - r * th.cos(), th)
}

fn wrap(a: f64) -> f64 {
    let mut a = a;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Exhaustive re-scoring of every command in `window`; returns the winner
/// under the canonical tie rules (score, then smaller |omega|, then window
/// order) or the stop command.
pub fn brute_force_best(
    s: &RobotState,
    window: &[VelocityCommand],
    target: (f64, f64),
    obstacles: &[Obstacle],
    profile: &RobotProfile,
    params: &DwaParams,
) -> VelocityCommand {
    let n = (params.horizon / params.dt).round() as usize;
    let mut scored = Vec::new();
    for &cmd in window {
        let mut clear = f64::INFINITY;
        let mut last = (s.x, s.y, s.theta);
        for k in 1..=n {
            let t = k as f64 * params.dt;
            last = arc_pose(s, cmd, t);
            for o in obstacles {
                let tt = if params.freeze_obstacles { 0.0 } else { t };
                let d = ((last.0 - o.x - o.vx * tt).powi(2) + (last.1 - o.y - o.vy * tt).powi(2)).sqrt();
                clear = clear.min(d - o.radius - profile.footprint_radius);
            }
        }
        if clear <= 0.0 {
            continue;
        }
        let g_clear = if obstacles.is_empty() {
            1.0
        } else {
            clear.min(params.clear_cap) / params.clear_cap
        };
        let err = wrap((target.1 - last.1).atan2(target.0 - last.0) - last.2).abs();
        let g_head = 1.0 - err / PI;
        let g_vel = cmd.v / profile.v_max;
        let g_path = (params.heading_weight * g_head + params.velocity_weight * g_vel)
            / (params.heading_weight + params.velocity_weight);
        scored.push((params.lambda * g_clear + (1.0 - params.lambda) * g_path, cmd));
    }
    let mut best: Option<(f64, VelocityCommand)> = None;
    for (sc, cmd) in scored {
        best = match best {
            None => Some((sc, cmd)),
            Some((bs, bc)) => {
                let wins = sc > bs + 1e-9 || ((sc - bs).abs() <= 1e-9 && cmd.omega.abs() < bc.omega.abs() - 1e-12);
                Some(if wins { (sc, cmd) } else { (bs, bc) })
            }
        };
    }
    best.map(|b| b.1).unwrap_or(VelocityCommand { v: 0.0, omega: 0.0 })
}

pub struct DwaFixture {
    pub state: RobotState,
    pub target: (f64, f64),
    pub obstacles: Vec<Obstacle>,
    pub params: DwaParams,
}

/// Random local-planning scene: a robot near the origin, a target a few
/// meters away and a handful of static or moving discs.
pub fn random_dwa_fixture(seed: u64) -> DwaFixture {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let state = RobotState {
        x: r.gen_range(-1.0..1.0),
        y: r.gen_range(-1.0..1.0),
        theta: r.gen_range(-PI..PI),
        v: r.gen_range(0.0..1.0),
        omega: r.gen_range(-2.0..2.0),
    };
    let a: f64 = r.gen_range(-PI..PI);
    let dist = r.gen_range(2.0..8.0);
    let target = (state.x + dist * a.cos(), state.y + dist * a.sin());
    let n = r.gen_range(0..8);
    let obstacles = (0..n)
        .map(|_| Obstacle {
            x: r.gen_range(-4.0..4.0),
            y: r.gen_range(-4.0..4.0),
            radius: r.gen_range(0.1..0.8),
            vx: if r.gen_bool(0.3) { r.gen_range(-0.5..0.5) } else { 0.0 },
            vy: if r.gen_bool(0.3) { r.gen_range(-0.5..0.5) } else { 0.0 },
        })
        .collect();
    let params = DwaParams {
        lambda: r.gen_range(0.0..1.0),
        freeze_obstacles: r.gen_bool(0.2),
        ..DwaParams::default()
    };
    DwaFixture {
        state,
        target,
        obstacles,
        params,
    }
}
