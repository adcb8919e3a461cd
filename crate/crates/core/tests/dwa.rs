mod common;

use std::f64::consts::PI;

use common::{arc_pose, brute_force_best, random_dwa_fixture};
use proptest::prelude::*;
use stepnav::costmodel::RobotProfile;
use stepnav::dwa::{
    dwa_step, min_clearance, rollout, sample_window, score_terms, DwaParams, Obstacle, RobotState, TrajectoryRollout,
    VelocityCommand,
};

#[test]
fn argmax_matches_exhaustive_rescoring() {
    let profile = RobotProfile::default();
    for seed in 0..100 {
        let f = random_dwa_fixture(seed);
        let window = sample_window(&f.state, &profile, &f.params);
        let expect = brute_force_best(&f.state, &window, f.target, &f.obstacles, &profile, &f.params);
        let (got, _) = dwa_step(&f.state, f.target, &f.obstacles, &profile, &f.params);
        assert_eq!(got, expect, "fixture {seed}");
    }
}

#[test]
fn rollout_matches_closed_form_arcs() {
    let params = DwaParams::default();
    let mut worst: f64 = 0.0;
    let mut rng = 0x9e37_79b9_u64;
    let mut next = || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..1000 {
        let s = RobotState {
            x: next() * 10.0 - 5.0,
            y: next() * 10.0 - 5.0,
            theta: next() * 2.0 * PI - PI,
            v: 0.0,
            omega: 0.0,
        };
        let cmd = VelocityCommand {
            v: next() * 2.0 - 0.5,
            omega: next() * 4.0 - 2.0,
        };
        let poses = rollout(&s, cmd, &params);
        assert_eq!(poses.len(), 20);
        for (k, p) in poses.iter().enumerate() {
            assert!((p.t - (k + 1) as f64 * params.dt).abs() < 1e-12);
            let (x, y, _) = arc_pose(&s, cmd, p.t);
            worst = worst.max((p.x - x).hypot(p.y - y));
        }
    }
    assert!(worst < 1e-6, "worst arc error {worst}");
}

#[test]
fn half_turn_on_unit_circle() {
    let params = DwaParams {
        dt: PI / 100.0,
        horizon: PI,
        ..DwaParams::default()
    };
    let cmd = VelocityCommand { v: 1.0, omega: 1.0 };
    let poses = rollout(&RobotState::default(), cmd, &params);
    assert_eq!(poses.len(), 100);
    for p in &poses {
        // Circle of radius 1 centered at (0, 1).
        let (ex, ey) = (p.t.sin(), 1.0 - p.t.cos());
        assert!((p.x - ex).hypot(p.y - ey) < 1e-6);
    }
    let last = poses.last().unwrap();
    assert!((last.x).abs() < 1e-9 && (last.y - 2.0).abs() < 1e-9);
}

#[test]
fn lambda_one_maximizes_clearance() {
    let profile = RobotProfile::default();
    let params = DwaParams {
        lambda: 1.0,
        ..DwaParams::default()
    };
    let s = RobotState {
        v: 0.5,
        ..RobotState::default()
    };
    let obstacles = [Obstacle::fixed(2.0, 0.3, 0.4)];
    let (cmd, r) = dwa_step(&s, (6.0, 0.0), &obstacles, &profile, &params);
    let best = sample_window(&s, &profile, &params)
        .into_iter()
        .map(|c| {
            let poses = rollout(&s, c, &params);
            min_clearance(&poses, &obstacles, profile.footprint_radius, false).min(params.clear_cap)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((r.min_clearance.min(params.clear_cap) - best).abs() < 1e-12, "{cmd:?}");
}

#[test]
fn lambda_zero_open_field_drives_fastest_straight() {
    let profile = RobotProfile::default();
    let params = DwaParams {
        lambda: 0.0,
        ..DwaParams::default()
    };
    let s = RobotState {
        v: 0.4,
        ..RobotState::default()
    };
    let (cmd, _) = dwa_step(&s, (8.0, 0.0), &[], &profile, &params);
    let window = sample_window(&s, &profile, &params);
    let v_top = window.iter().map(|c| c.v).fold(0.0, f64::max);
    assert_eq!(cmd.v, v_top);
    assert!(cmd.omega.abs() < 1e-12);
}

#[test]
fn obstacle_dead_ahead_matches_brute_force() {
    let profile = RobotProfile::default();
    let params = DwaParams::default();
    let s = RobotState {
        v: 0.8,
        ..RobotState::default()
    };
    let obstacles = [Obstacle::fixed(0.9, 0.0, 0.3)];
    let window = sample_window(&s, &profile, &params);
    let expect = brute_force_best(&s, &window, (5.0, 0.0), &obstacles, &profile, &params);
    let (cmd, r) = dwa_step(&s, (5.0, 0.0), &obstacles, &profile, &params);
    assert_eq!(cmd, expect);
    assert!(r.min_clearance > 0.0 || cmd == VelocityCommand::STOP);
}

#[test]
fn side_obstacle_in_corridor_matches_brute_force() {
    let profile = RobotProfile::default();
    let params = DwaParams::default();
    let s = RobotState {
        v: 0.6,
        ..RobotState::default()
    };
    let mut obstacles: Vec<_> = (0..12)
        .flat_map(|i| {
            [
                Obstacle::fixed(i as f64 * 0.5, 1.2, 0.25),
                Obstacle::fixed(i as f64 * 0.5, -1.2, 0.25),
            ]
        })
        .collect();
    obstacles.push(Obstacle::fixed(2.0, -0.6, 0.3));
    let window = sample_window(&s, &profile, &params);
    let expect = brute_force_best(&s, &window, (6.0, 0.0), &obstacles, &profile, &params);
    let (cmd, _) = dwa_step(&s, (6.0, 0.0), &obstacles, &profile, &params);
    assert_eq!(cmd, expect);
}

#[test]
fn lambda_sweep_crosses_over() {
    // Rollout a keeps away from the obstacle but faces away from the target;
    // rollout b heads straight at the target past the obstacle.
    let profile = RobotProfile::default();
    let s = RobotState::default();
    let obstacles = [Obstacle::fixed(1.5, 0.7, 0.2)];
    let make = |cmd: VelocityCommand, params: &DwaParams| {
        let poses = rollout(&s, cmd, params);
        TrajectoryRollout {
            command: cmd,
            min_clearance: min_clearance(&poses, &obstacles, profile.footprint_radius, false),
            poses,
            score: 0.0,
        }
    };
    let base = DwaParams::default();
    let a = make(VelocityCommand { v: 0.5, omega: -1.0 }, &base);
    let b = make(VelocityCommand { v: 1.0, omega: 0.0 }, &base);
    let ta = score_terms(&a, (5.0, 0.0), true, &profile, &base);
    let tb = score_terms(&b, (5.0, 0.0), true, &profile, &base);
    assert!(ta.clear > tb.clear && ta.path < tb.path, "{ta:?} {tb:?}");

    let mut prefers_a = Vec::new();
    for k in 0..=20 {
        let params = DwaParams {
            lambda: k as f64 / 20.0,
            ..DwaParams::default()
        };
        let sa = stepnav::dwa::score(&a, (5.0, 0.0), &obstacles, &profile, &params);
        let sb = stepnav::dwa::score(&b, (5.0, 0.0), &obstacles, &profile, &params);
        prefers_a.push(sa > sb);
    }
    assert!(!prefers_a[0] && prefers_a[20]);
    let flips = prefers_a.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1);
}

#[test]
fn everything_colliding_returns_stop() {
    let profile = RobotProfile::default();
    let obstacles = [Obstacle::fixed(0.0, 0.0, 1.0)];
    let s = RobotState {
        v: 0.5,
        ..RobotState::default()
    };
    let (cmd, r) = dwa_step(&s, (4.0, 0.0), &obstacles, &profile, &DwaParams::default());
    assert_eq!(cmd, VelocityCommand::STOP);
    assert_eq!(r.score, f64::NEG_INFINITY);
}

fn state_strategy() -> impl Strategy<Value = RobotState> {
    (-5.0..5.0f64, -5.0..5.0f64, -PI..PI, 0.0..1.0f64, -2.0..2.0f64).prop_map(|(x, y, theta, v, omega)| RobotState {
        x,
        y,
        theta,
        v,
        omega,
    })
}

proptest! {
    #[test]
    fn commands_stay_in_the_window(s in state_strategy(), seed in 0u64..1000) {
        let profile = RobotProfile::default();
        let params = DwaParams::default();
        let near = random_dwa_fixture(seed).obstacles;
        let (cmd, r) = dwa_step(&s, (s.x + 3.0, s.y), &near, &profile, &params);
        let v_lo = (s.v - profile.accel_v * params.dt).max(profile.v_min);
        let v_hi = (s.v + profile.accel_v * params.dt).min(profile.v_max);
        let w_lo = (s.omega - profile.accel_omega * params.dt).max(-profile.omega_max);
        let w_hi = (s.omega + profile.accel_omega * params.dt).min(profile.omega_max);
        if cmd != VelocityCommand::STOP {
            prop_assert!(cmd.v >= v_lo - 1e-12 && cmd.v <= v_hi + 1e-12);
            prop_assert!(cmd.omega >= w_lo - 1e-12 && cmd.omega <= w_hi + 1e-12);
            prop_assert!(r.min_clearance > 0.0);
        }
        for c in sample_window(&s, &profile, &params) {
            prop_assert!(c.v >= v_lo - 1e-12 && c.v <= v_hi + 1e-12);
            prop_assert!(c.omega.abs() <= profile.omega_max + 1e-12);
        }
    }
}
