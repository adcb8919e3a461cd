use proptest::prelude::*;
use stepnav::gridmap::{load_map, save_map, CellIndex, HeightGrid};
use stepnav::harness::fixtures;
use stepnav::mmp::{track, Controller, DynamicObstacle, ExecutionLog, Scenario};
use stepnav::planner::{plan, PlanResult};

const DRIFT: f64 = 1e-9;

proptest! {
    #[test]
    fn maps_round_trip(
        (w, h, heights) in (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), prop::collection::vec(-50.0..50.0f64, w * h))
        }),
        cs in 0.01..10.0f64,
    ) {
        let grid = HeightGrid::new(w, h, cs, heights).unwrap();
        let back = load_map(&save_map(&grid)).unwrap();
        prop_assert_eq!((back.width(), back.height()), (w, h));
        prop_assert!((back.cell_size() - cs).abs() < DRIFT);
        for (a, b) in grid.heights().iter().zip(back.heights()) {
            prop_assert!((a - b).abs() < DRIFT);
        }
    }

    #[test]
    fn scenarios_round_trip(
        x in 0.0..100.0f64, y in 0.0..100.0f64, r in 0.01..3.0f64,
        vx in -2.0..2.0f64, lambda in 0.0..1.0f64, seed in any::<u64>(), dt in 0.01..1.0f64,
    ) {
        let mut s = Scenario::new("m.json", CellIndex::new(1, 2), CellIndex::new(3, 4));
        s.unknown_obstacles = vec![DynamicObstacle {
            position: (x, y),
            radius: r,
            velocity: (vx, 0.0),
            waypoints: vec![(y, x)],
        }];
        s.dwa.lambda = lambda;
        s.seed = seed;
        s.sim_dt_s = dt;
        let back = Scenario::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(back.seed, seed);
        let o = &back.unknown_obstacles[0];
        prop_assert!((o.position.0 - x).abs() < DRIFT && (o.position.1 - y).abs() < DRIFT);
        prop_assert!((o.radius - r).abs() < DRIFT && (o.velocity.0 - vx).abs() < DRIFT);
        prop_assert!((back.dwa.lambda - lambda).abs() < DRIFT && (back.sim_dt_s - dt).abs() < DRIFT);
        prop_assert_eq!(back.to_json(), s.to_json());
    }
}

#[test]
fn minimal_scenario_uses_defaults() {
    let s = Scenario::from_json(br#"{"map": "map.json", "start": [0, 0], "goal": [2, 1]}"#).unwrap();
    assert_eq!(s, Scenario::new("map.json", CellIndex::new(0, 0), CellIndex::new(2, 1)));
}

#[test]
fn unknown_scenario_fields_are_rejected_in_nested_blocks() {
    let bad = br#"{"map": "m", "start": [0, 0], "goal": [1, 1], "dwa": {"lamda": 0.3}}"#;
    assert!(Scenario::from_json(bad).is_err());
}

#[test]
fn plans_round_trip() {
    for f in fixtures::all() {
        let s = &f.scenario;
        let p = plan(&f.grid, s.start, s.goal, &s.profile, s.strategy, s.metric)
            .unwrap()
            .found()
            .unwrap();
        let back = PlanResult::from_json(&p.to_json()).unwrap();
        assert_eq!(back.path, p.path);
        assert_eq!(back.modes, p.modes);
        assert_eq!(back.searched, p.searched);
        assert!((back.total_time_s - p.total_time_s).abs() < DRIFT);
        assert_eq!(back.to_json(), p.to_json());
    }
}

#[test]
fn logs_round_trip() {
    let f = fixtures::factory();
    for controller in [Controller::Dwa, Controller::Follow] {
        let log = track(&f.grid, &f.scenario, controller).unwrap();
        let back = ExecutionLog::from_json(&log.to_json()).unwrap();
        assert_eq!(back.events.len(), log.events.len());
        assert_eq!(back.trajectory.len(), log.trajectory.len());
        for (a, b) in log.trajectory.iter().zip(&back.trajectory) {
            let (a, b): ([f64; 6], [f64; 6]) = ((*a).into(), (*b).into());
            for k in 0..6 {
                assert!((a[k] - b[k]).abs() < DRIFT);
            }
        }
        assert_eq!(back.to_json(), log.to_json());
    }
}

#[test]
fn log_trajectory_is_written_as_six_number_rows() {
    let f = fixtures::wall_overcome();
    let log = track(&f.grid, &f.scenario, Controller::Dwa).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&log.to_json()).unwrap();
    let rows = v["trajectory"].as_array().unwrap();
    assert!(rows.iter().all(|r| r.as_array().is_some_and(|a| a.len() == 6)));
    assert!(v.get("min_clearance_m").is_some());
    assert!(v["events"].as_array().unwrap().iter().all(|e| e["event"].is_string()));
}
