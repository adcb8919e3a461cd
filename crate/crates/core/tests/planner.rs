use std::collections::HashSet;
use std::f64::consts::SQRT_2;

use proptest::prelude::*;
use stepnav::costmodel::{heuristic_time, Metric, RobotProfile};
use stepnav::gridmap::{classify_transition, CellIndex, HeightGrid, TraversalClass};
use stepnav::planner::{
    oracle_plan, path_time, plan, PlanOutcome, PlanResult, Planner, StepMode, Strategy as SearchStrategy,
};

const LEVELS: [f64; 4] = [0.0, 0.02, 0.3, 1.0];

fn grid_strategy(w: usize, h: usize) -> impl Strategy<Value = HeightGrid> {
    prop::collection::vec(0usize..4, w * h)
        .prop_map(move |ix| HeightGrid::new(w, h, 1.0, ix.into_iter().map(|i| LEVELS[i]).collect()).unwrap())
}

fn case(w: usize, h: usize) -> impl Strategy<Value = (HeightGrid, CellIndex, CellIndex)> {
    (grid_strategy(w, h), 0..w, 0..h, 0..w, 0..h)
        .prop_map(|(g, sx, sy, tx, ty)| (g, CellIndex::new(sx, sy), CellIndex::new(tx, ty)))
}

/// Edge cost written out from the default profile numbers, independent of
/// the library's cost code.
fn reference_cost(grid: &HeightGrid, a: CellIndex, b: CellIndex) -> Option<f64> {
    let diagonal = a.x != b.x && a.y != b.y;
    let dh = grid.elevation(b) - grid.elevation(a);
    let travel = if diagonal { SQRT_2 } else { 1.0 };
    if dh.abs() > 0.5 {
        None
    } else if dh.abs() < 0.05 {
        Some(travel)
    } else if diagonal {
        None
    } else if dh > 0.0 {
        Some(travel + 4.0 * dh)
    } else {
        Some(travel - 3.0 * dh)
    }
}

/// All-pairs shortest times by Floyd-Warshall.
fn all_pairs(grid: &HeightGrid) -> Vec<Vec<f64>> {
    let n = grid.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        let a = grid.cell_at(i);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (x, y) = (a.x as i64 + dx, a.y as i64 + dy);
                if (dx, dy) == (0, 0) || x < 0 || y < 0 || x >= grid.width() as i64 || y >= grid.height() as i64 {
                    continue;
                }
                let b = CellIndex::new(x as usize, y as usize);
                if let Some(c) = reference_cost(grid, a, b) {
                    row[grid.index_of(b)] = c;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn check_path(grid: &HeightGrid, p: &RobotProfile, start: CellIndex, goal: CellIndex, r: &PlanResult) {
    assert_eq!(r.path.first(), Some(&start));
    assert_eq!(r.path.last(), Some(&goal));
    assert_eq!(r.modes.len(), r.path_steps());
    for (w, mode) in r.path.windows(2).zip(&r.modes) {
        let class = classify_transition(grid, w[0], w[1], p).expect("adjacent in-bounds steps");
        assert_ne!(class, TraversalClass::Blocked);
        assert_eq!(mode.class(), class);
        if *mode == StepMode::OvercomeUp {
            assert!(grid.elevation(w[1]) > grid.elevation(w[0]));
        }
    }
    let recomputed = path_time(grid, p, &r.path).unwrap();
    assert!((recomputed - r.total_time_s).abs() < 1e-9);
    assert!(r.stats.nodes_expanded <= r.stats.nodes_generated);
    let unique: HashSet<_> = r.searched.iter().collect();
    assert_eq!(unique.len(), r.searched.len(), "a cell was expanded twice");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn astar_matches_oracle((grid, start, goal) in case(15, 15)) {
        let p = RobotProfile::default();
        let oracle = oracle_plan(&grid, start, goal, &p).unwrap();
        let astar = plan(&grid, start, goal, &p, SearchStrategy::Abfs, Metric::Octile).unwrap();
        prop_assert_eq!(oracle.is_found(), astar.is_found());
        if let (Some(o), Some(a)) = (oracle.as_found(), astar.as_found()) {
            prop_assert!((o.total_time_s - a.total_time_s).abs() <= 1e-9,
                "astar {} oracle {}", a.total_time_s, o.total_time_s);
        }
    }

    #[test]
    fn every_strategy_returns_valid_paths((grid, start, goal) in case(15, 15)) {
        let p = RobotProfile::default();
        let oracle = oracle_plan(&grid, start, goal, &p).unwrap();
        for s in SearchStrategy::ALL {
            let out = plan(&grid, start, goal, &p, s, Metric::Octile).unwrap();
            prop_assert_eq!(out.is_found(), oracle.is_found(), "{} completeness", s);
            if let (Some(r), Some(o)) = (out.as_found(), oracle.as_found()) {
                check_path(&grid, &p, start, goal, r);
                prop_assert!(r.total_time_s >= o.total_time_s - 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_matches_floyd_warshall((grid, start, goal) in case(8, 8)) {
        let p = RobotProfile::default();
        let d = all_pairs(&grid);
        let expect = d[grid.index_of(start)][grid.index_of(goal)];
        match oracle_plan(&grid, start, goal, &p).unwrap() {
            PlanOutcome::Found(r) => prop_assert!((r.total_time_s - expect).abs() < 1e-9),
            PlanOutcome::NoPath(_) => prop_assert!(expect.is_infinite()),
        }
    }

    #[test]
    fn octile_heuristic_is_admissible((grid, _s, goal) in case(15, 15)) {
        let p = RobotProfile::default();
        let d = all_pairs(&grid);
        let gi = grid.index_of(goal);
        for (i, row) in d.iter().enumerate() {
            let h = heuristic_time(grid.cell_at(i), goal, &grid, &p, Metric::Octile);
            prop_assert!(h <= row[gi] + 1e-9);
        }
    }

    #[test]
    fn astar_pops_nondecreasing_f((grid, start, goal) in case(15, 15)) {
        let p = RobotProfile::default();
        let d = all_pairs(&grid);
        let si = grid.index_of(start);
        if let PlanOutcome::Found(r) = plan(&grid, start, goal, &p, SearchStrategy::Abfs, Metric::Octile).unwrap() {
            let mut last = f64::NEG_INFINITY;
            for c in &r.searched {
                let f = d[si][grid.index_of(*c)] + heuristic_time(*c, goal, &grid, &p, Metric::Octile);
                prop_assert!(f >= last - 1e-9);
                last = f;
            }
        }
    }

    #[test]
    fn plans_are_deterministic((grid, start, goal) in case(15, 15)) {
        let p = RobotProfile::default();
        for s in SearchStrategy::ALL {
            let a = plan(&grid, start, goal, &p, s, Metric::Octile).unwrap();
            let b = plan(&grid, start, goal, &p, s, Metric::Octile).unwrap();
            if let (Some(a), Some(b)) = (a.as_found(), b.as_found()) {
                prop_assert_eq!(a.to_json(), b.to_json());
            } else {
                prop_assert_eq!(a.is_found(), b.is_found());
            }
        }
    }
}

#[test]
fn start_is_goal() {
    let grid = HeightGrid::flat(4, 4, 1.0).unwrap();
    let p = RobotProfile::default();
    let c = CellIndex::new(2, 1);
    for s in SearchStrategy::ALL {
        let r = plan(&grid, c, c, &p, s, Metric::Octile).unwrap().found().unwrap();
        assert_eq!(r.path, vec![c]);
        assert_eq!(r.total_time_s, 0.0);
        assert_eq!(r.stats.nodes_expanded, 1);
    }
    let o = oracle_plan(&grid, c, c, &p).unwrap().found().unwrap();
    assert_eq!(o.total_time_s, 0.0);
}

#[test]
fn flat_diagonal_run() {
    let grid = HeightGrid::flat(5, 5, 1.0).unwrap();
    let p = RobotProfile::default();
    let (s, g) = (CellIndex::new(0, 0), CellIndex::new(4, 4));
    let o = oracle_plan(&grid, s, g, &p).unwrap().found().unwrap();
    assert!((o.total_time_s - 4.0 * SQRT_2).abs() < 1e-12);
    assert_eq!(o.planner, Planner::Oracle);
    for st in SearchStrategy::ALL {
        let r = plan(&grid, s, g, &p, st, Metric::Octile).unwrap().found().unwrap();
        assert_eq!(r.path.len(), 5);
        assert!((r.total_time_s - 4.0 * SQRT_2).abs() < 1e-12);
    }
}

#[test]
fn raised_goal_is_climbed() {
    let mut h = vec![0.0; 36];
    h[3 * 6 + 4] = 0.3;
    let grid = HeightGrid::new(6, 6, 1.0, h).unwrap();
    let p = RobotProfile::default();
    let goal = CellIndex::new(4, 3);
    for s in SearchStrategy::ALL {
        let r = plan(&grid, CellIndex::new(0, 0), goal, &p, s, Metric::Octile)
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(r.modes.last(), Some(&StepMode::OvercomeUp), "{s}");
    }
    // The same goal is unreachable for a planar robot.
    let planar = p.planar();
    assert!(!plan(
        &grid,
        CellIndex::new(0, 0),
        goal,
        &planar,
        SearchStrategy::Abfs,
        Metric::Octile
    )
    .unwrap()
    .is_found());
}

#[test]
fn enclosed_goal_is_no_path() {
    let grid = HeightGrid::from_fn(7, 7, 1.0, |x, y| {
        if (2..=4).contains(&x) && (2..=4).contains(&y) && (x, y) != (3, 3) {
            1.0
        } else {
            0.0
        }
    })
    .unwrap();
    let p = RobotProfile::default();
    for s in SearchStrategy::ALL {
        let out = plan(&grid, CellIndex::new(0, 0), CellIndex::new(3, 3), &p, s, Metric::Octile).unwrap();
        assert!(matches!(out, PlanOutcome::NoPath(_)), "{s}");
    }
}

#[test]
fn out_of_bounds_endpoints_are_input_errors() {
    let grid = HeightGrid::flat(3, 3, 1.0).unwrap();
    let p = RobotProfile::default();
    assert!(plan(
        &grid,
        CellIndex::new(3, 0),
        CellIndex::new(0, 0),
        &p,
        SearchStrategy::Abfs,
        Metric::Octile
    )
    .is_err());
    assert!(oracle_plan(&grid, CellIndex::new(0, 0), CellIndex::new(0, 9), &p).is_err());
}

#[test]
fn plan_json_round_trip() {
    let grid = HeightGrid::from_fn(6, 4, 1.0, |x, _| if x == 3 { 0.2 } else { 0.0 }).unwrap();
    let p = RobotProfile::default();
    let r = plan(
        &grid,
        CellIndex::new(0, 1),
        CellIndex::new(5, 1),
        &p,
        SearchStrategy::Multimodal,
        Metric::Octile,
    )
    .unwrap()
    .found()
    .unwrap();
    let bytes = r.to_json();
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert!(v["path"][0].is_array());
    assert!(v["modes"].as_array().unwrap().iter().any(|m| m == "overcome_up"));
    assert!(v["total_time_s"].is_number());
    assert!(v["stats"]["nodes_expanded"].is_number());
    assert!(v["stats"].get("wall_clock").is_none());
    let back = PlanResult::from_json(&bytes).unwrap();
    assert_eq!(back.path, r.path);
    assert_eq!(back.modes, r.modes);
    assert_eq!(back.total_time_s, r.total_time_s);
    assert_eq!(back.stats.nodes_expanded, r.stats.nodes_expanded);
}

#[test]
fn manhattan_metric_is_selectable() {
    let grid = HeightGrid::flat(6, 6, 1.0).unwrap();
    let p = RobotProfile::default();
    let r = plan(
        &grid,
        CellIndex::new(0, 0),
        CellIndex::new(5, 2),
        &p,
        SearchStrategy::Abfs,
        Metric::Manhattan,
    )
    .unwrap()
    .found()
    .unwrap();
    assert_eq!(r.metric, Metric::Manhattan);
    assert_eq!(*r.path.last().unwrap(), CellIndex::new(5, 2));
}
