//! Reference shortest-time planner.
//!
//! Plain Dijkstra over the full neighbor relation with no heuristic, no
//! pruning and no shared search state. Used to check the other strategies.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use crate::costmodel::{edge_total, Metric, RobotProfile};
use crate::error::Result;
use crate::gridmap::{CellIndex, HeightGrid, TraversalClass};

use super::{PlanOutcome, PlanResult, Planner, SearchStats, StepMode};

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Minimum-time path by exhaustive Dijkstra. `total_time_s` is the distance
/// label of the goal.
pub fn oracle_plan(
    grid: &HeightGrid,
    start: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
) -> Result<PlanOutcome> {
    grid.check(start)?;
    grid.check(goal)?;
    profile.validate()?;
    let began = Instant::now();
    let mut dist: HashMap<CellIndex, f64> = HashMap::new();
    let mut parent: HashMap<CellIndex, CellIndex> = HashMap::new();
    let mut done: HashMap<CellIndex, ()> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut stats = SearchStats::default();
    let mut searched = Vec::new();

    dist.insert(start, 0.0);
    heap.push(Reverse((Dist(0.0), start)));
    while let Some(Reverse((Dist(d), cell))) = heap.pop() {
        if done.insert(cell, ()).is_some() {
            continue;
        }
        stats.nodes_expanded += 1;
        searched.push(cell);
        if cell == goal {
            break;
        }
        for nb in grid.successors(cell, profile) {
            let nd = d + edge_total(grid, cell, nb.cell, nb.kind, nb.class, profile);
            if dist.get(&nb.cell).is_none_or(|&old| nd < old) {
                dist.insert(nb.cell, nd);
                parent.insert(nb.cell, cell);
                heap.push(Reverse((Dist(nd), nb.cell)));
                stats.nodes_generated += 1;
            }
        }
    }
    stats.wall_clock = began.elapsed();

    if !done.contains_key(&goal) {
        return Ok(PlanOutcome::NoPath(stats));
    }
    let mut path = vec![goal];
    while let Some(&p) = parent.get(path.last().unwrap()) {
        path.push(p);
    }
    path.reverse();
    let modes = path
        .windows(2)
        .map(|w| {
            let dh = grid.elevation(w[1]) - grid.elevation(w[0]);
            let kind = w[0].move_kind_to(w[1]).expect("adjacent");
            match profile.classify_height_step(dh, kind) {
                TraversalClass::Overcome if dh > 0.0 => StepMode::OvercomeUp,
                TraversalClass::Overcome => StepMode::OvercomeDown,
                _ => StepMode::Direct,
            }
        })
        .collect();
    Ok(PlanOutcome::Found(PlanResult {
        planner: Planner::Oracle,
        metric: Metric::Octile,
        path,
        modes,
        total_time_s: dist[&goal],
        stats,
        searched,
    }))
}
