use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::costmodel::{edge_total, heuristic_time, Metric, RobotProfile};
use crate::error::Result;
use crate::gridmap::{CellIndex, HeightGrid, TraversalClass};

use super::episode::{needs_episode, wall_follow_episode, EpisodeConfig};
use super::jump::Jumper;
use super::{
    annotate_path, reconstruct_path, PlanOutcome, PlanResult, Planner, SearchNode, SearchStats, SearchTree, Strategy,
};

const IMPROVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Entry {
    priority: f64,
    g: f64,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap pops the greatest entry: lowest priority, then deepest g,
    // then lowest row-major index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.index.cmp(&self.index))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Unseen,
    Open,
    Closed,
}

struct Search<'a> {
    grid: &'a HeightGrid,
    profile: &'a RobotProfile,
    goal: CellIndex,
    metric: Metric,
    greedy: bool,
    g: Vec<f64>,
    state: Vec<State>,
    tree: SearchTree,
    heap: BinaryHeap<Entry>,
    stats: SearchStats,
}

impl Search<'_> {
    fn h(&self, c: CellIndex) -> f64 {
        heuristic_time(c, self.goal, self.grid, self.profile, self.metric)
    }

    /// Records `g` for `cell` if it improves on what is known. Returns whether
    /// the cell was (re)opened.
    fn relax(&mut self, cell: CellIndex, g: f64) -> bool {
        let i = self.grid.index_of(cell);
        if self.state[i] == State::Closed || g >= self.g[i] - IMPROVE_EPS {
            return false;
        }
        self.g[i] = g;
        self.state[i] = State::Open;
        let h = self.h(cell);
        let priority = if self.greedy { h } else { g + h };
        self.heap.push(Entry { priority, g, index: i });
        self.stats.nodes_generated += 1;
        true
    }
}

pub(super) fn run(
    grid: &HeightGrid,
    start: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    strategy: Strategy,
    metric: Metric,
    episodes: &EpisodeConfig,
) -> Result<PlanOutcome> {
    let began = Instant::now();
    let n = grid.len();
    let mut s = Search {
        grid,
        profile,
        goal,
        metric,
        greedy: strategy == Strategy::Gbfs,
        g: vec![f64::INFINITY; n],
        state: vec![State::Unseen; n],
        tree: SearchTree::new(grid.width(), grid.height(), start),
        heap: BinaryHeap::new(),
        stats: SearchStats::default(),
    };
    let multimodal = strategy == Strategy::Multimodal;
    let jumper = multimodal.then(|| Jumper::new(grid, profile, goal));
    let mut followed = if multimodal { vec![false; n] } else { Vec::new() };
    let mut searched = Vec::new();

    s.relax(start, 0.0);
    let mut reached = false;
    while let Some(e) = s.heap.pop() {
        let i = e.index;
        if s.state[i] == State::Closed || e.g > s.g[i] {
            continue;
        }
        s.state[i] = State::Closed;
        let cell = grid.cell_at(i);
        let g = s.g[i];
        s.stats.nodes_expanded += 1;
        searched.push(cell);
        if cell == goal {
            reached = true;
            break;
        }

        if !multimodal {
            for nb in grid.successors(cell, profile) {
                let cost = edge_total(grid, cell, nb.cell, nb.kind, nb.class, profile);
                if s.relax(nb.cell, g + cost) {
                    s.tree.set_parent(nb.cell, cell);
                }
            }
            continue;
        }

        if !followed[i] && needs_episode(grid, cell, goal, profile, metric, episodes) {
            let anchor = SearchNode {
                cell,
                g,
                f: g + s.h(cell),
                parent: s.tree.parent_of(cell),
                via_overcome: false,
            };
            let ep = wall_follow_episode(grid, &anchor, goal, profile, metric, episodes);
            s.stats.mode_switches += 1;
            s.stats.cells_followed += ep.followed.len();
            for c in &ep.followed {
                followed[grid.index_of(*c)] = true;
            }
            for jp in ep.jump_points {
                s.stats.jump_points += 1;
                if s.relax(jp.node.cell, jp.node.g) {
                    s.tree.set_parent_via(jp.node.cell, cell, jp.via);
                }
            }
        }

        let jumper = jumper.as_ref().expect("multimodal");
        for dir in 0..8 {
            match jumper.step_class(cell, dir) {
                Some((next, TraversalClass::Overcome)) => {
                    let kind = cell.move_kind_to(next).expect("adjacent");
                    let cost = edge_total(grid, cell, next, kind, TraversalClass::Overcome, profile);
                    if s.relax(next, g + cost) {
                        s.tree.set_parent(next, cell);
                    }
                }
                Some((_, TraversalClass::Direct)) => jumper.scan(cell, dir, |l| {
                    if s.relax(l.cell, g + l.cost) {
                        match l.corner {
                            Some(c) => s.tree.set_parent_corner(l.cell, cell, c),
                            None => s.tree.set_parent(l.cell, cell),
                        }
                    }
                }),
                _ => {}
            }
        }
    }
    s.stats.wall_clock = began.elapsed();

    if !reached {
        return Ok(PlanOutcome::NoPath(s.stats));
    }
    let path = reconstruct_path(&s.tree, goal)?;
    let (modes, total_time_s) = annotate_path(grid, profile, &path)?;
    s.stats.wall_clock = began.elapsed();
    Ok(PlanOutcome::Found(PlanResult {
        planner: Planner::from(strategy),
        metric,
        path,
        modes,
        total_time_s,
        stats: s.stats,
        searched,
    }))
}
