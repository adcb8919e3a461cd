//! Wall-follow episodes.
//!
//! When every goal-ward neighbor of a popped node is a barrier (blocked, or a
//! step whose climbing time exceeds the switch threshold) the search switches
//! to a greedy walk along the barrier, once clockwise and once
//! counter-clockwise. Each walk stops at the first cell whose heuristic is no
//! worse than the anchor's; that cell is a jump point and re-enters the
//! best-first search with the exact time accumulated along the walk.

use std::collections::HashSet;

use crate::costmodel::{edge_total, heuristic_time, Metric, RobotProfile};
use crate::gridmap::{CellIndex, HeightGrid, TraversalClass};

use super::SearchNode;

/// Neighbor offsets in clockwise order (row 0 at the top), starting north.
const RING: [(i32, i32); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    /// Climbing time (s) above which a step counts as a barrier.
    pub switch_threshold: f64,
    /// Maximum number of cells followed in each direction.
    pub budget: usize,
}

impl EpisodeConfig {
    /// Threshold of two cardinal moves and a budget of `4 * (width + height)`.
    pub fn for_grid(grid: &HeightGrid, profile: &RobotProfile) -> Self {
        EpisodeConfig {
            switch_threshold: 2.0 * grid.cell_size() / profile.speed,
            budget: 4 * (grid.width() + grid.height()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpPoint {
    pub node: SearchNode,
    /// Followed cells strictly between the anchor and the jump point.
    pub via: Vec<CellIndex>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Episode {
    pub triggered: bool,
    pub jump_points: Vec<JumpPoint>,
    /// Every cell stepped on by either walk, in visit order.
    pub followed: Vec<CellIndex>,
}

struct Barrier<'a> {
    grid: &'a HeightGrid,
    profile: &'a RobotProfile,
    threshold: f64,
}

impl Barrier<'_> {
    fn blocks(&self, from: CellIndex, to: CellIndex) -> bool {
        let kind = from.move_kind_to(to).expect("ring neighbors are adjacent");
        let dh = self.grid.elevation(to) - self.grid.elevation(from);
        match self.profile.classify_height_step(dh, kind) {
            TraversalClass::Blocked => true,
            TraversalClass::Overcome => self.profile.climb_time(dh) > self.threshold,
            TraversalClass::Direct => false,
        }
    }
}

/// Ring index of the best goal-ward barrier neighbor of `at`, or `None` when
/// some goal-ward neighbor is open (or there is none).
fn blocking_direction(
    grid: &HeightGrid,
    at: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    metric: Metric,
    barrier: &Barrier<'_>,
) -> Option<usize> {
    let here = heuristic_time(at, goal, grid, profile, metric);
    let mut best: Option<(f64, usize)> = None;
    for (i, &(dx, dy)) in RING.iter().enumerate() {
        let Some(n) = grid.step(at, dx, dy) else {
            continue;
        };
        let h = heuristic_time(n, goal, grid, profile, metric);
        if h >= here {
            continue;
        }
        if !barrier.blocks(at, n) {
            return None;
        }
        if best.is_none_or(|(bh, _)| h < bh) {
            best = Some((h, i));
        }
    }
    best.map(|(_, i)| i)
}

/// True when `at` is a switching cell: it has goal-ward neighbors and all of
/// them are barriers.
pub fn needs_episode(
    grid: &HeightGrid,
    at: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    metric: Metric,
    config: &EpisodeConfig,
) -> bool {
    let barrier = Barrier {
        grid,
        profile,
        threshold: config.switch_threshold,
    };
    at != goal && blocking_direction(grid, at, goal, profile, metric, &barrier).is_some()
}

/// Follows the barrier in front of `anchor` in both directions.
///
/// Returns no episode (`triggered == false`) when `anchor` is not a switching
/// cell. A walk ends at its jump point, when it would leave the map, when it
/// is boxed in, when it comes back to a state it has already been in, or when
/// its budget runs out.
pub fn wall_follow_episode(
    grid: &HeightGrid,
    anchor: &SearchNode,
    goal: CellIndex,
    profile: &RobotProfile,
    metric: Metric,
    config: &EpisodeConfig,
) -> Episode {
    let barrier = Barrier {
        grid,
        profile,
        threshold: config.switch_threshold,
    };
    let start = anchor.cell;
    if start == goal || !grid.contains(start) {
        return Episode::default();
    }
    let Some(first_back) = blocking_direction(grid, start, goal, profile, metric, &barrier) else {
        return Episode::default();
    };
    let anchor_h = heuristic_time(start, goal, grid, profile, metric);

    let mut episode = Episode {
        triggered: true,
        ..Episode::default()
    };
    for turn in [1usize, 7] {
        let mut cur = start;
        let mut back = first_back;
        let mut g = anchor.g;
        let mut via = Vec::new();
        let mut seen = HashSet::new();
        'walk: for _ in 0..config.budget {
            let mut next = None;
            for k in 1..8 {
                let i = (back + turn * k) % 8;
                let (dx, dy) = RING[i];
                let Some(n) = grid.step(cur, dx, dy) else {
                    break 'walk;
                };
                if !barrier.blocks(cur, n) {
                    next = Some((i, n));
                    break;
                }
            }
            let Some((i, n)) = next else { break };
            // The last barrier cell checked becomes the new backtrack cell.
            let (bx, by) = RING[(i + turn * 7) % 8];
            let (nx, ny) = RING[i];
            let rel = (bx - nx, by - ny);
            back = RING
                .iter()
                .position(|&o| o == rel)
                .expect("consecutive ring cells touch");

            let kind = cur.move_kind_to(n).expect("adjacent");
            let dh = grid.elevation(n) - grid.elevation(cur);
            let class = profile.classify_height_step(dh, kind);
            g += edge_total(grid, cur, n, kind, class, profile);
            let overcame = class == TraversalClass::Overcome;
            let prev = cur;
            cur = n;
            if cur == start || !seen.insert((cur, back)) {
                break;
            }
            episode.followed.push(cur);
            let h = heuristic_time(cur, goal, grid, profile, metric);
            if h <= anchor_h {
                episode.jump_points.push(JumpPoint {
                    node: SearchNode {
                        cell: cur,
                        g,
                        f: g + h,
                        parent: Some(prev),
                        via_overcome: overcame,
                    },
                    via: via.clone(),
                });
                break;
            }
            via.push(cur);
        }
    }
    episode
}
