//! Global planners over a [`HeightGrid`].
//!
//! Three strategies share one best-first loop ([`search`]):
//!
//! * [`Strategy::Abfs`] orders the open list by `f = g + h` (A*).
//! * [`Strategy::Gbfs`] orders it by `h` alone (greedy best-first).
//! * [`Strategy::Multimodal`] is A* ordering with jump-point expansion over
//!   uniform terrain and wall-follow episodes in front of expensive barriers
//!   (see [`episode`]).
//!
//! [`oracle_plan`] is an independent uniform-cost search used as ground truth.

mod episode;
mod jump;
mod oracle;
mod search;

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::costmodel::{edge_total, Metric, RobotProfile};
use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, HeightGrid, MoveKind, TraversalClass};

pub use episode::{needs_episode, wall_follow_episode, Episode, EpisodeConfig, JumpPoint};
pub use oracle::oracle_plan;

/// Which best-first ordering to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "astar")]
    Abfs,
    #[serde(rename = "greedy")]
    Gbfs,
    #[default]
    #[serde(rename = "multimodal")]
    Multimodal,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Gbfs, Strategy::Abfs, Strategy::Multimodal];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Abfs => "astar",
            Strategy::Gbfs => "greedy",
            Strategy::Multimodal => "multimodal",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "astar" | "abfs" => Ok(Strategy::Abfs),
            "greedy" | "gbfs" => Ok(Strategy::Gbfs),
            "multimodal" => Ok(Strategy::Multimodal),
            other => Err(Error::invalid("strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

/// Label of the planner that produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Planner {
    Astar,
    Greedy,
    Multimodal,
    Oracle,
}

impl From<Strategy> for Planner {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Abfs => Planner::Astar,
            Strategy::Gbfs => Planner::Greedy,
            Strategy::Multimodal => Planner::Multimodal,
        }
    }
}

/// Open/closed list record of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchNode {
    pub cell: CellIndex,
    pub g: f64,
    pub f: f64,
    pub parent: Option<CellIndex>,
    pub via_overcome: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub nodes_generated: usize,
    pub mode_switches: usize,
    pub jump_points: usize,
    /// Cells visited by wall-follow episodes; never part of the open list.
    pub cells_followed: usize,
    /// Measured search time. Not serialized so that plan files stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub wall_clock: Duration,
}

/// Per-step annotation of a planned path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Direct,
    OvercomeUp,
    OvercomeDown,
}

impl StepMode {
    pub fn class(self) -> TraversalClass {
        match self {
            StepMode::Direct => TraversalClass::Direct,
            _ => TraversalClass::Overcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub planner: Planner,
    pub metric: Metric,
    /// Cells from start to goal.
    pub path: Vec<CellIndex>,
    /// One entry per step, `modes[i]` describes `path[i] -> path[i + 1]`.
    pub modes: Vec<StepMode>,
    pub total_time_s: f64,
    pub stats: SearchStats,
    /// Expanded cells in expansion order.
    #[serde(default)]
    pub searched: Vec<CellIndex>,
}

impl PlanResult {
    pub fn path_steps(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn overcome_steps(&self) -> usize {
        self.modes.iter().filter(|m| **m != StepMode::Direct).count()
    }

    pub fn step_kinds(&self) -> Vec<MoveKind> {
        self.path
            .windows(2)
            .map(|w| w[0].move_kind_to(w[1]).expect("plan paths are adjacent"))
            .collect()
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("plan serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Result of a planning query. Running out of open nodes is an ordinary
/// outcome, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Found(PlanResult),
    NoPath(SearchStats),
}

impl PlanOutcome {
    pub fn found(self) -> Option<PlanResult> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            PlanOutcome::NoPath(_) => None,
        }
    }

    pub fn as_found(&self) -> Option<&PlanResult> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            PlanOutcome::NoPath(_) => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, PlanOutcome::Found(_))
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            PlanOutcome::Found(p) => &p.stats,
            PlanOutcome::NoPath(s) => s,
        }
    }
}

/// Plans from `start` to `goal` with the default episode configuration.
pub fn plan(
    grid: &HeightGrid,
    start: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    strategy: Strategy,
    metric: Metric,
) -> Result<PlanOutcome> {
    let config = EpisodeConfig::for_grid(grid, profile);
    plan_with_config(grid, start, goal, profile, strategy, metric, &config)
}

pub fn plan_with_config(
    grid: &HeightGrid,
    start: CellIndex,
    goal: CellIndex,
    profile: &RobotProfile,
    strategy: Strategy,
    metric: Metric,
    episodes: &EpisodeConfig,
) -> Result<PlanOutcome> {
    grid.check(start)?;
    grid.check(goal)?;
    profile.validate()?;
    search::run(grid, start, goal, profile, strategy, metric, episodes)
}

/// Parent pointers of a search, rooted at the start cell.
///
/// A parent does not have to be adjacent to its child: jump-point links are
/// straight or diagonal runs, and wall-follow links carry the followed cells
/// explicitly.
#[derive(Debug, Clone)]
pub struct SearchTree {
    width: usize,
    height: usize,
    root: CellIndex,
    parent: Vec<u32>,
    corner: Vec<u32>,
    segments: HashMap<u32, Vec<CellIndex>>,
}

const NO_PARENT: u32 = u32::MAX;

impl SearchTree {
    pub fn new(width: usize, height: usize, root: CellIndex) -> Self {
        SearchTree {
            width,
            height,
            root,
            parent: vec![NO_PARENT; width * height],
            corner: vec![NO_PARENT; width * height],
            segments: HashMap::new(),
        }
    }

    pub fn root(&self) -> CellIndex {
        self.root
    }

    fn idx(&self, c: CellIndex) -> usize {
        c.y * self.width + c.x
    }

    fn cell(&self, i: u32) -> CellIndex {
        CellIndex::new(i as usize % self.width, i as usize / self.width)
    }

    pub fn set_parent(&mut self, child: CellIndex, parent: CellIndex) {
        let i = self.idx(child);
        self.parent[i] = self.idx(parent) as u32;
        self.corner[i] = NO_PARENT;
        self.segments.remove(&(i as u32));
    }

    /// Sets a parent reached by a diagonal run to `corner` followed by a
    /// straight run to `child`.
    pub fn set_parent_corner(&mut self, child: CellIndex, parent: CellIndex, corner: CellIndex) {
        let i = self.idx(child);
        self.parent[i] = self.idx(parent) as u32;
        self.corner[i] = self.idx(corner) as u32;
        self.segments.remove(&(i as u32));
    }

    /// Sets a parent reached through the listed intermediate cells.
    pub fn set_parent_via(&mut self, child: CellIndex, parent: CellIndex, via: Vec<CellIndex>) {
        let i = self.idx(child);
        self.parent[i] = self.idx(parent) as u32;
        self.corner[i] = NO_PARENT;
        if via.is_empty() {
            self.segments.remove(&(i as u32));
        } else {
            self.segments.insert(i as u32, via);
        }
    }

    pub fn parent_of(&self, child: CellIndex) -> Option<CellIndex> {
        let p = self.parent[self.idx(child)];
        (p != NO_PARENT).then(|| self.cell(p))
    }
}

/// Walks parent pointers from `goal` back to the tree root and returns the
/// cells in start-to-goal order, with every intermediate cell filled in.
pub fn reconstruct_path(tree: &SearchTree, goal: CellIndex) -> Result<Vec<CellIndex>> {
    if goal.x >= tree.width || goal.y >= tree.height {
        return Err(Error::BrokenParentChain(goal));
    }
    let mut rev = vec![goal];
    let mut cur = goal;
    let limit = tree.width * tree.height;
    while cur != tree.root {
        let parent = tree.parent_of(cur).ok_or(Error::BrokenParentChain(cur))?;
        if let Some(via) = tree.segments.get(&(tree.idx(cur) as u32)) {
            rev.extend(via.iter().rev().copied());
        } else {
            let corner = tree.corner[tree.idx(cur)];
            if corner == NO_PARENT {
                push_run(&mut rev, cur, parent)?;
            } else {
                let corner = tree.cell(corner);
                push_run(&mut rev, cur, corner)?;
                rev.push(corner);
                push_run(&mut rev, corner, parent)?;
            }
        }
        rev.push(parent);
        cur = parent;
        if rev.len() > limit * 8 {
            return Err(Error::BrokenParentChain(cur));
        }
    }
    rev.reverse();
    Ok(rev)
}

/// Pushes the cells strictly between `from` and `to`, which must share a
/// row, a column or a diagonal.
fn push_run(rev: &mut Vec<CellIndex>, from: CellIndex, to: CellIndex) -> Result<()> {
    let dx = to.x as i64 - from.x as i64;
    let dy = to.y as i64 - from.y as i64;
    let n = dx.abs().max(dy.abs());
    if n == 0 || !(dx == 0 || dy == 0 || dx.abs() == dy.abs()) {
        return Err(Error::BrokenParentChain(from));
    }
    let (sx, sy) = (dx.signum(), dy.signum());
    for k in 1..n {
        rev.push(CellIndex::new(
            (from.x as i64 + sx * k) as usize,
            (from.y as i64 + sy * k) as usize,
        ));
    }
    Ok(())
}

/// Annotates a cell path and sums its step costs.
pub(crate) fn annotate_path(
    grid: &HeightGrid,
    profile: &RobotProfile,
    path: &[CellIndex],
) -> Result<(Vec<StepMode>, f64)> {
    let mut modes = Vec::with_capacity(path.len().saturating_sub(1));
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let kind = a.move_kind_to(b).ok_or(Error::BrokenParentChain(b))?;
        let dh = grid.elevation(b) - grid.elevation(a);
        let class = profile.classify_height_step(dh, kind);
        let mode = match class {
            TraversalClass::Blocked => return Err(Error::BrokenParentChain(b)),
            TraversalClass::Direct => StepMode::Direct,
            TraversalClass::Overcome if dh > 0.0 => StepMode::OvercomeUp,
            TraversalClass::Overcome => StepMode::OvercomeDown,
        };
        total += edge_total(grid, a, b, kind, class, profile);
        modes.push(mode);
    }
    Ok((modes, total))
}

/// Sum of step costs along `path`, recomputed from the grid.
pub fn path_time(grid: &HeightGrid, profile: &RobotProfile, path: &[CellIndex]) -> Result<f64> {
    annotate_path(grid, profile, path).map(|(_, t)| t)
}
