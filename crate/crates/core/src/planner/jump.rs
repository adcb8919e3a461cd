//! Jump-point expansion.
//!
//! A cell is uniform when its 3x3 block is in bounds and every pair of cells
//! in it is joined by a direct move. Runs through uniform cells all cost the
//! same per move, so they are scanned instead of searched: a node at `p`
//! sends a ray in each direction, and the only cells that enter the open list
//! are the goal and the first non-uniform cell on each straight run or
//! diagonal-then-straight run. Such cells are expanded in every direction.

use crate::costmodel::{travel_time, RobotProfile};
use crate::gridmap::{CellIndex, HeightGrid, MoveKind, TraversalClass, NEIGHBOR_OFFSETS};

/// A cell reached by a ray, with the cost of the run and the turning cell of
/// a diagonal-then-straight run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Landing {
    pub cell: CellIndex,
    pub cost: f64,
    pub corner: Option<CellIndex>,
}

pub(super) struct Jumper<'a> {
    grid: &'a HeightGrid,
    profile: &'a RobotProfile,
    goal: CellIndex,
    uniform: Vec<bool>,
    /// Moves from a cell along each cardinal direction to the first
    /// non-uniform cell; zero when the first move leaves the map.
    runs: [Vec<u32>; 4],
    cardinal: f64,
    diagonal: f64,
}

impl<'a> Jumper<'a> {
    pub fn new(grid: &'a HeightGrid, profile: &'a RobotProfile, goal: CellIndex) -> Self {
        let (w, h) = (grid.width(), grid.height());
        let heights = grid.heights();
        let mut uniform = vec![false; w * h];
        for y in 1..h.saturating_sub(1) {
            for x in 1..w - 1 {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for row in y - 1..=y + 1 {
                    for &v in &heights[row * w + x - 1..=row * w + x + 1] {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                uniform[y * w + x] = hi - lo < profile.max_direct_height;
            }
        }
        let mut runs: [Vec<u32>; 4] = std::array::from_fn(|_| vec![0; w * h]);
        for (d, run) in runs.iter_mut().enumerate() {
            let (dx, dy) = NEIGHBOR_OFFSETS[d];
            // Visit cells so that the neighbor along (dx, dy) is filled first.
            let xs: Vec<usize> = if dx > 0 {
                (0..w).rev().collect()
            } else {
                (0..w).collect()
            };
            let ys: Vec<usize> = if dy > 0 {
                (0..h).rev().collect()
            } else {
                (0..h).collect()
            };
            for &y in &ys {
                for &x in &xs {
                    let nx = x as i64 + dx as i64;
                    let ny = y as i64 + dy as i64;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    run[y * w + x] = if uniform[n] { run[n] + 1 } else { 1 };
                }
            }
        }
        Jumper {
            grid,
            profile,
            goal,
            uniform,
            runs,
            cardinal: travel_time(MoveKind::Cardinal, grid, profile),
            diagonal: travel_time(MoveKind::Diagonal, grid, profile),
        }
    }

    #[inline]
    pub fn is_uniform(&self, c: CellIndex) -> bool {
        self.uniform[self.grid.index_of(c)]
    }

    #[inline]
    pub fn step_class(&self, at: CellIndex, dir: usize) -> Option<(CellIndex, TraversalClass)> {
        let (dx, dy) = NEIGHBOR_OFFSETS[dir];
        let n = self.grid.step(at, dx, dy)?;
        let kind = if dir < 4 {
            MoveKind::Cardinal
        } else {
            MoveKind::Diagonal
        };
        let dh = self.grid.elevation(n) - self.grid.elevation(at);
        Some((n, self.profile.classify_height_step(dh, kind)))
    }

    /// Straight run from `from` along cardinal `dir`, assuming the first move
    /// is direct. Returns the stopping cell and the number of moves.
    #[inline]
    fn straight(&self, from: CellIndex, dir: usize) -> Option<(CellIndex, usize)> {
        let k = self.runs[dir][self.grid.index_of(from)] as usize;
        if k == 0 {
            return None;
        }
        let (dx, dy) = NEIGHBOR_OFFSETS[dir];
        let g = self.goal;
        let along = if dx != 0 {
            (g.y == from.y).then(|| (g.x as i64 - from.x as i64) * dx as i64)
        } else {
            (g.x == from.x).then(|| (g.y as i64 - from.y as i64) * dy as i64)
        };
        let k = match along {
            Some(m) if m > 0 && m as usize <= k => m as usize,
            _ => k,
        };
        let x = from.x as i64 + dx as i64 * k as i64;
        let y = from.y as i64 + dy as i64 * k as i64;
        Some((CellIndex::new(x as usize, y as usize), k))
    }

    /// Scans the ray leaving `from` along `dir`, whose first move must be
    /// direct, and reports every cell that has to enter the open list.
    pub fn scan(&self, from: CellIndex, dir: usize, mut emit: impl FnMut(Landing)) {
        if dir < 4 {
            if let Some((cell, k)) = self.straight(from, dir) {
                emit(Landing {
                    cell,
                    cost: k as f64 * self.cardinal,
                    corner: None,
                });
            }
            return;
        }
        let (dx, dy) = NEIGHBOR_OFFSETS[dir];
        let subs = [cardinal_of(dx, 0), cardinal_of(0, dy)];
        let mut cur = from;
        let mut cost = 0.0;
        while let Some(next) = self.grid.step(cur, dx, dy) {
            cur = next;
            cost += self.diagonal;
            if cur == self.goal || !self.is_uniform(cur) {
                emit(Landing {
                    cell: cur,
                    cost,
                    corner: None,
                });
                return;
            }
            for &sub in &subs {
                if let Some((cell, k)) = self.straight(cur, sub) {
                    emit(Landing {
                        cell,
                        cost: cost + k as f64 * self.cardinal,
                        corner: Some(cur),
                    });
                }
            }
        }
    }
}

fn cardinal_of(dx: i32, dy: i32) -> usize {
    NEIGHBOR_OFFSETS[..4]
        .iter()
        .position(|&o| o == (dx, dy))
        .expect("cardinal offset")
}
