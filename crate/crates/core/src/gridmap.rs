//! Immutable 2.5D height grid and the traversal rules between adjacent cells.
//!
//! A [`HeightGrid`] stores one elevation per cell in row-major order with row 0
//! at the top. Whether the robot can move between two adjacent cells depends
//! only on the absolute height difference and on the thresholds carried by the
//! [`RobotProfile`], so the same map can be shared by robots with different
//! climbing ability.
//!
//! Moves that do not need any climbing are generated over the 8-neighborhood.
//! Moves that need the robot to climb or descend a step are only allowed face-on,
//! over the 4-neighborhood.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::costmodel::RobotProfile;
use crate::error::{Error, Result};

/// Neighbor offsets: the four cardinal directions first, then the diagonals.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [(0, -1), (1, 0), (0, 1), (-1, 0), (1, -1), (1, 1), (-1, 1), (-1, -1)];

/// Grid coordinates of a cell: `x` is the column, `y` the row.
///
/// Ordering is row-major (`y` first, then `x`), which is also the final
/// tie-break used by the planners.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellIndex {
    pub x: usize,
    pub y: usize,
}

impl CellIndex {
    pub const fn new(x: usize, y: usize) -> Self {
        CellIndex { x, y }
    }

    /// Returns the move kind joining `self` and `other`, or `None` when the
    /// cells are identical or not adjacent.
    pub fn move_kind_to(&self, other: CellIndex) -> Option<MoveKind> {
        let dx = self.x.abs_diff(other.x);
        let dy = self.y.abs_diff(other.y);
        match (dx, dy) {
            (1, 0) | (0, 1) => Some(MoveKind::Cardinal),
            (1, 1) => Some(MoveKind::Diagonal),
            _ => None,
        }
    }

    pub fn offset(&self, dx: i32, dy: i32) -> Option<CellIndex> {
        let x = self.x as i64 + dx as i64;
        let y = self.y as i64 + dy as i64;
        if x < 0 || y < 0 {
            None
        } else {
            Some(CellIndex::new(x as usize, y as usize))
        }
    }
}

impl fmt::Debug for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Ord for CellIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for CellIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<[usize; 2]> for CellIndex {
    fn from([x, y]: [usize; 2]) -> Self {
        CellIndex { x, y }
    }
}

impl From<CellIndex> for [usize; 2] {
    fn from(c: CellIndex) -> Self {
        [c.x, c.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Cardinal,
    Diagonal,
}

impl MoveKind {
    pub fn is_diagonal(self) -> bool {
        matches!(self, MoveKind::Diagonal)
    }
}

/// How a robot can get from one cell to an adjacent one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraversalClass {
    /// Drive across without climbing.
    Direct,
    /// Climb up or down a step, paying the overcoming time.
    Overcome,
    /// Not traversable for this profile.
    Blocked,
}

/// One traversable neighbor of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub cell: CellIndex,
    pub kind: MoveKind,
    pub class: TraversalClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDocument", into = "MapDocument")]
pub struct HeightGrid {
    width: usize,
    height: usize,
    cell_size: f64,
    heights: Vec<f64>,
}

impl HeightGrid {
    pub fn new(width: usize, height: usize, cell_size: f64, heights: Vec<f64>) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid("height", "must be at least 1"));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::invalid(
                "cell_size_m",
                format!("must be finite and positive, got {cell_size}"),
            ));
        }
        if heights.len() != width * height {
            return Err(Error::invalid(
                "heights",
                format!(
                    "expected {} values for a {width}x{height} grid, got {}",
                    width * height,
                    heights.len()
                ),
            ));
        }
        if let Some(i) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::invalid(format!("heights[{i}]"), "must be finite"));
        }
        Ok(HeightGrid {
            width,
            height,
            cell_size,
            heights,
        })
    }

    /// A grid where every cell sits at height zero.
    pub fn flat(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        Self::new(width, height, cell_size, vec![0.0; width * height])
    }

    /// Builds a grid by evaluating `f(x, y)` for every cell.
    pub fn from_fn(
        width: usize,
        height: usize,
        cell_size: f64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut heights = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                heights.push(f(x, y));
            }
        }
        Self::new(width, height, cell_size, heights)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn check(&self, c: CellIndex) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: c.x,
                y: c.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    #[inline]
    pub fn index_of(&self, c: CellIndex) -> usize {
        c.y * self.width + c.x
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> CellIndex {
        CellIndex::new(index % self.width, index / self.width)
    }

    /// Elevation of an in-bounds cell. Panics when `c` is out of bounds.
    #[inline]
    pub fn elevation(&self, c: CellIndex) -> f64 {
        self.heights[self.index_of(c)]
    }

    /// Adjacent in-bounds cell at offset `(dx, dy)`.
    #[inline]
    pub fn step(&self, c: CellIndex, dx: i32, dy: i32) -> Option<CellIndex> {
        c.offset(dx, dy).filter(|n| self.contains(*n))
    }

    /// World coordinates (m) of a cell center. World x grows with the column
    /// and world y with the row.
    pub fn cell_center(&self, c: CellIndex) -> (f64, f64) {
        ((c.x as f64 + 0.5) * self.cell_size, (c.y as f64 + 0.5) * self.cell_size)
    }

    /// Cell containing the world point, if any.
    pub fn cell_at_point(&self, x: f64, y: f64) -> Option<CellIndex> {
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return None;
        }
        let c = CellIndex::new((x / self.cell_size) as usize, (y / self.cell_size) as usize);
        self.contains(c).then_some(c)
    }

    /// Traversable neighbors of `at`, in [`NEIGHBOR_OFFSETS`] order.
    ///
    /// The caller must pass an in-bounds cell.
    pub(crate) fn successors<'a>(
        &'a self,
        at: CellIndex,
        profile: &'a RobotProfile,
    ) -> impl Iterator<Item = Neighbor> + 'a {
        let from_h = self.elevation(at);
        NEIGHBOR_OFFSETS.iter().enumerate().filter_map(move |(i, &(dx, dy))| {
            let cell = self.step(at, dx, dy)?;
            let kind = if i < 4 { MoveKind::Cardinal } else { MoveKind::Diagonal };
            let class = profile.classify_height_step(self.elevation(cell) - from_h, kind);
            (class != TraversalClass::Blocked).then_some(Neighbor { cell, kind, class })
        })
    }
}

/// Classifies the move `from -> to`.
///
/// The absolute height difference is compared against the profile thresholds:
/// below `max_direct_height` the move is direct, above `max_overcome_height` it
/// is blocked, and in between the robot has to climb. Climbing is only
/// possible face-on, so a diagonal move that would need it is blocked.
pub fn classify_transition(
    grid: &HeightGrid,
    from: CellIndex,
    to: CellIndex,
    profile: &RobotProfile,
) -> Result<TraversalClass> {
    grid.check(from)?;
    grid.check(to)?;
    let kind = from.move_kind_to(to).ok_or(Error::NotAdjacent { from, to })?;
    Ok(profile.classify_height_step(grid.elevation(to) - grid.elevation(from), kind))
}

/// All traversable neighbors of `at` with their move kind and class.
pub fn neighbors(grid: &HeightGrid, at: CellIndex, profile: &RobotProfile) -> Result<Vec<Neighbor>> {
    grid.check(at)?;
    Ok(grid.successors(at, profile).collect())
}

/// On-disk map document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDocument {
    width: usize,
    height: usize,
    cell_size_m: f64,
    heights: Vec<f64>,
}

impl TryFrom<MapDocument> for HeightGrid {
    type Error = Error;

    fn try_from(doc: MapDocument) -> Result<Self> {
        HeightGrid::new(doc.width, doc.height, doc.cell_size_m, doc.heights)
    }
}

impl From<HeightGrid> for MapDocument {
    fn from(g: HeightGrid) -> Self {
        MapDocument {
            width: g.width,
            height: g.height,
            cell_size_m: g.cell_size,
            heights: g.heights,
        }
    }
}

pub fn load_map(bytes: &[u8]) -> Result<HeightGrid> {
    let doc: MapDocument = serde_json::from_slice(bytes)?;
    HeightGrid::try_from(doc)
}

/// Serializes the grid as JSON with one map row per line.
pub fn save_map(grid: &HeightGrid) -> Vec<u8> {
    let num = |v: f64| serde_json::to_string(&v).expect("finite heights serialize");
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"width\": {},\n", grid.width));
    out.push_str(&format!("  \"height\": {},\n", grid.height));
    out.push_str(&format!("  \"cell_size_m\": {},\n", num(grid.cell_size)));
    out.push_str("  \"heights\": [\n");
    for (row, chunk) in grid.heights.chunks(grid.width).enumerate() {
        let line: Vec<String> = chunk.iter().map(|&h| num(h)).collect();
        out.push_str("    ");
        out.push_str(&line.join(", "));
        if row + 1 < grid.height {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out.into_bytes()
}

pub fn read_map_file(path: &std::path::Path) -> Result<HeightGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_map(&bytes)
}

pub fn write_map_file(path: &std::path::Path, grid: &HeightGrid) -> Result<()> {
    std::fs::write(path, save_map(grid)).map_err(|e| Error::io(path, e))
}
