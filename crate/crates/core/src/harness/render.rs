//! SVG rendering of maps, search footprints, paths and trajectories.
//!
//! One `<rect>` per cell, shaded from light (lowest) to dark (highest),
//! then optional layers in this order: searched cells, obstacle discs, the
//! planned path as a polyline through cell centers, and the driven
//! trajectory. Each cell is `CELL_PX` pixels wide. Numbers are printed with
//! fixed precision so equal inputs give equal bytes.

use std::fmt::Write;

use crate::dwa::Obstacle;
use crate::gridmap::{CellIndex, HeightGrid};
use crate::mmp::ExecutionLog;
use crate::planner::PlanResult;

pub const CELL_PX: f64 = 10.0;

pub const SEARCHED_FILL: &str = "#2ca02c";
pub const PATH_STROKE: &str = "#d62728";
pub const TRAJECTORY_STROKE: &str = "#1f77b4";
pub const OBSTACLE_FILL: &str = "#ff7f0e";

#[derive(Debug, Clone, Copy, Default)]
pub struct Layers<'a> {
    pub plan: Option<&'a PlanResult>,
    pub log: Option<&'a ExecutionLog>,
    pub searched: Option<&'a [CellIndex]>,
    pub obstacles: &'a [Obstacle],
}

fn shade(h: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { (h - lo) / (hi - lo) } else { 0.0 };
    let g = (235.0 - 170.0 * t).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

pub fn render_svg(grid: &HeightGrid, layers: &Layers) -> Vec<u8> {
    let (w, h) = (grid.width(), grid.height());
    let px = CELL_PX / grid.cell_size();
    let mut s = String::new();
    let (wp, hp) = (w as f64 * CELL_PX, h as f64 * CELL_PX);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{wp:.0}" height="{hp:.0}" viewBox="0 0 {wp:.0} {hp:.0}">"#
    );
    let lo = grid.heights().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.heights().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    s.push_str("<g id=\"heights\">\n");
    for y in 0..h {
        for x in 0..w {
            let fill = shade(grid.elevation(CellIndex::new(x, y)), lo, hi);
            let (cx, cy) = (x as f64 * CELL_PX, y as f64 * CELL_PX);
            let _ = writeln!(
                s,
                r#"<rect x="{cx:.0}" y="{cy:.0}" width="{CELL_PX:.0}" height="{CELL_PX:.0}" fill="{fill}"/>"#
            );
        }
    }
    s.push_str("</g>\n");
    if let Some(cells) = layers.searched.filter(|c| !c.is_empty()) {
        let _ = writeln!(s, r#"<g id="searched" fill="{SEARCHED_FILL}" fill-opacity="0.35">"#);
        for c in cells {
            let (cx, cy) = (c.x as f64 * CELL_PX, c.y as f64 * CELL_PX);
            let _ = writeln!(
                s,
                r#"<rect x="{cx:.0}" y="{cy:.0}" width="{CELL_PX:.0}" height="{CELL_PX:.0}"/>"#
            );
        }
        s.push_str("</g>\n");
    }
    if !layers.obstacles.is_empty() {
        let _ = writeln!(s, r#"<g id="obstacles" fill="{OBSTACLE_FILL}" fill-opacity="0.7">"#);
        for o in layers.obstacles {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#,
                o.x * px,
                o.y * px,
                o.radius * px
            );
        }
        s.push_str("</g>\n");
    }
    if let Some(p) = layers.plan.filter(|p| !p.path.is_empty()) {
        let pts: Vec<String> = p
            .path
            .iter()
            .map(|c| {
                let (x, y) = grid.cell_center(*c);
                format!("{:.3},{:.3}", x * px, y * px)
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="path" points="{}" fill="none" stroke="{PATH_STROKE}" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }
    if let Some(log) = layers.log.filter(|l| !l.trajectory.is_empty()) {
        let pts: Vec<String> = log
            .trajectory
            .iter()
            .map(|t| format!("{:.3},{:.3}", t.state.x * px, t.state.y * px))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="trajectory" points="{}" fill="none" stroke="{TRAJECTORY_STROKE}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s.into_bytes()
}
