//! Curated fixture suite.
//!
//! Every fixture is a hand-built height map plus a scenario. The maps use
//! two obstacle heights: [`STEP`] cells can be climbed (4 s up, 3 s down
//! with [`fixture_profile`]) and [`WALL`] cells cannot.

use std::path::Path;

use crate::costmodel::RobotProfile;
use crate::error::{Error, Result};
use crate::gridmap::{save_map, CellIndex, HeightGrid};
use crate::mmp::{DynamicObstacle, Scenario};

/// Height of a surmountable block (m).
pub const STEP: f64 = 1.0;
/// Height of an insurmountable block (m).
pub const WALL: f64 = 2.0;

pub const MAP_FILE: &str = "map.json";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const README_FILE: &str = "README.md";

/// Clearance weight of the fixture scenarios. With the general default the
/// clearance term holds the robot still whenever an obstacle is within the
/// clearance cap.
pub const FIXTURE_LAMBDA: f64 = 0.1;

/// Default robot that can climb steps up to 1.5 m.
pub fn fixture_profile() -> RobotProfile {
    RobotProfile {
        max_overcome_height: 1.5,
        ..RobotProfile::default()
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: &'static str,
    pub title: &'static str,
    /// What the fixture is expected to show, in plain words.
    pub expect: &'static str,
    pub grid: HeightGrid,
    pub scenario: Scenario,
}

impl Fixture {
    pub fn readme(&self) -> String {
        let s = &self.scenario;
        format!(
            "# {}\n\n{}\n\n- map: {}x{} cells of {} m\n- start: ({}, {})\n- goal: ({}, {})\n- unknown obstacles: {}\n\n\
             Heights are in meters. The robot drives over height changes below {} m, climbs \
             steps of up to {} m ({} s per meter up, {} s per meter down, straight moves only) \
             and treats anything taller as a wall.\n\
             The geometry is hand-built to produce the behaviour above; \
             regenerate the files with `cargo run -p stepnav --example write_fixtures`.\n",
            self.title,
            self.expect,
            self.grid.width(),
            self.grid.height(),
            self.grid.cell_size(),
            s.start.x,
            s.start.y,
            s.goal.x,
            s.goal.y,
            s.unknown_obstacles.len(),
            s.profile.max_direct_height,
            s.profile.max_overcome_height,
            s.profile.t_up,
            s.profile.t_down,
        )
    }

    /// Writes `map.json`, `scenario.json` and `README.md` under `dir/<id>/`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let d = dir.join(self.id);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        for (name, bytes) in self.files() {
            let p = d.join(name);
            std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    /// File names and contents of the fixture directory.
    pub fn files(&self) -> [(&'static str, Vec<u8>); 3] {
        [
            (MAP_FILE, save_map(&self.grid)),
            (SCENARIO_FILE, self.scenario.to_json()),
            (README_FILE, self.readme().into_bytes()),
        ]
    }
}

struct Canvas {
    w: usize,
    h: usize,
    cs: f64,
    heights: Vec<f64>,
}

impl Canvas {
    fn new(w: usize, h: usize, cs: f64) -> Self {
        Canvas {
            w,
            h,
            cs,
            heights: vec![0.0; w * h],
        }
    }

    /// Fills the inclusive rectangle `[x0, x1] x [y0, y1]`.
    fn rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, z: f64) -> &mut Self {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.heights[y * self.w + x] = z;
            }
        }
        self
    }

    /// Border of the inclusive rectangle.
    fn ring(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, z: f64) -> &mut Self {
        self.rect(x0, y0, x1, y0, z)
            .rect(x0, y1, x1, y1, z)
            .rect(x0, y0, x0, y1, z)
            .rect(x1, y0, x1, y1, z)
    }

    /// Ramp rising linearly along x from `z0` at `x0` to `z1` at `x1`.
    fn ramp_x(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, z0: f64, z1: f64) -> &mut Self {
        for y in y0..=y1 {
            for x in x0..=x1 {
                let f = (x - x0) as f64 / (x1 - x0) as f64;
                self.heights[y * self.w + x] = z0 + (z1 - z0) * f;
            }
        }
        self
    }

    fn build(&self) -> HeightGrid {
        HeightGrid::new(self.w, self.h, self.cs, self.heights.clone()).expect("fixture maps are valid")
    }
}

fn scenario(start: (usize, usize), goal: (usize, usize)) -> Scenario {
    let mut s = Scenario::new(
        MAP_FILE,
        CellIndex::new(start.0, start.1),
        CellIndex::new(goal.0, goal.1),
    );
    s.profile = fixture_profile();
    s.dwa.lambda = FIXTURE_LAMBDA;
    s
}

/// Climbable wall across the map whose only gap is far away.
pub fn wall_overcome() -> Fixture {
    let grid = Canvas::new(12, 15, 1.0).rect(6, 0, 6, 13, STEP).build();
    Fixture {
        id: "wall_overcome",
        title: "Climbing beats a long detour",
        expect: "A climbable wall crosses the map with its only opening at the far end. \
                 Going around costs more than climbing up and down, so the optimal path \
                 climbs the wall face-on.",
        grid,
        scenario: scenario((1, 2), (10, 2)),
    }
}

/// Short climbable wall with a cheap way around.
pub fn wall_detour() -> Fixture {
    let grid = Canvas::new(12, 10, 1.0).rect(6, 0, 6, 5, STEP).build();
    Fixture {
        id: "wall_detour",
        title: "Driving around beats climbing",
        expect: "A short climbable wall with open ground below it. The detour is cheaper \
                 than climbing, so every planner returns the same flat path.",
        grid,
        scenario: scenario((1, 2), (10, 2)),
    }
}

/// Wall with a climbable section and a distant gap.
pub fn mixed_overcome() -> Fixture {
    let grid = Canvas::new(15, 12, 1.0)
        .rect(7, 0, 7, 10, WALL)
        .rect(7, 2, 7, 4, STEP)
        .build();
    Fixture {
        id: "mixed_overcome",
        title: "Climb through the low section of a wall",
        expect: "A wall that cannot be climbed, except for a low section in line with the \
                 goal, and a gap at the bottom edge. Climbing the low section is cheaper \
                 than the detour through the gap.",
        grid,
        scenario: scenario((2, 3), (12, 3)),
    }
}

/// Same layout with the gap close by.
pub fn mixed_detour() -> Fixture {
    let grid = Canvas::new(15, 12, 1.0)
        .rect(7, 0, 7, 6, WALL)
        .rect(7, 2, 7, 4, STEP)
        .build();
    Fixture {
        id: "mixed_detour",
        title: "Detour round a wall with a low section",
        expect: "The wall from the previous fixture ends a few cells below the goal row. \
                 Going round it is cheaper than climbing the low section.",
        grid,
        scenario: scenario((2, 3), (12, 3)),
    }
}

/// Goal inside a climbable enclosure behind a wall.
pub fn bypass_then_climb() -> Fixture {
    let grid = Canvas::new(14, 12, 1.0)
        .rect(5, 0, 5, 9, WALL)
        .ring(8, 4, 12, 8, STEP)
        .build();
    Fixture {
        id: "bypass_then_climb",
        title: "Around a wall, then over a ring",
        expect: "The goal sits inside a ring of climbable blocks behind a wall that cannot \
                 be climbed. The path goes round the wall and then climbs into the ring. \
                 A robot that cannot climb has no path.",
        grid,
        scenario: scenario((2, 3), (10, 6)),
    }
}

/// Goal on top of a low block.
pub fn goal_on_block() -> Fixture {
    let grid = Canvas::new(10, 8, 1.0).rect(7, 3, 7, 3, 0.3).build();
    Fixture {
        id: "goal_on_block",
        title: "Goal on top of a block",
        expect: "The goal cell is raised 0.3 m. The last step of every plan climbs onto it. \
                 A robot that cannot climb has no path.",
        grid,
        scenario: scenario((1, 4), (7, 3)),
    }
}

/// Cup-shaped wall opening away from the goal.
pub fn greedy_trap() -> Fixture {
    let grid = Canvas::new(12, 12, 1.0)
        .rect(1, 5, 9, 5, WALL)
        .rect(1, 5, 1, 8, WALL)
        .rect(9, 5, 9, 8, WALL)
        .build();
    Fixture {
        id: "greedy_trap",
        title: "Cup trap for greedy search",
        expect: "A cup of walls opens toward the start. Greedy search runs into the cup \
                 and has to back out, so its path is longer than the optimal one. The \
                 switching search follows the cup wall to its ends and reaches the optimal \
                 path with no more expansions than A*.",
        grid,
        scenario: scenario((2, 10), (6, 0)),
    }
}

pub fn all() -> Vec<Fixture> {
    vec![
        wall_overcome(),
        wall_detour(),
        mixed_overcome(),
        mixed_detour(),
        bypass_then_climb(),
        goal_on_block(),
        greedy_trap(),
        factory(),
    ]
}

pub fn by_id(id: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.id == id)
}

/// Writes every fixture under `dir`.
pub fn write_suite(dir: &Path) -> Result<()> {
    for f in all() {
        f.write(dir)?;
    }
    Ok(())
}

/// Factory campus: 60 m x 40 m at 0.5 m cells.
pub fn factory() -> Fixture {
    let mut c = Canvas::new(120, 80, 0.5);
    // Low ridge crossing the whole site, graded at 2 cm per cell.
    c.ramp_x(30, 1, 37, 78, 0.0, 0.14);
    c.ramp_x(38, 1, 45, 78, 0.14, 0.0);
    // Raised loading platform behind a 0.3 m curb on both sides.
    c.rect(74, 1, 81, 78, 0.3);
    // Workshop, office block and an L-shaped warehouse whose inner corner
    // faces the start.
    c.rect(8, 10, 24, 26, WALL);
    c.rect(50, 32, 64, 52, WALL);
    c.rect(86, 20, 108, 25, WALL);
    c.rect(103, 20, 108, 46, WALL);
    // Perimeter fence.
    c.rect(0, 0, 119, 0, WALL);
    c.rect(0, 79, 119, 79, WALL);
    c.rect(0, 0, 0, 79, WALL);
    c.rect(119, 0, 119, 79, WALL);
    let grid = c.build();
    let mut s = scenario((6, 70), (112, 10));
    s.unknown_obstacles = vec![DynamicObstacle::fixed(9.25, 29.25, 0.4)];
    // Lookahead beyond the 2 m reach of a full-speed rollout.
    s.tracking.lookahead_cells = 6.0;
    Fixture {
        id: "factory",
        title: "Factory campus",
        expect: "Flat roads, buildings that cannot be climbed, a low graded ridge and a \
                 loading platform behind a 0.3 m curb, both spanning the site. Every route \
                 drives over the ridge and climbs onto and off the platform. An unknown \
                 obstacle stands on the planned route; tracking without local avoidance \
                 runs into it.",
        grid,
        scenario: s,
    }
}
