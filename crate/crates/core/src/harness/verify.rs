//! Cross-checks planner costs against the uniform-cost oracle.

use serde::Serialize;

use crate::error::Result;
use crate::gridmap::HeightGrid;
use crate::mmp::Scenario;
use crate::planner::{oracle_plan, plan, PlanOutcome, PlanResult, Strategy};

pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub abfs_time_s: Option<f64>,
    pub multimodal_time_s: Option<f64>,
    pub oracle_time_s: Option<f64>,
    /// Abfs cost minus oracle cost.
    pub abfs_delta_s: Option<f64>,
    /// Multimodal cost minus oracle cost.
    pub multimodal_delta_s: Option<f64>,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// Abfs agrees with the oracle on cost and reachability.
    pub fn abfs_ok(&self) -> bool {
        agrees(self.abfs_time_s, self.oracle_time_s)
    }

    pub fn multimodal_ok(&self) -> bool {
        agrees(self.multimodal_time_s, self.oracle_time_s)
    }

    pub fn invariants_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Overall verdict. A Multimodal excess only fails the run when `strict`.
    pub fn passed(&self, strict: bool) -> bool {
        self.abfs_ok() && self.invariants_ok() && (!strict || self.multimodal_ok())
    }
}

fn agrees(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= COST_TOLERANCE,
        (None, None) => true,
        _ => false,
    }
}

fn path_checks(name: &str, grid: &HeightGrid, s: &Scenario, p: &PlanResult, out: &mut Vec<Check>) {
    let ends = p.path.first() == Some(&s.start) && p.path.last() == Some(&s.goal);
    out.push(Check {
        name: format!("{name}: path joins start and goal"),
        passed: ends,
    });
    let legal = p.path.windows(2).all(|w| {
        crate::gridmap::classify_transition(grid, w[0], w[1], &s.profile)
            .is_ok_and(|c| c != crate::gridmap::TraversalClass::Blocked)
    });
    out.push(Check {
        name: format!("{name}: no blocked transitions"),
        passed: legal,
    });
    let recomputed = crate::planner::path_time(grid, &s.profile, &p.path);
    out.push(Check {
        name: format!("{name}: reported cost matches the path"),
        passed: recomputed.is_ok_and(|t| (t - p.total_time_s).abs() <= COST_TOLERANCE),
    });
}

/// Plans with Abfs and Multimodal, runs the oracle, and compares.
pub fn run_verify(grid: &HeightGrid, s: &Scenario) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut cost = |st: Strategy| -> Result<Option<f64>> {
        let out = plan(grid, s.start, s.goal, &s.profile, st, s.metric)?;
        Ok(match out {
            PlanOutcome::Found(p) => {
                path_checks(st.name(), grid, s, &p, &mut checks);
                Some(p.total_time_s)
            }
            PlanOutcome::NoPath(_) => None,
        })
    };
    let abfs = cost(Strategy::Abfs)?;
    let multimodal = cost(Strategy::Multimodal)?;
    let oracle = oracle_plan(grid, s.start, s.goal, &s.profile)?
        .found()
        .map(|p| p.total_time_s);
    let delta = |x: Option<f64>| x.zip(oracle).map(|(a, b)| a - b);
    Ok(VerifyReport {
        abfs_time_s: abfs,
        multimodal_time_s: multimodal,
        oracle_time_s: oracle,
        abfs_delta_s: delta(abfs),
        multimodal_delta_s: delta(multimodal),
        checks,
    })
}
