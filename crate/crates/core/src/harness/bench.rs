//! Benchmark runner and metrics table.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{plan, PlanOutcome, Strategy};

use super::{list_suite, SuiteEntry};

/// One (scenario, strategy) run. Timing is the median over repeats; every
/// other column is identical across repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario_id: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub nodes_expanded: Option<usize>,
    pub path_steps: Option<usize>,
    pub total_time_s: Option<f64>,
    pub wall_clock_s: Option<f64>,
    /// `found`, `no_path`, `error: ...` or `panic: ...`.
    pub outcome: String,
    /// Abfs wall clock divided by this run's wall clock.
    pub speedup_vs_abfs: Option<f64>,
    /// This run's expansions divided by Abfs expansions.
    pub expansion_ratio: Option<f64>,
}

impl MetricsRow {
    pub fn found(&self) -> bool {
        self.outcome == "found"
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown".into())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn run_one(entry: &SuiteEntry, strategy: Strategy, repeats: usize) -> MetricsRow {
    let mut row = MetricsRow {
        scenario_id: entry.id.clone(),
        strategy,
        seed: 0,
        nodes_expanded: None,
        path_steps: None,
        total_time_s: None,
        wall_clock_s: None,
        outcome: String::new(),
        speedup_vs_abfs: None,
        expansion_ratio: None,
    };
    let result = catch_unwind(AssertUnwindSafe(|| -> Result<(u64, PlanOutcome, f64)> {
        let loaded = entry.load()?;
        let s = &loaded.scenario;
        let mut times = Vec::with_capacity(repeats);
        let mut last = None;
        for _ in 0..repeats.max(1) {
            let out = plan(&loaded.grid, s.start, s.goal, &s.profile, strategy, s.metric)?;
            times.push(out.stats().wall_clock.as_secs_f64());
            last = Some(out);
        }
        Ok((s.seed, last.expect("at least one repeat"), median(times)))
    }));
    match result {
        Ok(Ok((seed, out, wall))) => {
            row.seed = seed;
            row.nodes_expanded = Some(out.stats().nodes_expanded);
            row.wall_clock_s = Some(wall);
            match out {
                PlanOutcome::Found(p) => {
                    row.path_steps = Some(p.path_steps());
                    row.total_time_s = Some(p.total_time_s);
                    row.outcome = "found".into();
                }
                PlanOutcome::NoPath(_) => row.outcome = "no_path".into(),
            }
        }
        Ok(Err(e)) => row.outcome = format!("error: {e}"),
        Err(p) => row.outcome = format!("panic: {}", panic_message(p)),
    }
    row
}

/// Runs every strategy on every scenario of the suite in `dir`. Failures
/// are recorded per row and never stop the run. Rows are sorted by scenario
/// id, then by strategy.
pub fn run_bench(dir: &Path, strategies: &[Strategy], repeats: usize) -> Result<Vec<MetricsRow>> {
    let suite = list_suite(dir)?;
    let mut rows = Vec::new();
    for entry in &suite {
        for &st in strategies {
            rows.push(run_one(entry, st, repeats));
        }
    }
    rows.sort_by(|a, b| {
        a.scenario_id
            .cmp(&b.scenario_id)
            .then_with(|| a.strategy.cmp(&b.strategy))
    });
    add_relative_metrics(&mut rows);
    Ok(rows)
}

fn add_relative_metrics(rows: &mut [MetricsRow]) {
    let baselines: Vec<(String, Option<f64>, Option<usize>)> = rows
        .iter()
        .filter(|r| r.strategy == Strategy::Abfs)
        .map(|r| (r.scenario_id.clone(), r.wall_clock_s, r.nodes_expanded))
        .collect();
    for r in rows.iter_mut() {
        let Some((_, wall, nodes)) = baselines.iter().find(|b| b.0 == r.scenario_id) else {
            continue;
        };
        r.speedup_vs_abfs = match (wall, r.wall_clock_s) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        r.expansion_ratio = match (nodes, r.nodes_expanded) {
            (Some(a), Some(b)) if *a > 0 => Some(b as f64 / *a as f64),
            _ => None,
        };
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Contract(e.to_string()))
}

pub fn write_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let bytes = metrics_csv(rows)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_csv(bytes: &[u8]) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let rows = r.deserialize().collect::<std::result::Result<Vec<MetricsRow>, _>>()?;
    Ok(rows)
}

pub const CSV_COLUMNS: [&str; 10] = [
    "scenario_id",
    "strategy",
    "seed",
    "nodes_expanded",
    "path_steps",
    "total_time_s",
    "wall_clock_s",
    "outcome",
    "speedup_vs_abfs",
    "expansion_ratio",
];
