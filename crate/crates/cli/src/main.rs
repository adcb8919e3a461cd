//! `stepnav` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 no path, 3 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use stepnav::costmodel::{Metric, RobotProfile};
use stepnav::dwa::{DwaParams, Obstacle};
use stepnav::gridmap::{read_map_file, HeightGrid};
use stepnav::harness::bench::{run_bench, write_csv};
use stepnav::harness::list_suite;
use stepnav::harness::render::{render_svg, Layers};
use stepnav::harness::verify::{run_verify, VerifyReport};
use stepnav::mmp::{load_scenario, track, Controller, Outcome, Scenario, TrackingParams};
use stepnav::planner::{plan, PlanOutcome, PlanResult, Strategy};

#[derive(Parser)]
#[command(name = "stepnav", version, about = "Height-aware grid planning and tracking")]
struct Cli {
    /// Print the default profile, local planner and tracking parameters.
    #[arg(long)]
    show_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a path on a height map.
    Plan(PlanArgs),
    /// Plan, then track the plan in closed loop.
    Simulate(SimulateArgs),
    /// Run every strategy on every scenario of a suite.
    Bench(BenchArgs),
    /// Compare planner costs against the uniform-cost oracle.
    Oracle(OracleArgs),
    /// Draw a map with optional plan and trajectory.
    Render(RenderArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Map file; defaults to the map named by the scenario.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scenario: PathBuf,
    /// astar, greedy or multimodal; defaults to the scenario's strategy.
    #[arg(long)]
    strategy: Option<String>,
    /// octile or manhattan; defaults to the scenario's metric.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    render: Option<PathBuf>,
    /// Also check the plan against the oracle; exit 3 on a mismatch.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Track with a plain path follower instead of the local planner.
    #[arg(long)]
    no_dwa: bool,
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    csv: PathBuf,
    /// Timed repeats per run; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Also fail when the switching search costs more than the oracle.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
    /// Scenario whose unknown obstacles are drawn at their start positions.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Input(String),
    NoPath,
    Verify(String),
}

impl From<stepnav::Error> for Failure {
    fn from(e: stepnav::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<(), Failure>;

fn write(path: &Path, bytes: &[u8]) -> Run {
    std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(map: Option<&Path>, scenario: &Path) -> Result<(HeightGrid, Scenario), Failure> {
    let loaded = load_scenario(scenario)?;
    match map {
        Some(m) => {
            let grid = read_map_file(m)?;
            loaded.scenario.validate(&grid)?;
            Ok((grid, loaded.scenario))
        }
        None => Ok((loaded.grid, loaded.scenario)),
    }
}

fn start_obstacles(s: &Scenario) -> Vec<Obstacle> {
    s.unknown_obstacles.iter().map(|o| o.at(0.0)).collect()
}

fn print_report(r: &VerifyReport) {
    println!("{}", serde_json::to_string_pretty(r).expect("report serializes"));
}

fn cmd_plan(a: PlanArgs) -> Run {
    let (grid, mut s) = load(a.map.as_deref(), &a.scenario)?;
    if let Some(st) = &a.strategy {
        s.strategy = st.parse::<Strategy>()?;
    }
    if let Some(m) = &a.metric {
        s.metric = m.parse::<Metric>()?;
    }
    let out = plan(&grid, s.start, s.goal, &s.profile, s.strategy, s.metric)?;
    let result = match out {
        PlanOutcome::Found(p) => p,
        PlanOutcome::NoPath(stats) => {
            eprintln!("no path ({} nodes expanded)", stats.nodes_expanded);
            return Err(Failure::NoPath);
        }
    };
    write(&a.out, &result.to_json())?;
    if let Some(svg) = &a.render {
        let obstacles = start_obstacles(&s);
        let layers = Layers {
            plan: Some(&result),
            searched: Some(&result.searched),
            obstacles: &obstacles,
            ..Layers::default()
        };
        write(svg, &render_svg(&grid, &layers))?;
    }
    println!(
        "{}: {} steps, {:.6} s, {} nodes expanded",
        s.strategy,
        result.path_steps(),
        result.total_time_s,
        result.stats.nodes_expanded
    );
    if a.verify {
        let report = run_verify(&grid, &s)?;
        print_report(&report);
        if !report.passed(false) {
            return Err(Failure::Verify("planner disagrees with the oracle".into()));
        }
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Run {
    let (grid, s) = load(None, &a.scenario)?;
    let controller = if a.no_dwa { Controller::Follow } else { Controller::Dwa };
    let log = track(&grid, &s, controller)?;
    write(&a.out, &log.to_json())?;
    if let Some(svg) = &a.render {
        let obstacles = start_obstacles(&s);
        let layers = Layers {
            log: Some(&log),
            obstacles: &obstacles,
            ..Layers::default()
        };
        write(svg, &render_svg(&grid, &layers))?;
    }
    let clearance = log.min_clearance_m.map_or("n/a".to_string(), |c| format!("{c:.3} m"));
    println!(
        "{:?} after {:.1} s, min clearance {clearance}",
        log.outcome, log.elapsed_sim_time_s
    );
    if log.outcome == Outcome::NoPath {
        return Err(Failure::NoPath);
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Run {
    let rows = run_bench(&a.suite, &Strategy::ALL, a.repeats)?;
    write_csv(&rows, &a.csv)?;
    for r in &rows {
        println!(
            "{:<20} {:<10} {:<8} expanded {:>6}  steps {:>4}  wall {:>9.1} us",
            r.scenario_id,
            r.strategy.name(),
            r.outcome,
            r.nodes_expanded.map_or("-".into(), |n| n.to_string()),
            r.path_steps.map_or("-".into(), |n| n.to_string()),
            r.wall_clock_s.map_or(f64::NAN, |w| w * 1e6),
        );
    }
    let mut failed = Vec::new();
    for entry in list_suite(&a.suite)? {
        let Ok(loaded) = entry.load() else {
            failed.push(entry.id.clone());
            continue;
        };
        let report = run_verify(&loaded.grid, &loaded.scenario)?;
        if !report.passed(a.strict) {
            eprintln!("verification failed for {}", entry.id);
            print_report(&report);
            failed.push(entry.id.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("failed: {}", failed.join(", "))))
    }
}

fn cmd_oracle(a: OracleArgs) -> Run {
    let (grid, s) = load(a.map.as_deref(), &a.scenario)?;
    let report = run_verify(&grid, &s)?;
    print_report(&report);
    if report.oracle_time_s.is_none() {
        return Err(Failure::NoPath);
    }
    if !report.passed(a.strict) {
        return Err(Failure::Verify("planner disagrees with the oracle".into()));
    }
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Run {
    let grid = read_map_file(&a.map)?;
    let plan = a
        .plan
        .as_deref()
        .map(|p| read(p).and_then(|b| Ok(PlanResult::from_json(&b)?)))
        .transpose()?;
    let log = a
        .log
        .as_deref()
        .map(|p| read(p).and_then(|b| Ok(stepnav::mmp::ExecutionLog::from_json(&b)?)))
        .transpose()?;
    let obstacles = match &a.scenario {
        Some(p) => start_obstacles(&Scenario::from_json(&read(p)?)?),
        None => Vec::new(),
    };
    if let Some(p) = &plan {
        if let Some(c) = p.path.iter().chain(&p.searched).find(|c| !grid.contains(**c)) {
            return Err(Failure::Input(format!("plan cell {c:?} is outside the map")));
        }
    }
    let layers = Layers {
        plan: plan.as_ref(),
        log: log.as_ref(),
        searched: plan.as_ref().map(|p| p.searched.as_slice()),
        obstacles: &obstacles,
    };
    write(&a.out, &render_svg(&grid, &layers))
}

fn show_config() {
    let config = json!({
        "profile": RobotProfile::default(),
        "dwa": DwaParams::default(),
        "tracking": TrackingParams::default(),
        "strategy": Strategy::default(),
        "metric": Metric::default(),
    });
    println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.show_config {
        show_config();
        if cli.command.is_none() {
            return ExitCode::SUCCESS;
        }
    }
    let result = match cli.command {
        Some(Command::Plan(a)) => cmd_plan(a),
        Some(Command::Simulate(a)) => cmd_simulate(a),
        Some(Command::Bench(a)) => cmd_bench(a),
        Some(Command::Oracle(a)) => cmd_oracle(a),
        Some(Command::Render(a)) => cmd_render(a),
        None => Err(Failure::Input("no subcommand given; see --help".into())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NoPath) => ExitCode::from(2),
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
