//! `toaa`: plan, benchmark, generate and validate time-optimal any-angle
//! paths among moving disk obstacles.
//!
//! Exit codes: 0 solved/ok, 1 no_path or validation violation, 2 usage or
//! parse error, 3 internal consistency error.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toaa_sipp::harness::{
    self, run_benchmark, run_instance, validate_plan, BenchConfig, HarnessError,
};
use toaa_sipp::heuristics::HeuristicKind;
use toaa_sipp::planners::{Algorithm, Outcome};
use toaa_sipp::world::{
    parse_map, parse_plan, parse_scenario, serialize_plan, serialize_scenario, GridMap,
    ProblemInstance, Scenario,
};

#[derive(Parser)]
#[command(name = "toaa", version, about = "Time-optimal any-angle SIPP planners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a single query from a map and scenario file.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// sipp | aasipp | nto | ito
        #[arg(long)]
        algo: String,
        /// euclid | perfect
        #[arg(long, default_value = "euclid")]
        heuristic: String,
        /// Override the scenario's agent radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Override the scenario's agent speed.
        #[arg(long)]
        speed: Option<f64>,
        /// Write the solution plan as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render the instance and solution as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a benchmark batch from a config file and emit CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        /// Worker threads (default: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Generate a scenario by prioritized planning.
    Gen {
        #[arg(long)]
        map: PathBuf,
        /// Number of dynamic obstacles.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Disk radius for agent and obstacles.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
    /// Validate a plan file against a map and scenario.
    Validate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
}

/// What the process should report.
enum Status {
    Ok,
    NoPathOrViolation,
    Internal,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(
    map_path: &Path,
    scenario_path: &Path,
    radius: Option<f64>,
    speed: Option<f64>,
) -> Result<ProblemInstance> {
    let map: GridMap = parse_map(&read(map_path)?)?;
    let mut scenario: Scenario = parse_scenario(&read(scenario_path)?, &map)?;
    if let Some(r) = radius {
        scenario.agent_radius = r;
    }
    if let Some(s) = speed {
        scenario.speed = s;
    }
    scenario
        .into_instance(map)
        .context("assembling problem instance")
}

fn parse_heuristic(s: &str) -> Result<HeuristicKind> {
    match s {
        "euclid" => Ok(HeuristicKind::Euclid),
        "perfect" => Ok(HeuristicKind::Perfect),
        other => anyhow::bail!("unknown heuristic `{other}` (expected euclid|perfect)"),
    }
}

fn cmd_plan(
    map: &Path,
    scenario: &Path,
    algo: &str,
    heuristic: &str,
    radius: Option<f64>,
    speed: Option<f64>,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<Status> {
    let algorithm: Algorithm = algo.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let hkind = parse_heuristic(heuristic)?;
    let instance = load_instance(map, scenario, radius, speed)?;
    let map_label = map.display().to_string();
    let scen_label = scenario.display().to_string();
    match run_instance(&instance, algorithm, hkind, &map_label, &scen_label) {
        Ok((result, record)) => {
            match result.outcome {
                Outcome::Solved => {
                    println!(
                        "solved cost={:.9} iterations={} vt_calls={} runtime_ms={:.3}",
                        result.cost, record.iterations, record.vt_calls, record.runtime_ms
                    );
                    let plan = result.plan.as_ref().expect("solved result has a plan");
                    if let Some(path) = out {
                        std::fs::write(path, serialize_plan(plan))
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    if let Some(path) = svg {
                        let plans = vec![(algorithm.to_string(), plan)];
                        std::fs::write(path, harness::render_svg(&instance, &plans))
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    Ok(Status::Ok)
                }
                Outcome::NoPath => {
                    println!(
                        "no_path iterations={} vt_calls={} runtime_ms={:.3}",
                        record.iterations, record.vt_calls, record.runtime_ms
                    );
                    if let Some(path) = svg {
                        std::fs::write(path, harness::render_svg(&instance, &[]))
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    Ok(Status::NoPathOrViolation)
                }
            }
        }
        Err(HarnessError::Internal(msg)) => {
            eprintln!("internal consistency error: {msg}");
            Ok(Status::Internal)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(config_path: &Path, csv_path: &Path, jobs: usize) -> Result<Status> {
    let config = BenchConfig::parse(&read(config_path)?)?;
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    let output = run_benchmark(&config, base, jobs)?;
    std::fs::write(csv_path, harness::write_csv(&output.records))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    print!("{}", output.summary);
    Ok(Status::Ok)
}

fn cmd_gen(
    map_path: &Path,
    count: usize,
    seed: u64,
    out: &Path,
    radius: f64,
    speed: f64,
) -> Result<Status> {
    let map = parse_map(&read(map_path)?)?;
    let scenario = harness::generate_full_scenario(&map, count, seed, radius, speed)?;
    std::fs::write(out, serialize_scenario(&scenario))
        .with_context(|| format!("writing {}", out.display()))?;
    println!(
        "generated {} obstacles, agent {} -> {}",
        scenario.obstacles.len(),
        scenario.start,
        scenario.goal
    );
    Ok(Status::Ok)
}

fn cmd_validate(map_path: &Path, scenario_path: &Path, plan_path: &Path) -> Result<Status> {
    let instance = load_instance(map_path, scenario_path, None, None)?;
    let plan = parse_plan(&read(plan_path)?)?;
    let report = validate_plan(&plan, &instance);
    if report.is_ok() {
        println!("ok cost={:.9}", plan.cost());
        Ok(Status::Ok)
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        Ok(Status::NoPathOrViolation)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan {
            map,
            scenario,
            algo,
            heuristic,
            radius,
            speed,
            out,
            svg,
        } => cmd_plan(
            map,
            scenario,
            algo,
            heuristic,
            *radius,
            *speed,
            out.as_deref(),
            svg.as_deref(),
        ),
        Command::Bench { config, csv, jobs } => cmd_bench(config, csv, *jobs),
        Command::Gen {
            map,
            count,
            seed,
            out,
            radius,
            speed,
        } => cmd_gen(map, *count, *seed, out, *radius, *speed),
        Command::Validate {
            map,
            scenario,
            plan,
        } => cmd_validate(map, scenario, plan),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NoPathOrViolation) => ExitCode::from(1),
        Ok(Status::Internal) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
