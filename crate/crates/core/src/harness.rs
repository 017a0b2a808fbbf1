//! Benchmark and validation harness: independent dense-sampling plan
//! validation, scenario generation by prioritized planning, single-instance
//! runs, batch benchmarks with CSV output, and SVG rendering.

use crate::heuristics::{Heuristic, HeuristicKind};
use crate::intervals::build_safe_intervals;
use crate::planners::{plan_aa_sipp, plan_with, Algorithm, Outcome, PlannerResult, SearchOptions};
use crate::world::{
    parse_map, parse_scenario, ActionKind, GridMap, MotionPlan, ProblemInstance, Scenario, Vertex,
    WorldError,
};
use crate::geometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

/// Validator sampling step.
pub const VALIDATOR_DT: f64 = 1e-3;
/// Distance slack accepted by the validator (tangential passes are legal).
pub const VALIDATOR_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    World(#[from] WorldError),

    #[error("generation failed: {0}")]
    Generate(String),

    #[error("bad config: {0}")]
    Config(String),

    #[error("internal consistency: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Independent plan validation
// ---------------------------------------------------------------------------

/// A single validation failure. Violations are data, not faults.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Agent came strictly within the combined radius of an obstacle.
    Collision {
        time: f64,
        obstacle: usize,
        distance: f64,
        required: f64,
    },
    /// A move action has no line of sight at the agent radius.
    NoLineOfSight { action: usize },
    /// Contiguity, duration or bounds defect.
    Structural { msg: String },
    /// Plan does not run from the instance start to its goal.
    WrongEndpoints { msg: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Collision {
                time,
                obstacle,
                distance,
                required,
            } => write!(
                f,
                "collision at t={time:.4}: obstacle {obstacle} at distance {distance:.6} < {required:.6}"
            ),
            Violation::NoLineOfSight { action } => {
                write!(f, "move action {action} has no line of sight")
            }
            Violation::Structural { msg } => write!(f, "structural: {msg}"),
            Violation::WrongEndpoints { msg } => write!(f, "endpoints: {msg}"),
        }
    }
}

/// Result of validating one plan against one instance.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Dense-time simulation of a plan against every obstacle.
///
/// This validator is deliberately independent of the closed-form collision
/// machinery it audits: positions come from straight plan interpolation and
/// the collision test is a sampled distance check at `VALIDATOR_DT`.
pub fn validate_plan(plan: &MotionPlan, instance: &ProblemInstance) -> ValidationReport {
    let mut violations = Vec::new();

    if let Err(msg) = plan.validate(&instance.map) {
        violations.push(Violation::Structural { msg });
        return ValidationReport { violations };
    }
    if plan.start != instance.start {
        violations.push(Violation::WrongEndpoints {
            msg: format!("plan starts at {}, instance at {}", plan.start, instance.start),
        });
    }
    if plan.final_vertex() != instance.goal {
        violations.push(Violation::WrongEndpoints {
            msg: format!(
                "plan ends at {}, instance goal is {}",
                plan.final_vertex(),
                instance.goal
            ),
        });
    }
    for (i, a) in plan.actions.iter().enumerate() {
        if a.kind == ActionKind::Move
            && !geometry::los(a.source, a.target, plan.radius, &instance.map)
        {
            violations.push(Violation::NoLineOfSight { action: i });
        }
    }

    // Simulate until everything is parked, plus one settling unit.
    let horizon = instance
        .obstacles
        .iter()
        .map(|o| o.end_time())
        .fold(plan.end_time(), f64::max)
        + 1.0;
    let steps = (horizon / VALIDATOR_DT).ceil() as usize;
    for (k, obstacle) in instance.obstacles.iter().enumerate() {
        let required = plan.radius + obstacle.radius;
        for i in 0..=steps {
            let t = (i as f64 * VALIDATOR_DT).min(horizon);
            let d = plan.position_at(t).distance(obstacle.position_at(t));
            if d < required - VALIDATOR_SLACK {
                violations.push(Violation::Collision {
                    time: t,
                    obstacle: k,
                    distance: d,
                    required,
                });
                break;
            }
        }
    }
    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// Scenario generation (prioritized planning)
// ---------------------------------------------------------------------------

fn sample_pair(
    rng: &mut ChaCha8Rng,
    free: &[Vertex],
) -> Option<(Vertex, Vertex)> {
    for _ in 0..64 {
        let a = free[rng.gen_range(0..free.len())];
        let b = free[rng.gen_range(0..free.len())];
        if a != b && a.distance(b) >= 2.0 {
            return Some((a, b));
        }
    }
    None
}

/// Plan `count` obstacle trajectories one at a time with the greedy any-angle
/// planner, treating every previously planned trajectory as a dynamic
/// obstacle. Start/goal pairs are drawn uniformly from free cells (at least
/// two cells apart) with a bounded retry budget; the resulting set is
/// pairwise conflict-free by construction.
pub fn generate_scenario(
    map: &GridMap,
    count: usize,
    seed: u64,
    radius: f64,
    speed: f64,
) -> Result<Vec<MotionPlan>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<Vertex> = map.free_vertices().collect();
    if count == 0 {
        return Ok(Vec::new());
    }
    if free.len() < 2 {
        return Err(HarnessError::Generate(format!(
            "map has {} free cells, cannot place obstacles",
            free.len()
        )));
    }
    let mut plans: Vec<MotionPlan> = Vec::with_capacity(count);
    let budget = 10 * count;
    let mut attempts = 0;
    while plans.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(HarnessError::Generate(format!(
                "placed {} of {count} obstacles within {budget} attempts",
                plans.len()
            )));
        }
        let Some((start, goal)) = sample_pair(&mut rng, &free) else {
            continue;
        };
        let Ok(instance) = ProblemInstance::new(
            map.clone(),
            start,
            goal,
            radius,
            speed,
            plans.clone(),
        ) else {
            continue;
        };
        let table = build_safe_intervals(&instance);
        let h = Heuristic::euclid(goal, speed);
        let result = plan_aa_sipp(&instance, &table, &h);
        if result.outcome == Outcome::Solved {
            plans.push(result.plan.expect("solved result has a plan"));
        }
    }
    Ok(plans)
}

/// Generate a complete scenario file payload: obstacles by prioritized
/// planning, then an agent query guaranteed to start safely and have a
/// permanently safe goal.
pub fn generate_full_scenario(
    map: &GridMap,
    count: usize,
    seed: u64,
    radius: f64,
    speed: f64,
) -> Result<Scenario, HarnessError> {
    let obstacles = generate_scenario(map, count, seed, radius, speed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce9a210_616e74);
    let free: Vec<Vertex> = map.free_vertices().collect();
    let probe = ProblemInstance::new(
        map.clone(),
        free[0],
        free[0],
        radius,
        speed,
        obstacles.clone(),
    )
    .map_err(HarnessError::Generate)?;
    let table = build_safe_intervals(&probe);
    for _ in 0..100 {
        let Some((start, goal)) = sample_pair(&mut rng, &free) else {
            continue;
        };
        let start_ok = table
            .state_at(start, 0.0)
            .is_some_and(|s| table.interval(s).low == 0.0);
        let goal_ok = table
            .states_at(goal)
            .last()
            .is_some_and(|s| table.interval(s).is_unbounded());
        if start_ok && goal_ok {
            return Ok(Scenario {
                start,
                goal,
                agent_radius: radius,
                speed,
                obstacles,
            });
        }
    }
    Err(HarnessError::Generate(
        "could not place an agent start/goal pair".into(),
    ))
}

// ---------------------------------------------------------------------------
// Single-instance runs
// ---------------------------------------------------------------------------

/// One CSV row of a benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    pub map: String,
    pub scenario: String,
    pub obstacles: usize,
    pub algo: Algorithm,
    pub heuristic: HeuristicKind,
    pub outcome: String,
    pub cost: Option<f64>,
    pub iterations: u64,
    pub vt_calls: u64,
    pub runtime_ms: f64,
}

/// Plan one instance, validate the result, and record statistics.
///
/// A solved plan failing validation is a planner bug and comes back as
/// [`HarnessError::Internal`] with the first collision witness.
pub fn run_instance(
    instance: &ProblemInstance,
    algorithm: Algorithm,
    heuristic_kind: HeuristicKind,
    map_label: &str,
    scenario_label: &str,
) -> Result<(PlannerResult, BenchmarkRecord), HarnessError> {
    let heuristic = Heuristic::build(
        heuristic_kind,
        &instance.map,
        instance.goal,
        instance.agent_radius,
        instance.speed,
    );
    run_instance_with(
        instance,
        algorithm,
        heuristic_kind,
        &heuristic,
        map_label,
        scenario_label,
    )
}

fn run_instance_with(
    instance: &ProblemInstance,
    algorithm: Algorithm,
    heuristic_kind: HeuristicKind,
    heuristic: &Heuristic,
    map_label: &str,
    scenario_label: &str,
) -> Result<(PlannerResult, BenchmarkRecord), HarnessError> {
    let table = build_safe_intervals(instance);
    let result = plan_with(
        algorithm,
        instance,
        &table,
        heuristic,
        SearchOptions::default(),
        None,
    );
    if let Some(plan) = &result.plan {
        let report = validate_plan(plan, instance);
        if !report.is_ok() {
            return Err(HarnessError::Internal(format!(
                "{algorithm}/{heuristic_kind} produced an invalid plan: {}",
                report.violations[0]
            )));
        }
    }
    let record = BenchmarkRecord {
        map: map_label.to_string(),
        scenario: scenario_label.to_string(),
        obstacles: instance.obstacles.len(),
        algo: algorithm,
        heuristic: heuristic_kind,
        outcome: match result.outcome {
            Outcome::Solved => "solved".to_string(),
            Outcome::NoPath => "no_path".to_string(),
        },
        cost: result.plan.as_ref().map(|_| result.cost),
        iterations: result.stats.iterations,
        vt_calls: result.stats.vt_calls,
        runtime_ms: result.stats.runtime.as_secs_f64() * 1e3,
    };
    Ok((result, record))
}

// ---------------------------------------------------------------------------
// Batch benchmarks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct BenchConfigEntry {
    pub map: String,
    pub scenario: String,
}

/// Benchmark configuration file (JSON).
#[derive(Debug, Clone, Deserialize)]
pub struct BenchConfig {
    pub version: u32,
    pub instances: Vec<BenchConfigEntry>,
    /// Use the first N obstacles of each scenario; default: all of them.
    #[serde(default)]
    pub obstacle_counts: Option<Vec<usize>>,
    pub algorithms: Vec<String>,
    pub heuristics: Vec<String>,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let config: BenchConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if config.version != 1 {
            return Err(HarnessError::Config(format!(
                "unsupported config version {}",
                config.version
            )));
        }
        config.parsed_algorithms()?;
        config.parsed_heuristics()?;
        Ok(config)
    }

    pub fn parsed_algorithms(&self) -> Result<Vec<Algorithm>, HarnessError> {
        self.algorithms
            .iter()
            .map(|s| s.parse().map_err(HarnessError::Config))
            .collect()
    }

    pub fn parsed_heuristics(&self) -> Result<Vec<HeuristicKind>, HarnessError> {
        self.heuristics
            .iter()
            .map(|s| match s.as_str() {
                "euclid" => Ok(HeuristicKind::Euclid),
                "perfect" => Ok(HeuristicKind::Perfect),
                other => Err(HarnessError::Config(format!("unknown heuristic `{other}`"))),
            })
            .collect()
    }
}

/// Per-(algorithm, heuristic) aggregate of a benchmark batch.
#[derive(Debug, Clone)]
pub struct AlgoSummary {
    pub algo: Algorithm,
    pub heuristic: HeuristicKind,
    pub runs: usize,
    pub solved: usize,
    pub errors: usize,
    pub median_runtime_ms: f64,
    pub median_iterations: f64,
    pub median_vt_calls: f64,
}

/// Batch summary: per-algorithm medians plus greedy-vs-optimal cost ratios.
#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub per_algo: Vec<AlgoSummary>,
    pub ratio_samples: usize,
    pub mean_cost_ratio: Option<f64>,
    pub max_cost_ratio: Option<f64>,
}

impl fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:<8} {:>6} {:>7} {:>7} {:>14} {:>12} {:>12}",
            "algo", "h", "runs", "solved", "errors", "med runtime ms", "med iters", "med vt"
        )?;
        for s in &self.per_algo {
            writeln!(
                f,
                "{:<8} {:<8} {:>6} {:>7} {:>7} {:>14.3} {:>12.1} {:>12.1}",
                s.algo.to_string(),
                s.heuristic.to_string(),
                s.runs,
                s.solved,
                s.errors,
                s.median_runtime_ms,
                s.median_iterations,
                s.median_vt_calls
            )?;
        }
        match (self.mean_cost_ratio, self.max_cost_ratio) {
            (Some(mean), Some(max)) => writeln!(
                f,
                "cost ratio aasipp/optimal over {} instances: mean {:.6}, max {:.6}",
                self.ratio_samples, mean, max
            ),
            _ => writeln!(f, "cost ratio aasipp/optimal: no paired samples"),
        }
    }
}

/// Everything a batch run produces.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub records: Vec<BenchmarkRecord>,
    pub summary: BenchSummary,
}

pub const CSV_HEADER: &str =
    "map,scenario,obstacles,algo,heuristic,outcome,cost,iterations,vt_calls,runtime_ms";

/// Render records as CSV, exactly one row per record, deterministic field
/// formatting (runtime is wall-clock and varies run to run).
pub fn write_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let cost = r.cost.map(|c| format!("{c:.9}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.map,
            r.scenario,
            r.obstacles,
            r.algo,
            r.heuristic,
            r.outcome,
            cost,
            r.iterations,
            r.vt_calls,
            r.runtime_ms
        );
    }
    out
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

struct PreparedEntry {
    map_label: String,
    scenario_label: String,
    instance: ProblemInstance,
    heuristics: Vec<(HeuristicKind, Arc<Heuristic>)>,
}

/// Run the whole benchmark batch. Per-instance planner errors are recorded
/// as `error` rows and never abort the batch. Instances may execute
/// concurrently (`jobs` threads; 0 = rayon default); records come back in
/// deterministic configuration order regardless of completion order.
pub fn run_benchmark(
    config: &BenchConfig,
    base_dir: &Path,
    jobs: usize,
) -> Result<BenchOutput, HarnessError> {
    let algorithms = config.parsed_algorithms()?;
    let heuristic_kinds = config.parsed_heuristics()?;

    let mut entries = Vec::new();
    for e in &config.instances {
        let map_path = base_dir.join(&e.map);
        let scen_path = base_dir.join(&e.scenario);
        let map = parse_map(&std::fs::read_to_string(&map_path)?)?;
        let scenario = parse_scenario(&std::fs::read_to_string(&scen_path)?, &map)?;
        let instance = scenario.into_instance(map)?;
        let heuristics = heuristic_kinds
            .iter()
            .map(|&k| {
                (
                    k,
                    Arc::new(Heuristic::build(
                        k,
                        &instance.map,
                        instance.goal,
                        instance.agent_radius,
                        instance.speed,
                    )),
                )
            })
            .collect();
        entries.push(PreparedEntry {
            map_label: e.map.clone(),
            scenario_label: e.scenario.clone(),
            instance,
            heuristics,
        });
    }

    // One job per (entry x obstacle count x algorithm x heuristic).
    struct Job<'a> {
        entry: &'a PreparedEntry,
        count: usize,
        algo: Algorithm,
        hkind: HeuristicKind,
        heuristic: Arc<Heuristic>,
    }
    let mut jobs_list = Vec::new();
    for entry in &entries {
        let available = entry.instance.obstacles.len();
        let counts: Vec<usize> = match &config.obstacle_counts {
            Some(cs) => cs.iter().map(|&c| c.min(available)).collect(),
            None => vec![available],
        };
        for &count in &counts {
            for &algo in &algorithms {
                for &(hkind, ref h) in &entry.heuristics {
                    jobs_list.push(Job {
                        entry,
                        count,
                        algo,
                        hkind,
                        heuristic: h.clone(),
                    });
                }
            }
        }
    }

    let run_job = |job: &Job| -> BenchmarkRecord {
        let mut instance = job.entry.instance.clone();
        instance.obstacles.truncate(job.count);
        match run_instance_with(
            &instance,
            job.algo,
            job.hkind,
            &job.heuristic,
            &job.entry.map_label,
            &job.entry.scenario_label,
        ) {
            Ok((_, record)) => record,
            Err(e) => BenchmarkRecord {
                map: job.entry.map_label.clone(),
                scenario: job.entry.scenario_label.clone(),
                obstacles: job.count,
                algo: job.algo,
                heuristic: job.hkind,
                outcome: format!("error: {e}"),
                cost: None,
                iterations: 0,
                vt_calls: 0,
                runtime_ms: 0.0,
            },
        }
    };

    let records: Vec<BenchmarkRecord> = if jobs == 1 {
        jobs_list.iter().map(run_job).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        pool.install(|| jobs_list.par_iter().map(run_job).collect())
    };

    let summary = summarize(&records);
    Ok(BenchOutput { records, summary })
}

/// Aggregate medians and cost ratios from raw records.
pub fn summarize(records: &[BenchmarkRecord]) -> BenchSummary {
    let mut combos: Vec<(Algorithm, HeuristicKind)> = Vec::new();
    for r in records {
        if !combos.contains(&(r.algo, r.heuristic)) {
            combos.push((r.algo, r.heuristic));
        }
    }
    let per_algo = combos
        .iter()
        .map(|&(algo, h)| {
            let rows: Vec<&BenchmarkRecord> = records
                .iter()
                .filter(|r| r.algo == algo && r.heuristic == h)
                .collect();
            let mut runtimes: Vec<f64> = rows.iter().map(|r| r.runtime_ms).collect();
            let mut iters: Vec<f64> = rows.iter().map(|r| r.iterations as f64).collect();
            let mut vts: Vec<f64> = rows.iter().map(|r| r.vt_calls as f64).collect();
            AlgoSummary {
                algo,
                heuristic: h,
                runs: rows.len(),
                solved: rows.iter().filter(|r| r.outcome == "solved").count(),
                errors: rows
                    .iter()
                    .filter(|r| r.outcome.starts_with("error"))
                    .count(),
                median_runtime_ms: median(&mut runtimes),
                median_iterations: median(&mut iters),
                median_vt_calls: median(&mut vts),
            }
        })
        .collect();

    // Cost ratios: aasipp vs any optimal planner row of the same instance.
    let mut ratios = Vec::new();
    for r in records {
        if r.algo != Algorithm::AaSipp || r.outcome != "solved" {
            continue;
        }
        let Some(greedy_cost) = r.cost else { continue };
        let optimal = records.iter().find(|o| {
            (o.algo == Algorithm::Nto || o.algo == Algorithm::Ito)
                && o.heuristic == r.heuristic
                && o.map == r.map
                && o.scenario == r.scenario
                && o.obstacles == r.obstacles
                && o.outcome == "solved"
        });
        if let Some(cost) = optimal.and_then(|o| o.cost) {
            ratios.push(greedy_cost / cost);
        }
    }
    let (mean, max) = if ratios.is_empty() {
        (None, None)
    } else {
        (
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64),
            Some(ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))),
        )
    };
    BenchSummary {
        per_algo,
        ratio_samples: ratios.len(),
        mean_cost_ratio: mean,
        max_cost_ratio: max,
    }
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

const SVG_SCALE: f64 = 32.0;
const PLAN_COLORS: [&str; 4] = ["#2ca02c", "#e6b417", "#d62728", "#1f77b4"];

fn svg_xy(x: f64, y: f64) -> (f64, f64) {
    ((x + 1.0) * SVG_SCALE, (y + 1.0) * SVG_SCALE)
}

/// Deterministic SVG of an instance: grid, blocked cells, obstacle
/// trajectories with timestamps, labelled agent plans, start/goal markers.
pub fn render_svg(instance: &ProblemInstance, plans: &[(String, &MotionPlan)]) -> String {
    let map = &instance.map;
    let w = (map.width() as f64 + 1.0) * SVG_SCALE;
    let h = (map.height() as f64 + 1.0) * SVG_SCALE;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);

    // Blocked cells.
    for y in 0..map.height() {
        for x in 0..map.width() {
            if map.is_blocked(x, y) {
                let (sx, sy) = svg_xy(x as f64 - 0.5, y as f64 - 0.5);
                let _ = writeln!(
                    s,
                    r##"<rect x="{sx:.2}" y="{sy:.2}" width="{SVG_SCALE:.2}" height="{SVG_SCALE:.2}" fill="#555555"/>"##
                );
            }
        }
    }
    // Grid lines over cell boundaries.
    for x in 0..=map.width() {
        let (sx, _) = svg_xy(x as f64 - 0.5, 0.0);
        let (_, sy0) = svg_xy(0.0, -0.5);
        let (_, sy1) = svg_xy(0.0, map.height() as f64 - 0.5);
        let _ = writeln!(
            s,
            r##"<line x1="{sx:.2}" y1="{sy0:.2}" x2="{sx:.2}" y2="{sy1:.2}" stroke="#cccccc" stroke-width="1"/>"##
        );
    }
    for y in 0..=map.height() {
        let (_, sy) = svg_xy(0.0, y as f64 - 0.5);
        let (sx0, _) = svg_xy(-0.5, 0.0);
        let (sx1, _) = svg_xy(map.width() as f64 - 0.5, 0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{sx0:.2}" y1="{sy:.2}" x2="{sx1:.2}" y2="{sy:.2}" stroke="#cccccc" stroke-width="1"/>"##
        );
    }

    // Obstacle trajectories: dashed polyline, start disk, per-waypoint times.
    for (k, o) in instance.obstacles.iter().enumerate() {
        let mut pts = vec![(o.start, 0.0)];
        for a in &o.actions {
            if a.kind == ActionKind::Move {
                pts.push((a.target, a.end()));
            }
        }
        let poly: Vec<String> = pts
            .iter()
            .map(|(v, _)| {
                let (sx, sy) = svg_xy(v.x as f64, v.y as f64);
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#888888" stroke-width="2" stroke-dasharray="6 4"/>"##,
            poly.join(" ")
        );
        let (sx, sy) = svg_xy(o.start.x as f64, o.start.y as f64);
        let _ = writeln!(
            s,
            r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="{:.2}" fill="#333333" opacity="0.8"/>"##,
            o.radius * SVG_SCALE
        );
        for (v, t) in &pts {
            let (sx, sy) = svg_xy(v.x as f64, v.y as f64);
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}" font-size="9" fill="#666666">o{k} t={t:.1}</text>"##,
                sx + 4.0,
                sy - 4.0
            );
        }
    }

    // Agent plans.
    for (i, (label, plan)) in plans.iter().enumerate() {
        let color = PLAN_COLORS[i % PLAN_COLORS.len()];
        let mut pts = vec![plan.start];
        for a in &plan.actions {
            if a.kind == ActionKind::Move {
                pts.push(a.target);
            }
        }
        let poly: Vec<String> = pts
            .iter()
            .map(|v| {
                let (sx, sy) = svg_xy(v.x as f64, v.y as f64);
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2.5"/>"#,
            poly.join(" ")
        );
        let (lx, ly) = svg_xy(plan.start.x as f64, plan.start.y as f64);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{label}</text>"#,
            lx + 4.0,
            ly + 12.0 * (i as f64 + 1.0)
        );
    }

    // Start and goal markers.
    let (sx, sy) = svg_xy(instance.start.x as f64, instance.start.y as f64);
    let _ = writeln!(
        s,
        r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{:.2}" fill="white" stroke="black" stroke-width="2"/>"#,
        instance.agent_radius * SVG_SCALE
    );
    let (gx, gy) = svg_xy(instance.goal.x as f64, instance.goal.y as f64);
    let _ = writeln!(
        s,
        r#"<circle cx="{gx:.2}" cy="{gy:.2}" r="{:.2}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="3 3"/>"#,
        instance.agent_radius * SVG_SCALE
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::{plan_ito, plan_nto};
    use crate::world::TimedAction;
    use std::collections::HashSet;

    fn v(x: i32, y: i32) -> Vertex {
        Vertex::new(x, y)
    }

    fn mv(start: f64, source: Vertex, target: Vertex, speed: f64) -> TimedAction {
        TimedAction {
            kind: ActionKind::Move,
            start,
            duration: source.distance(target) / speed,
            source,
            target,
        }
    }

    fn sweep_instance() -> ProblemInstance {
        let blocked: HashSet<(i32, i32)> = [(0, 0)].into_iter().collect();
        let map = GridMap::new(10, 4, &blocked);
        let obs = MotionPlan::new(
            v(9, 1),
            0.4,
            1.0,
            vec![mv(0.0, v(9, 1), v(2, 1), 1.0), mv(7.0, v(2, 1), v(0, 2), 1.0)],
        )
        .unwrap();
        ProblemInstance::new(map, v(0, 1), v(9, 0), 0.4, 1.0, vec![obs]).unwrap()
    }

    #[test]
    fn empty_plan_on_free_start_validates() {
        let map = GridMap::open(4, 4);
        let inst = ProblemInstance::new(map, v(1, 1), v(1, 1), 0.4, 1.0, vec![]).unwrap();
        let plan = MotionPlan::new(v(1, 1), 0.4, 1.0, vec![]).unwrap();
        assert!(validate_plan(&plan, &inst).is_ok());
    }

    #[test]
    fn straight_through_obstacle_reports_collision_witness() {
        let inst = sweep_instance();
        // Drive straight J-ward along row 1 into the oncoming obstacle.
        let bad = MotionPlan::new(
            v(0, 1),
            0.4,
            1.0,
            vec![mv(0.0, v(0, 1), v(9, 1), 1.0)],
        )
        .unwrap();
        let report = validate_plan(&bad, &inst);
        assert!(!report.is_ok());
        let collision = report
            .violations
            .iter()
            .find_map(|v| match v {
                Violation::Collision {
                    time,
                    obstacle,
                    distance,
                    required,
                } => Some((*time, *obstacle, *distance, *required)),
                _ => None,
            })
            .expect("collision witness expected");
        let (time, obstacle, distance, required) = collision;
        assert_eq!(obstacle, 0);
        assert!(distance < 0.8, "distance {distance}");
        assert_eq!(required, 0.8);
        // Head-on along the row; they meet near the middle early.
        assert!(time > 3.0 && time < 5.0, "time {time}");
    }

    #[test]
    fn optimal_plans_pass_validation() {
        let inst = sweep_instance();
        let table = build_safe_intervals(&inst);
        let h = Heuristic::euclid(inst.goal, inst.speed);
        for result in [plan_nto(&inst, &table, &h), plan_ito(&inst, &table, &h)] {
            assert_eq!(result.outcome, Outcome::Solved);
            let report = validate_plan(&result.plan.unwrap(), &inst);
            assert!(report.is_ok(), "{:?}", report.violations);
        }
    }

    #[test]
    fn generate_zero_obstacles() {
        let map = GridMap::open(8, 8);
        assert!(generate_scenario(&map, 0, 1, 0.4, 1.0).unwrap().is_empty());
    }

    #[test]
    fn generate_two_obstacles_deterministic_and_conflict_free() {
        let map = GridMap::open(16, 16);
        let a = generate_scenario(&map, 2, 42, 0.4, 1.0).unwrap();
        let b = generate_scenario(&map, 2, 42, 0.4, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        // Pairwise conflict freedom via the independent validator: treat one
        // as the agent plan, the other as the only obstacle.
        let inst = ProblemInstance::new(
            map,
            a[0].start,
            a[0].final_vertex(),
            a[0].radius,
            a[0].speed,
            vec![a[1].clone()],
        )
        .unwrap();
        let report = validate_plan(&a[0], &inst);
        assert!(report.is_ok(), "{:?}", report.violations);
    }

    #[test]
    fn generate_on_random_blocked_map() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut blocked = HashSet::new();
        for y in 0..32 {
            for x in 0..32 {
                if rng.gen_bool(0.2) {
                    blocked.insert((x, y));
                }
            }
        }
        let map = GridMap::new(32, 32, &blocked);
        let plans = generate_scenario(&map, 8, 7, 0.4, 1.0).unwrap();
        assert_eq!(plans.len(), 8);
        for (i, p) in plans.iter().enumerate() {
            let others: Vec<MotionPlan> = plans
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| q.clone())
                .collect();
            let inst = ProblemInstance::new(
                map.clone(),
                p.start,
                p.final_vertex(),
                p.radius,
                p.speed,
                others,
            )
            .unwrap();
            assert!(validate_plan(p, &inst).is_ok(), "obstacle {i} conflicts");
        }
    }

    #[test]
    fn run_instance_matches_planner_and_validates() {
        let inst = sweep_instance();
        let (result, record) =
            run_instance(&inst, Algorithm::Ito, HeuristicKind::Euclid, "worked", "s0").unwrap();
        assert_eq!(record.outcome, "solved");
        assert_eq!(record.obstacles, 1);
        assert!((record.cost.unwrap() - result.cost).abs() < 1e-12);
        assert_eq!(record.iterations, record.vt_calls);
    }

    #[test]
    fn csv_shape() {
        let inst = sweep_instance();
        let (_, record) =
            run_instance(&inst, Algorithm::AaSipp, HeuristicKind::Euclid, "m", "s").unwrap();
        let csv = write_csv(&[record]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 10);
        assert!(row.starts_with("m,s,1,aasipp,euclid,solved,"));
    }

    #[test]
    fn empty_benchmark_yields_header_only_csv() {
        let config = BenchConfig::parse(
            r#"{"version":1,"instances":[],"algorithms":["ito"],"heuristics":["euclid"]}"#,
        )
        .unwrap();
        let out = run_benchmark(&config, Path::new("."), 1).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(write_csv(&out.records), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn benchmark_csv_deterministic_modulo_runtime() {
        let dir = tempfile::tempdir().unwrap();
        let map = GridMap::open(10, 10);
        std::fs::write(dir.path().join("m.map"), crate::world::serialize_map(&map)).unwrap();
        let scenario = generate_full_scenario(&map, 3, 11, 0.4, 1.0).unwrap();
        std::fs::write(
            dir.path().join("s.json"),
            crate::world::serialize_scenario(&scenario),
        )
        .unwrap();
        let config = BenchConfig::parse(
            r#"{
                "version": 1,
                "instances": [ { "map": "m.map", "scenario": "s.json" } ],
                "obstacle_counts": [1, 3],
                "algorithms": ["sipp", "aasipp", "nto", "ito"],
                "heuristics": ["euclid", "perfect"]
            }"#,
        )
        .unwrap();
        let strip_runtime = |csv: &str| -> String {
            csv.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = run_benchmark(&config, dir.path(), 1).unwrap();
        let b = run_benchmark(&config, dir.path(), 4).unwrap();
        assert_eq!(a.records.len(), 16);
        assert_eq!(
            strip_runtime(&write_csv(&a.records)),
            strip_runtime(&write_csv(&b.records)),
            "records must be identical apart from wall-clock runtime"
        );
    }

    #[test]
    fn svg_renders_and_parses() {
        let inst = sweep_instance();
        let table = build_safe_intervals(&inst);
        let h = Heuristic::euclid(inst.goal, inst.speed);
        let ito = plan_ito(&inst, &table, &h);
        let greedy = plan_aa_sipp(&inst, &table, &h);
        let plans = vec![
            ("ito".to_string(), ito.plan.as_ref().unwrap()),
            ("aasipp".to_string(), greedy.plan.as_ref().unwrap()),
        ];
        let svg = render_svg(&inst, &plans);
        let again = render_svg(&inst, &plans);
        assert_eq!(svg, again, "rendering must be byte-stable");
        let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
        let polylines = doc
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        // One obstacle trajectory plus two plan polylines.
        assert_eq!(polylines, 3);
    }

    #[test]
    fn svg_grid_only_map() {
        let map = GridMap::open(3, 3);
        let inst = ProblemInstance::new(map, v(0, 0), v(2, 2), 0.4, 1.0, vec![]).unwrap();
        let svg = render_svg(&inst, &[]);
        assert!(svg.starts_with("<?xml"));
        roxmltree::Document::parse(&svg).expect("well-formed XML");
    }
}
