//! Static map model, motion plans, problem instances and all file parsing.
//!
//! Geometry convention: cell `(x, y)` occupies the unit square
//! `[x-0.5, x+0.5] x [y-0.5, y+0.5]` and its vertex sits at the center
//! `(x, y)`. A disk of radius 0.5 exactly fills one cell.

use crate::geometry::{self, Point};
use crate::TOL;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

/// Errors from parsing or validating maps, scenarios and plan files.
#[derive(Debug, Error)]
pub enum WorldError {
    #[error("map parse error on line {line}: {msg}")]
    MapFormat { line: usize, msg: String },

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported file version {0}")]
    Version(u32),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("obstacle {obstacle}, action {action}: {msg}")]
    ObstacleAction {
        obstacle: usize,
        action: usize,
        msg: String,
    },

    #[error("obstacle {obstacle}: {msg}")]
    Obstacle { obstacle: usize, msg: String },

    #[error("plan error: {0}")]
    Plan(String),
}

/// A grid vertex, identified by its cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    /// Geometric position of the vertex (the cell center).
    pub fn point(&self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }

    pub fn distance(&self, other: Vertex) -> f64 {
        self.point().distance(other.point())
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Static world: dimensions plus the set of blocked cells.
#[derive(Debug, Clone)]
pub struct GridMap {
    width: i32,
    height: i32,
    blocked: Vec<bool>,
}

impl GridMap {
    /// Build a map from an explicit blocked-cell set.
    pub fn new(width: i32, height: i32, blocked_cells: &HashSet<(i32, i32)>) -> Self {
        assert!(width >= 1 && height >= 1, "map must be at least 1x1");
        let mut blocked = vec![false; (width * height) as usize];
        for &(x, y) in blocked_cells {
            assert!(
                x >= 0 && x < width && y >= 0 && y < height,
                "blocked cell ({x}, {y}) out of bounds"
            );
            blocked[(y * width + x) as usize] = true;
        }
        GridMap {
            width,
            height,
            blocked,
        }
    }

    /// An all-free map.
    pub fn open(width: i32, height: i32) -> Self {
        GridMap::new(width, height, &HashSet::new())
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && x < self.width && y >= 0 && y < self.height
    }

    /// Whether the cell is blocked. Out-of-bounds cells count as blocked.
    pub fn is_blocked(&self, x: i32, y: i32) -> bool {
        if !self.in_bounds(x, y) {
            return true;
        }
        self.blocked[(y * self.width + x) as usize]
    }

    pub fn is_free(&self, x: i32, y: i32) -> bool {
        !self.is_blocked(x, y)
    }

    pub fn is_free_vertex(&self, v: Vertex) -> bool {
        self.is_free(v.x, v.y)
    }

    /// Row-major index of an in-bounds vertex.
    pub fn vertex_index(&self, v: Vertex) -> usize {
        debug_assert!(self.in_bounds(v.x, v.y));
        (v.y * self.width + v.x) as usize
    }

    pub fn vertex_at(&self, index: usize) -> Vertex {
        let i = index as i32;
        Vertex::new(i % self.width, i / self.width)
    }

    pub fn vertex_count(&self) -> usize {
        (self.width * self.height) as usize
    }

    /// Iterate over all free vertices.
    pub fn free_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count())
            .map(|i| self.vertex_at(i))
            .filter(|v| self.is_free_vertex(*v))
    }

    /// Stable content hash used to key heuristic cache files.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        for &b in &self.blocked {
            h.update([b as u8]);
        }
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Kind of a timed action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Wait,
    Move,
}

/// One wait or move action with its start time and duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedAction {
    pub kind: ActionKind,
    pub start: f64,
    pub duration: f64,
    pub source: Vertex,
    pub target: Vertex,
}

impl TimedAction {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// A timed sequence of wait/move actions for the agent or an obstacle.
///
/// The occupant is parked at `start` for all `t` in `[0, first action start]`
/// and at the last target forever after the plan ends. Plan invariants
/// (contiguity, move durations, line of sight) are enforced by
/// [`MotionPlan::validate`]; construction via [`MotionPlan::new`] checks the
/// structural ones that need no map.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPlan {
    pub start: Vertex,
    pub radius: f64,
    pub speed: f64,
    pub actions: Vec<TimedAction>,
}

impl MotionPlan {
    /// Structural validation: contiguity, durations, anchoring.
    ///
    /// Trailing waits are rejected: the occupant parks at the last target
    /// forever anyway, and the serialized form cannot carry their duration.
    pub fn new(
        start: Vertex,
        radius: f64,
        speed: f64,
        actions: Vec<TimedAction>,
    ) -> Result<Self, String> {
        if radius <= 0.0 {
            return Err(format!("radius must be positive, got {radius}"));
        }
        if speed <= 0.0 {
            return Err(format!("speed must be positive, got {speed}"));
        }
        let mut at = start;
        let mut clock = None::<f64>;
        for (i, a) in actions.iter().enumerate() {
            if a.source != at {
                return Err(format!(
                    "action {i} starts at {} but the plan is at {at}",
                    a.source
                ));
            }
            if a.start < -TOL {
                return Err(format!("action {i} has negative start time {}", a.start));
            }
            if let Some(end) = clock {
                if (a.start - end).abs() > TOL {
                    return Err(format!(
                        "action {i} starts at {} but the previous action ends at {end}",
                        a.start
                    ));
                }
            }
            match a.kind {
                ActionKind::Wait => {
                    if a.target != a.source {
                        return Err(format!("action {i}: wait must stay in place"));
                    }
                    if a.duration <= TOL {
                        return Err(format!("action {i}: wait duration must be positive"));
                    }
                    if i + 1 == actions.len() {
                        return Err(format!("action {i}: trailing wait is redundant"));
                    }
                }
                ActionKind::Move => {
                    if a.target == a.source {
                        return Err(format!("action {i}: move must change vertex"));
                    }
                    let expect = a.source.distance(a.target) / speed;
                    if (a.duration - expect).abs() > TOL {
                        return Err(format!(
                            "action {i}: move duration {} != distance/speed {expect}",
                            a.duration
                        ));
                    }
                }
            }
            clock = Some(a.end());
            at = a.target;
        }
        Ok(MotionPlan {
            start,
            radius,
            speed,
            actions,
        })
    }

    /// Full validation against a map: structural invariants plus bounds and
    /// line of sight for every move at this plan's radius.
    pub fn validate(&self, map: &GridMap) -> Result<(), String> {
        MotionPlan::new(self.start, self.radius, self.speed, self.actions.clone())?;
        let check_vertex = |v: Vertex| -> Result<(), String> {
            if !map.in_bounds(v.x, v.y) {
                return Err(format!("vertex {v} out of bounds"));
            }
            if map.is_blocked(v.x, v.y) {
                return Err(format!("vertex {v} is blocked"));
            }
            Ok(())
        };
        check_vertex(self.start)?;
        for (i, a) in self.actions.iter().enumerate() {
            check_vertex(a.source)?;
            check_vertex(a.target)?;
            if a.kind == ActionKind::Move
                && !geometry::los(a.source, a.target, self.radius, map)
            {
                return Err(format!(
                    "action {i}: move {} -> {} has no line of sight at radius {}",
                    a.source, a.target, self.radius
                ));
            }
        }
        Ok(())
    }

    /// Time the last action ends (0 for an empty plan).
    pub fn end_time(&self) -> f64 {
        self.actions.last().map_or(0.0, |a| a.end())
    }

    /// Plan cost: the sum of action durations.
    pub fn cost(&self) -> f64 {
        self.actions.iter().map(|a| a.duration).sum()
    }

    /// Vertex the occupant rests at after the plan ends.
    pub fn final_vertex(&self) -> Vertex {
        self.actions.last().map_or(self.start, |a| a.target)
    }

    /// Exact position at time `t` by direct interpolation of the actions.
    pub fn position_at(&self, t: f64) -> Point {
        if self.actions.is_empty() || t <= self.actions[0].start {
            return self.start.point();
        }
        // Last action whose start is <= t.
        let idx = match self
            .actions
            .partition_point(|a| a.start <= t)
        {
            0 => return self.start.point(),
            n => n - 1,
        };
        let a = &self.actions[idx];
        if t >= a.end() {
            return a.target.point();
        }
        match a.kind {
            ActionKind::Wait => a.source.point(),
            ActionKind::Move => {
                let frac = (t - a.start) / a.duration;
                let p = a.source.point();
                let q = a.target.point();
                Point::new(p.x + (q.x - p.x) * frac, p.y + (q.y - p.y) * frac)
            }
        }
    }
}

/// A single planning query: map, agent endpoints and the obstacle plans.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub map: GridMap,
    pub start: Vertex,
    pub goal: Vertex,
    pub agent_radius: f64,
    pub speed: f64,
    pub obstacles: Vec<MotionPlan>,
}

impl ProblemInstance {
    pub fn new(
        map: GridMap,
        start: Vertex,
        goal: Vertex,
        agent_radius: f64,
        speed: f64,
        obstacles: Vec<MotionPlan>,
    ) -> Result<Self, String> {
        if !map.in_bounds(start.x, start.y) || map.is_blocked(start.x, start.y) {
            return Err(format!("start {start} is blocked or out of bounds"));
        }
        if !map.in_bounds(goal.x, goal.y) || map.is_blocked(goal.x, goal.y) {
            return Err(format!("goal {goal} is blocked or out of bounds"));
        }
        if agent_radius <= 0.0 || agent_radius > 0.5 + TOL {
            return Err(format!(
                "agent radius must be in (0, 0.5], got {agent_radius}"
            ));
        }
        if speed <= 0.0 {
            return Err(format!("agent speed must be positive, got {speed}"));
        }
        for (k, obs) in obstacles.iter().enumerate() {
            obs.validate(&map)
                .map_err(|e| format!("obstacle {k}: {e}"))?;
        }
        Ok(ProblemInstance {
            map,
            start,
            goal,
            agent_radius,
            speed,
            obstacles,
        })
    }
}

// ---------------------------------------------------------------------------
// MovingAI .map format
// ---------------------------------------------------------------------------

/// Parse a MovingAI `.map` file.
///
/// Header: `type <name>`, `height H`, `width W` (height/width in either
/// order), then `map` and exactly H rows of W characters. `.` and `G` are
/// passable; every other character is blocked.
pub fn parse_map(text: &str) -> Result<GridMap, WorldError> {
    let err = |line: usize, msg: String| WorldError::MapFormat { line, msg };
    let mut lines = text.lines().enumerate();

    let mut next_content = |what: &str| -> Result<(usize, &str), WorldError> {
        for (i, raw) in lines.by_ref() {
            let s = raw.trim_end_matches(['\r', ' ', '\t']);
            if !s.is_empty() {
                return Ok((i + 1, s));
            }
        }
        Err(err(0, format!("unexpected end of file, expected {what}")))
    };

    let (line_no, type_line) = next_content("type header")?;
    if !type_line.starts_with("type") {
        return Err(err(line_no, format!("expected `type ...`, got `{type_line}`")));
    }

    let mut height: Option<i32> = None;
    let mut width: Option<i32> = None;
    for _ in 0..2 {
        let (line_no, l) = next_content("height/width header")?;
        let mut parts = l.split_whitespace();
        let key = parts.next().unwrap_or("");
        let value = parts
            .next()
            .ok_or_else(|| err(line_no, format!("missing value in `{l}`")))?;
        let value: i32 = value
            .parse()
            .map_err(|_| err(line_no, format!("invalid integer `{value}`")))?;
        if value < 1 {
            return Err(err(line_no, format!("{key} must be >= 1, got {value}")));
        }
        match key {
            "height" => height = Some(value),
            "width" => width = Some(value),
            other => return Err(err(line_no, format!("unexpected header `{other}`"))),
        }
    }
    let height = height.ok_or_else(|| err(0, "missing height header".into()))?;
    let width = width.ok_or_else(|| err(0, "missing width header".into()))?;

    let (line_no, map_line) = next_content("map header")?;
    if map_line != "map" {
        return Err(err(line_no, format!("expected `map`, got `{map_line}`")));
    }

    let mut blocked = vec![false; (width * height) as usize];
    let mut row = 0;
    for (i, raw) in lines {
        let s = raw.trim_end_matches('\r');
        if s.trim().is_empty() {
            continue;
        }
        if row >= height {
            return Err(err(
                i + 1,
                format!("header says height {height} but more rows follow"),
            ));
        }
        if s.chars().count() != width as usize {
            return Err(err(
                i + 1,
                format!("row has {} characters, expected {width}", s.chars().count()),
            ));
        }
        for (col, c) in s.chars().enumerate() {
            let passable = matches!(c, '.' | 'G');
            blocked[(row * width) as usize + col] = !passable;
        }
        row += 1;
    }
    if row != height {
        return Err(err(
            0,
            format!("header says height {height} but only {row} rows found"),
        ));
    }
    Ok(GridMap {
        width,
        height,
        blocked,
    })
}

/// Render a map back to MovingAI text (blocked cells as `@`).
pub fn serialize_map(map: &GridMap) -> String {
    let mut out = String::new();
    out.push_str("type octile\n");
    out.push_str(&format!("height {}\n", map.height));
    out.push_str(&format!("width {}\n", map.width));
    out.push_str("map\n");
    for y in 0..map.height {
        for x in 0..map.width {
            out.push(if map.is_blocked(x, y) { '@' } else { '.' });
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Scenario files (JSON)
// ---------------------------------------------------------------------------

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ActionFile {
    kind: ActionKind,
    start: f64,
    source: [i32; 2],
    target: [i32; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObstacleFile {
    radius: f64,
    speed: f64,
    actions: Vec<ActionFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgentFile {
    start: [i32; 2],
    goal: [i32; 2],
    radius: f64,
    speed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioFile {
    version: u32,
    agent: AgentFile,
    obstacles: Vec<ObstacleFile>,
}

/// Parsed and validated scenario: the agent query plus obstacle plans.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start: Vertex,
    pub goal: Vertex,
    pub agent_radius: f64,
    pub speed: f64,
    pub obstacles: Vec<MotionPlan>,
}

impl Scenario {
    pub fn into_instance(self, map: GridMap) -> Result<ProblemInstance, WorldError> {
        ProblemInstance::new(
            map,
            self.start,
            self.goal,
            self.agent_radius,
            self.speed,
            self.obstacles,
        )
        .map_err(WorldError::Scenario)
    }
}

fn vertex_of(a: [i32; 2]) -> Vertex {
    Vertex::new(a[0], a[1])
}

/// Rebuild a motion plan from file actions: durations are recomputed from
/// geometry, the anchor is the first action's source, and trailing waits
/// (park markers with no expressible duration) are dropped.
fn plan_from_file(
    obstacle: usize,
    radius: f64,
    speed: f64,
    actions: &[ActionFile],
) -> Result<MotionPlan, WorldError> {
    if actions.is_empty() {
        return Err(WorldError::ObstacleAction {
            obstacle,
            action: 0,
            msg: "obstacle has no actions, so its position is undefined".into(),
        });
    }
    let mut trimmed = actions.to_vec();
    while trimmed
        .last()
        .is_some_and(|a| a.kind == ActionKind::Wait)
    {
        let a = trimmed.pop().unwrap();
        if a.source != a.target {
            return Err(WorldError::ObstacleAction {
                obstacle,
                action: trimmed.len(),
                msg: "wait must stay in place".into(),
            });
        }
    }
    let start = vertex_of(actions[0].source);
    let mut timed = Vec::with_capacity(trimmed.len());
    for (i, a) in trimmed.iter().enumerate() {
        let source = vertex_of(a.source);
        let target = vertex_of(a.target);
        let duration = match a.kind {
            ActionKind::Move => {
                if speed <= 0.0 {
                    return Err(WorldError::ObstacleAction {
                        obstacle,
                        action: i,
                        msg: format!("speed must be positive, got {speed}"),
                    });
                }
                source.distance(target) / speed
            }
            // A wait runs until the next action starts.
            ActionKind::Wait => match trimmed.get(i + 1) {
                Some(next) => next.start - a.start,
                None => unreachable!("trailing waits were trimmed"),
            },
        };
        timed.push(TimedAction {
            kind: a.kind,
            start: a.start,
            duration,
            source,
            target,
        });
    }
    MotionPlan::new(start, radius, speed, timed)
        .map_err(|msg| WorldError::Obstacle { obstacle, msg })
}

fn plan_to_file_actions(plan: &MotionPlan) -> Vec<ActionFile> {
    plan.actions
        .iter()
        .map(|a| ActionFile {
            kind: a.kind,
            start: a.start,
            source: [a.source.x, a.source.y],
            target: [a.target.x, a.target.y],
        })
        .collect()
}

/// Parse a scenario file and validate every obstacle plan against the map.
pub fn parse_scenario(text: &str, map: &GridMap) -> Result<Scenario, WorldError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    if file.version != SCENARIO_VERSION {
        return Err(WorldError::Version(file.version));
    }
    let mut obstacles = Vec::with_capacity(file.obstacles.len());
    for (k, o) in file.obstacles.iter().enumerate() {
        let plan = plan_from_file(k, o.radius, o.speed, &o.actions)?;
        plan.validate(map)
            .map_err(|msg| WorldError::Obstacle { obstacle: k, msg })?;
        obstacles.push(plan);
    }
    let scenario = Scenario {
        start: vertex_of(file.agent.start),
        goal: vertex_of(file.agent.goal),
        agent_radius: file.agent.radius,
        speed: file.agent.speed,
        obstacles,
    };
    for (what, v) in [("start", scenario.start), ("goal", scenario.goal)] {
        if !map.in_bounds(v.x, v.y) || map.is_blocked(v.x, v.y) {
            return Err(WorldError::Scenario(format!(
                "agent {what} {v} is blocked or out of bounds"
            )));
        }
    }
    if scenario.agent_radius <= 0.0 || scenario.agent_radius > 0.5 + TOL {
        return Err(WorldError::Scenario(format!(
            "agent radius must be in (0, 0.5], got {}",
            scenario.agent_radius
        )));
    }
    if scenario.speed <= 0.0 {
        return Err(WorldError::Scenario(format!(
            "agent speed must be positive, got {}",
            scenario.speed
        )));
    }
    Ok(scenario)
}

/// Deterministic textual form of a scenario.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        version: SCENARIO_VERSION,
        agent: AgentFile {
            start: [scenario.start.x, scenario.start.y],
            goal: [scenario.goal.x, scenario.goal.y],
            radius: scenario.agent_radius,
            speed: scenario.speed,
        },
        obstacles: scenario
            .obstacles
            .iter()
            .map(|p| ObstacleFile {
                radius: p.radius,
                speed: p.speed,
                actions: plan_to_file_actions(p),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scenario serialization");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Plan output files (JSON)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PlanFile {
    version: u32,
    cost: f64,
    radius: f64,
    speed: f64,
    start: [i32; 2],
    actions: Vec<ActionFile>,
}

/// Deterministic textual form of a plan; `parse_plan` inverts it exactly.
pub fn serialize_plan(plan: &MotionPlan) -> String {
    let file = PlanFile {
        version: SCENARIO_VERSION,
        cost: plan.cost(),
        radius: plan.radius,
        speed: plan.speed,
        start: [plan.start.x, plan.start.y],
        actions: plan_to_file_actions(plan),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plan serialization");
    s.push('\n');
    s
}

/// Parse a plan file back into a motion plan.
pub fn parse_plan(text: &str) -> Result<MotionPlan, WorldError> {
    let file: PlanFile = serde_json::from_str(text)?;
    if file.version != SCENARIO_VERSION {
        return Err(WorldError::Version(file.version));
    }
    let start = vertex_of(file.start);
    if file.actions.is_empty() {
        return MotionPlan::new(start, file.radius, file.speed, Vec::new())
            .map_err(WorldError::Plan);
    }
    let plan = plan_from_file(0, file.radius, file.speed, &file.actions).map_err(|e| {
        WorldError::Plan(match e {
            WorldError::Obstacle { msg, .. } => msg,
            other => other.to_string(),
        })
    })?;
    if plan.start != start {
        return Err(WorldError::Plan(format!(
            "plan starts at {} but actions begin at {}",
            start, plan.start
        )));
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

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

    fn wait(start: f64, duration: f64, at: Vertex) -> TimedAction {
        TimedAction {
            kind: ActionKind::Wait,
            start,
            duration,
            source: at,
            target: at,
        }
    }

    #[test]
    fn parse_empty_3x3() {
        let map = parse_map("type octile\nheight 3\nwidth 3\nmap\n...\n...\n...\n").unwrap();
        assert_eq!(map.width(), 3);
        assert_eq!(map.height(), 3);
        assert_eq!(map.free_vertices().count(), 9);
    }

    #[test]
    fn parse_row_count_mismatch() {
        let err = parse_map("type octile\nheight 2\nwidth 3\nmap\n...\n...\n...\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 7"), "{msg}");
    }

    #[test]
    fn parse_too_few_rows() {
        let err = parse_map("type octile\nheight 3\nwidth 3\nmap\n...\n...\n").unwrap_err();
        assert!(err.to_string().contains("only 2 rows"), "{err}");
    }

    #[test]
    fn parse_row_width_mismatch() {
        let err = parse_map("type octile\nheight 2\nwidth 3\nmap\n...\n..\n").unwrap_err();
        assert!(err.to_string().contains("line 6"), "{err}");
    }

    #[test]
    fn parse_rejects_small_dims() {
        let err = parse_map("type octile\nheight 0\nwidth 3\nmap\n").unwrap_err();
        assert!(err.to_string().contains(">= 1"), "{err}");
    }

    #[test]
    fn character_classification() {
        let map = parse_map("type octile\nheight 2\nwidth 4\nmap\n.G@O\nTSWx\n").unwrap();
        // `.` and `G` passable, everything else blocked.
        assert!(map.is_free(0, 0));
        assert!(map.is_free(1, 0));
        for (x, y) in [(2, 0), (3, 0), (0, 1), (1, 1), (2, 1), (3, 1)] {
            assert!(map.is_blocked(x, y), "({x},{y}) should be blocked");
        }
    }

    #[test]
    fn out_of_bounds_is_blocked() {
        let map = GridMap::open(2, 2);
        assert!(map.is_blocked(-1, 0));
        assert!(map.is_blocked(0, 2));
    }

    proptest! {
        // Cell-for-cell classification against the source character grid.
        #[test]
        fn parse_matches_source_grid(rows in proptest::collection::vec(
            proptest::collection::vec(proptest::sample::select(vec!['.', 'G', '@', 'T', 'O']), 1..12),
            1..12,
        )) {
            let w = rows[0].len();
            let rows: Vec<Vec<char>> = rows.into_iter()
                .map(|mut r| { r.resize(w, '.'); r })
                .collect();
            let mut text = format!("type octile\nheight {}\nwidth {}\nmap\n", rows.len(), w);
            for r in &rows {
                text.extend(r.iter());
                text.push('\n');
            }
            let map = parse_map(&text).unwrap();
            for (y, r) in rows.iter().enumerate() {
                for (x, &c) in r.iter().enumerate() {
                    let passable = c == '.' || c == 'G';
                    prop_assert_eq!(map.is_free(x as i32, y as i32), passable);
                }
            }
        }

        #[test]
        fn map_roundtrip(rows in proptest::collection::vec(
            proptest::collection::vec(any::<bool>(), 1..10), 1..10,
        )) {
            let w = rows[0].len();
            let rows: Vec<Vec<bool>> = rows.into_iter()
                .map(|mut r| { r.resize(w, false); r })
                .collect();
            let blocked: HashSet<(i32, i32)> = rows.iter().enumerate()
                .flat_map(|(y, r)| r.iter().enumerate()
                    .filter(|(_, b)| **b)
                    .map(move |(x, _)| (x as i32, y as i32)))
                .collect();
            let map = GridMap::new(w as i32, rows.len() as i32, &blocked);
            let again = parse_map(&serialize_map(&map)).unwrap();
            for y in 0..map.height() {
                for x in 0..map.width() {
                    prop_assert_eq!(map.is_blocked(x, y), again.is_blocked(x, y));
                }
            }
        }
    }

    #[test]
    fn plan_contiguity_enforced() {
        let a = mv(0.0, v(0, 0), v(3, 4), 1.0);
        let b = mv(5.5, v(3, 4), v(3, 5), 1.0); // should start at 5.0
        let err = MotionPlan::new(v(0, 0), 0.4, 1.0, vec![a, b]).unwrap_err();
        assert!(err.contains("previous action ends"), "{err}");
    }

    #[test]
    fn plan_rejects_wrong_move_duration() {
        let mut a = mv(0.0, v(0, 0), v(3, 4), 1.0);
        a.duration = 4.0;
        let err = MotionPlan::new(v(0, 0), 0.4, 1.0, vec![a]).unwrap_err();
        assert!(err.contains("distance/speed"), "{err}");
    }

    #[test]
    fn plan_rejects_trailing_wait() {
        let a = wait(0.0, 2.0, v(0, 0));
        let err = MotionPlan::new(v(0, 0), 0.4, 1.0, vec![a]).unwrap_err();
        assert!(err.contains("trailing wait"), "{err}");
    }

    #[test]
    fn position_interpolation() {
        let plan = MotionPlan::new(
            v(0, 0),
            0.4,
            2.0,
            vec![
                wait(0.0, 2.0, v(0, 0)),
                mv(2.0, v(0, 0), v(4, 0), 2.0), // duration 2
            ],
        )
        .unwrap();
        assert_eq!(plan.position_at(-1.0), Point::new(0.0, 0.0));
        assert_eq!(plan.position_at(1.0), Point::new(0.0, 0.0));
        let p = plan.position_at(3.0);
        assert!((p.x - 2.0).abs() < TOL && p.y.abs() < TOL);
        assert_eq!(plan.position_at(10.0), Point::new(4.0, 0.0));
        assert!((plan.end_time() - 4.0).abs() < TOL);
        assert!((plan.cost() - 4.0).abs() < TOL);
    }

    #[test]
    fn scenario_zero_obstacles() {
        let map = GridMap::open(4, 4);
        let text = r#"{
            "version": 1,
            "agent": { "start": [0, 0], "goal": [3, 3], "radius": 0.4, "speed": 1.0 },
            "obstacles": []
        }"#;
        let sc = parse_scenario(text, &map).unwrap();
        assert_eq!(sc.start, v(0, 0));
        assert_eq!(sc.goal, v(3, 3));
        assert!(sc.obstacles.is_empty());
    }

    #[test]
    fn scenario_contiguity_violation_names_obstacle() {
        let map = GridMap::open(8, 8);
        // Second action starts at 4.0 but the move (0,0)->(3,0) ends at 3.0.
        let text = r#"{
            "version": 1,
            "agent": { "start": [0, 1], "goal": [7, 1], "radius": 0.4, "speed": 1.0 },
            "obstacles": [
                { "radius": 0.4, "speed": 1.0, "actions": [
                    { "kind": "move", "start": 0.0, "source": [0, 0], "target": [3, 0] },
                    { "kind": "move", "start": 4.0, "source": [3, 0], "target": [3, 3] }
                ] }
            ]
        }"#;
        let err = parse_scenario(text, &map).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("obstacle 0"), "{msg}");
    }

    #[test]
    fn scenario_los_violation_detected() {
        let blocked: HashSet<(i32, i32)> = [(1, 0)].into_iter().collect();
        let map = GridMap::new(4, 2, &blocked);
        let text = r#"{
            "version": 1,
            "agent": { "start": [0, 1], "goal": [3, 1], "radius": 0.4, "speed": 1.0 },
            "obstacles": [
                { "radius": 0.4, "speed": 1.0, "actions": [
                    { "kind": "move", "start": 0.0, "source": [0, 0], "target": [2, 0] }
                ] }
            ]
        }"#;
        let err = parse_scenario(text, &map).unwrap_err();
        assert!(err.to_string().contains("line of sight"), "{err}");
    }

    #[test]
    fn scenario_roundtrip_on_handmade_instance() {
        let map = GridMap::open(10, 4);
        let sc = Scenario {
            start: v(0, 1),
            goal: v(9, 0),
            agent_radius: 0.4,
            speed: 1.0,
            obstacles: vec![MotionPlan::new(
                v(9, 1),
                0.4,
                1.0,
                vec![
                    mv(0.0, v(9, 1), v(2, 1), 1.0),
                    mv(7.0, v(2, 1), v(0, 2), 1.0),
                ],
            )
            .unwrap()],
        };
        let text = serialize_scenario(&sc);
        let again = parse_scenario(&text, &map).unwrap();
        assert_eq!(sc, again);
        assert_eq!(text, serialize_scenario(&again));
    }

    #[test]
    fn trailing_wait_normalized_away_on_parse() {
        let map = GridMap::open(4, 4);
        let text = r#"{
            "version": 1,
            "agent": { "start": [0, 0], "goal": [3, 3], "radius": 0.4, "speed": 1.0 },
            "obstacles": [
                { "radius": 0.4, "speed": 1.0, "actions": [
                    { "kind": "move", "start": 0.0, "source": [1, 1], "target": [2, 1] },
                    { "kind": "wait", "start": 1.0, "source": [2, 1], "target": [2, 1] }
                ] }
            ]
        }"#;
        let sc = parse_scenario(text, &map).unwrap();
        assert_eq!(sc.obstacles[0].actions.len(), 1);
        assert_eq!(sc.obstacles[0].final_vertex(), v(2, 1));
    }

    #[test]
    fn empty_plan_serializes_header_only() {
        let plan = MotionPlan::new(v(2, 2), 0.4, 1.0, Vec::new()).unwrap();
        let text = serialize_plan(&plan);
        assert!(text.contains("\"actions\": []"), "{text}");
        let again = parse_plan(&text).unwrap();
        assert_eq!(plan, again);
        assert_eq!(again.final_vertex(), v(2, 2));
    }

    #[test]
    fn single_move_345() {
        let plan = MotionPlan::new(v(0, 0), 0.4, 1.0, vec![mv(0.0, v(0, 0), v(3, 4), 1.0)]).unwrap();
        assert!((plan.actions[0].duration - 5.0).abs() < TOL);
        let again = parse_plan(&serialize_plan(&plan)).unwrap();
        assert_eq!(plan, again);
    }

    proptest! {
        // Serialization round-trip is identity for valid plans.
        #[test]
        fn plan_roundtrip(seed in any::<u64>(), n in 0usize..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let speed = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
            let mut at = v(rng.gen_range(0..8), rng.gen_range(0..8));
            let start = at;
            let mut t = 0.0;
            let mut actions = Vec::new();
            for i in 0..n {
                let can_wait = i + 1 < n;
                if can_wait && rng.gen_bool(0.3) {
                    let d = rng.gen_range(1..5) as f64 * 0.25;
                    actions.push(wait(t, d, at));
                    t += d;
                } else {
                    let mut next = at;
                    while next == at {
                        next = v(rng.gen_range(0..8), rng.gen_range(0..8));
                    }
                    actions.push(mv(t, at, next, speed));
                    t += at.distance(next) / speed;
                    at = next;
                }
            }
            // Drop any accidental trailing wait.
            while actions.last().map_or(false, |a: &TimedAction| a.kind == ActionKind::Wait) {
                actions.pop();
            }
            let plan = MotionPlan::new(start, 0.4, speed, actions).unwrap();
            let text = serialize_plan(&plan);
            let again = parse_plan(&text).unwrap();
            prop_assert_eq!(&plan.start, &again.start);
            prop_assert_eq!(plan.actions.len(), again.actions.len());
            for (a, b) in plan.actions.iter().zip(again.actions.iter()) {
                prop_assert_eq!(a.kind, b.kind);
                prop_assert_eq!(a.source, b.source);
                prop_assert_eq!(a.target, b.target);
                prop_assert!((a.start - b.start).abs() <= TOL);
                prop_assert!((a.duration - b.duration).abs() <= TOL);
            }
            // Bit-exact on the textual form.
            prop_assert_eq!(text, serialize_plan(&again));
        }
    }
}
