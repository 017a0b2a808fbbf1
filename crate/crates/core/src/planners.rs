//! The four planners over safe-interval state spaces:
//!
//! - `sipp`: A* over (vertex, interval) states with 8-connected edge moves
//! - `aasipp`: the greedy any-angle baseline (edge moves plus the
//!   reset-parent shortcut through the expanded node's predecessor)
//! - `nto`: naive time-optimal any-angle search; expanding a node validates
//!   a transition into every line-of-sight-visible state
//! - `ito`: inverted time-optimal search; instead of generating successors,
//!   each iteration pulls the best potential parent toward the extracted
//!   node, closing it only once no better parent can exist
//!
//! All share `validate_transition`: the earliest collision-free arrival into
//! a target state for a move that may first wait at the source.

use crate::geometry::{self, MotionSegment};
use crate::heuristics::Heuristic;
use crate::intervals::{SafeIntervalTable, StateId};
use crate::world::{ActionKind, MotionPlan, ProblemInstance, TimedAction, Vertex};
use crate::TOL;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

/// Planner selector used by the harness and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sipp,
    AaSipp,
    Nto,
    Ito,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Algorithm::Sipp => "sipp",
            Algorithm::AaSipp => "aasipp",
            Algorithm::Nto => "nto",
            Algorithm::Ito => "ito",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sipp" => Ok(Algorithm::Sipp),
            "aasipp" => Ok(Algorithm::AaSipp),
            "nto" => Ok(Algorithm::Nto),
            "ito" => Ok(Algorithm::Ito),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Search outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solved,
    NoPath,
}

/// Counters and wall-clock time for one planner run.
#[derive(Debug, Clone, Default)]
pub struct PlannerStats {
    pub iterations: u64,
    pub vt_calls: u64,
    pub nodes_generated: u64,
    pub runtime: Duration,
}

/// Solution plan plus statistics.
#[derive(Debug, Clone)]
pub struct PlannerResult {
    pub outcome: Outcome,
    pub plan: Option<MotionPlan>,
    pub cost: f64,
    pub stats: PlannerStats,
}

impl PlannerResult {
    fn no_path(stats: PlannerStats) -> Self {
        PlannerResult {
            outcome: Outcome::NoPath,
            plan: None,
            cost: f64::INFINITY,
            stats,
        }
    }
}

/// Extra knobs for instrumented runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    /// Run to full exhaustion instead of returning at goal closure.
    pub disable_goal_exit: bool,
}

/// Snapshot of one main-loop iteration, delivered to observers after the
/// iteration completes.
#[derive(Debug, Clone)]
pub struct IterationEvent {
    pub iteration: u64,
    pub state: StateId,
    pub vertex: Vertex,
    /// f-value the node was extracted with.
    pub extracted_f: f64,
    /// g_low at extraction time.
    pub extracted_g_low: f64,
    /// Whether bpp == parent held at extraction.
    pub extracted_bpp_is_parent: bool,
    pub end_g: f64,
    pub end_g_low: f64,
    pub end_f: f64,
    pub closed_now: bool,
    pub is_goal: bool,
    /// Minimum f-value left in OPEN after the iteration (inf when empty).
    pub f_min_open: f64,
    pub vt_calls: u64,
}

/// Observer over main-loop iterations; never required for planning.
pub trait SearchObserver {
    fn on_iteration(&mut self, event: &IterationEvent);
}

// ---------------------------------------------------------------------------
// Open list: lazy binary heap with deterministic tie-breaking
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct HeapEntry {
    f: f64,
    g: f64,
    state: StateId,
    stamp: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap pops the maximum: smaller f wins, ties prefer larger g
        // (deeper nodes), then smaller state id. Fully deterministic.
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.state.cmp(&self.state))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct OpenList {
    heap: BinaryHeap<HeapEntry>,
    stamp: Vec<u32>,
    in_open: Vec<bool>,
}

impl OpenList {
    fn new(n: usize) -> Self {
        OpenList {
            heap: BinaryHeap::new(),
            stamp: vec![0; n],
            in_open: vec![false; n],
        }
    }

    /// Insert or update a node's position.
    fn push(&mut self, state: StateId, f: f64, g: f64) {
        let s = state as usize;
        self.stamp[s] = self.stamp[s].wrapping_add(1);
        self.in_open[s] = true;
        self.heap.push(HeapEntry {
            f,
            g,
            state,
            stamp: self.stamp[s],
        });
    }

    fn contains(&self, state: StateId) -> bool {
        self.in_open[state as usize]
    }

    fn discard(&mut self, state: StateId) {
        self.in_open[state as usize] = false;
    }

    fn entry_valid(&self, e: &HeapEntry) -> bool {
        self.in_open[e.state as usize] && self.stamp[e.state as usize] == e.stamp
    }

    /// Pop the best valid node, removing it from OPEN.
    fn pop(&mut self) -> Option<(StateId, f64)> {
        while let Some(e) = self.heap.pop() {
            if self.entry_valid(&e) {
                self.in_open[e.state as usize] = false;
                return Some((e.state, e.f));
            }
        }
        None
    }

    /// Minimum f-value currently in OPEN (inf when empty). Drops stale heads.
    fn peek_min_f(&mut self) -> f64 {
        while let Some(e) = self.heap.peek() {
            if self.entry_valid(e) {
                return e.f;
            }
            self.heap.pop();
        }
        f64::INFINITY
    }
}

// ---------------------------------------------------------------------------
// Shared search context
// ---------------------------------------------------------------------------

/// Obstacle decomposed once per run, paired with the combined radius and its
/// swept bounding box (inflated later by the combined radius).
struct ObstaclePiece {
    seg: MotionSegment,
    radius: f64,
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

struct SearchContext<'a> {
    instance: &'a ProblemInstance,
    table: &'a SafeIntervalTable,
    heuristic: &'a Heuristic,
    pieces: Vec<ObstaclePiece>,
    los_cache: HashMap<u64, bool>,
    vt_calls: u64,
}

impl<'a> SearchContext<'a> {
    fn new(
        instance: &'a ProblemInstance,
        table: &'a SafeIntervalTable,
        heuristic: &'a Heuristic,
    ) -> Self {
        let mut pieces = Vec::new();
        for o in &instance.obstacles {
            let segments = geometry::decompose(o);
            let r = instance.agent_radius + o.radius;
            for seg in &segments {
                let span = if seg.window.high.is_finite() {
                    seg.window.high - seg.window.low
                } else {
                    0.0
                };
                let end = geometry::Point::new(
                    seg.origin.x + seg.velocity.x * span,
                    seg.origin.y + seg.velocity.y * span,
                );
                pieces.push(ObstaclePiece {
                    seg: *seg,
                    radius: r,
                    min_x: seg.origin.x.min(end.x),
                    max_x: seg.origin.x.max(end.x),
                    min_y: seg.origin.y.min(end.y),
                    max_y: seg.origin.y.max(end.y),
                });
            }
        }
        SearchContext {
            instance,
            table,
            heuristic,
            pieces,
            los_cache: HashMap::new(),
            vt_calls: 0,
        }
    }

    /// Memoized line-of-sight between vertices at the agent radius.
    fn los(&mut self, a: Vertex, b: Vertex) -> bool {
        if a == b {
            return true;
        }
        let ia = self.instance.map.vertex_index(a) as u64;
        let ib = self.instance.map.vertex_index(b) as u64;
        let key = if ia < ib {
            (ia << 32) | ib
        } else {
            (ib << 32) | ia
        };
        if let Some(&v) = self.los_cache.get(&key) {
            return v;
        }
        let v = geometry::los(a, b, self.instance.agent_radius, &self.instance.map);
        self.los_cache.insert(key, v);
        v
    }

    fn h_goal(&self, v: Vertex) -> f64 {
        self.heuristic.to_goal(v)
    }

    /// Earliest collision-free arrival into `target` departing from `source`
    /// no earlier than `g_source`, or inf when impossible. One VT call.
    fn validate_transition(&mut self, source: StateId, g_source: f64, target: StateId) -> f64 {
        self.vt_calls += 1;
        let su = self.table.vertex(source);
        let tv = self.table.vertex(target);
        if su == tv {
            // Same-vertex states have disjoint intervals; no transition can
            // bridge them, and a self-transition is useless.
            return f64::INFINITY;
        }
        if !g_source.is_finite() {
            return f64::INFINITY;
        }
        let si = self.table.interval(source);
        let ti = self.table.interval(target);
        let speed = self.instance.speed;
        let move_time = su.distance(tv) / speed;
        let d_lo = g_source.max(ti.low - move_time);
        let d_hi = si.high.min(ti.high - move_time);
        if d_lo > d_hi + TOL {
            return f64::INFINITY;
        }

        let tr = geometry::Traversal::new(su, tv, speed);
        let ax0 = tr.origin.x.min(tv.x as f64);
        let ax1 = tr.origin.x.max(tv.x as f64);
        let ay0 = tr.origin.y.min(tv.y as f64);
        let ay1 = tr.origin.y.max(tv.y as f64);
        let clip = (d_lo, d_hi + 1.0);
        let mut raw = Vec::new();
        for p in &self.pieces {
            // Temporal prefilter: the obstacle piece must overlap some
            // traversal window with departure in [d_lo, d_hi].
            if p.seg.window.high < d_lo || p.seg.window.low > d_hi + tr.duration {
                continue;
            }
            // Spatial prefilter: swept boxes inflated by the combined radius.
            if p.min_x - p.radius > ax1
                || p.max_x + p.radius < ax0
                || p.min_y - p.radius > ay1
                || p.max_y + p.radius < ay0
            {
                continue;
            }
            geometry::collect_segment_departures(&tr, &p.seg, p.radius, Some(clip), &mut raw);
        }
        let merged = geometry::merge_intervals(raw);
        let mut d = d_lo;
        for iv in &merged {
            if iv.high < d {
                continue;
            }
            if d < iv.low - TOL {
                break;
            }
            d = iv.high;
            if d > d_hi + TOL {
                return f64::INFINITY;
            }
        }
        if d > d_hi + TOL {
            return f64::INFINITY;
        }
        d + move_time
    }
}

/// Earliest collision-free arrival into `target` when departing `source` no
/// earlier than `g_source` (waiting at the source inside its safe interval).
///
/// Standalone variant of the planners' inner check; returns inf when the
/// move is impossible, including when line of sight fails.
pub fn validate_transition(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    source: StateId,
    g_source: f64,
    target: StateId,
) -> f64 {
    let su = table.vertex(source);
    let tv = table.vertex(target);
    if su != tv && !geometry::los(su, tv, instance.agent_radius, &instance.map) {
        return f64::INFINITY;
    }
    let h = Heuristic::euclid(instance.goal, instance.speed);
    let mut ctx = SearchContext::new(instance, table, &h);
    ctx.validate_transition(source, g_source, target)
}

// ---------------------------------------------------------------------------
// Plan reconstruction
// ---------------------------------------------------------------------------

/// Build a contiguous motion plan from a start-to-goal sequence of
/// (state, arrival time) pairs, inserting waits where the validated
/// departure exceeds the arrival at the source.
pub fn reconstruct_plan(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    path: &[(StateId, f64)],
) -> MotionPlan {
    let mut actions = Vec::new();
    for pair in path.windows(2) {
        let (from, t_from) = pair[0];
        let (to, t_to) = pair[1];
        let a = table.vertex(from);
        let b = table.vertex(to);
        let move_time = a.distance(b) / instance.speed;
        let depart = t_to - move_time;
        debug_assert!(depart >= t_from - 1e-6, "departure before arrival");
        if depart - t_from > TOL {
            actions.push(TimedAction {
                kind: ActionKind::Wait,
                start: t_from,
                duration: depart - t_from,
                source: a,
                target: a,
            });
        }
        actions.push(TimedAction {
            kind: ActionKind::Move,
            start: depart,
            duration: move_time,
            source: a,
            target: b,
        });
    }
    MotionPlan::new(
        instance.start,
        instance.agent_radius,
        instance.speed,
        actions,
    )
    .expect("reconstructed plan must be structurally valid")
}

fn trace_path(
    table: &SafeIntervalTable,
    parent: &[Option<StateId>],
    g: &[f64],
    goal: StateId,
) -> Vec<(StateId, f64)> {
    let mut path = vec![(goal, g[goal as usize])];
    let mut cur = goal;
    while let Some(p) = parent[cur as usize] {
        path.push((p, g[p as usize]));
        cur = p;
    }
    path.reverse();
    let _ = table;
    path
}

// ---------------------------------------------------------------------------
// Endpoint resolution shared by all planners
// ---------------------------------------------------------------------------

enum Endpoints {
    /// start state, goal state
    Ready(StateId, StateId),
    /// start == goal as a state
    AlreadyThere,
    Unsolvable,
}

fn resolve_endpoints(instance: &ProblemInstance, table: &SafeIntervalTable) -> Endpoints {
    let Some(start) = table.state_at(instance.start, 0.0) else {
        return Endpoints::Unsolvable;
    };
    // The goal state is the unbounded interval at the goal vertex: the agent
    // parks there forever, like the obstacles. If a parked obstacle covers
    // the goal's tail there is nothing to reach.
    let goal_range = table.states_at(instance.goal);
    let Some(goal) = goal_range.clone().last() else {
        return Endpoints::Unsolvable;
    };
    if !table.interval(goal).is_unbounded() {
        return Endpoints::Unsolvable;
    }
    if start == goal {
        return Endpoints::AlreadyThere;
    }
    Endpoints::Ready(start, goal)
}

fn solved_in_place(instance: &ProblemInstance, stats: PlannerStats) -> PlannerResult {
    let plan = MotionPlan::new(
        instance.start,
        instance.agent_radius,
        instance.speed,
        Vec::new(),
    )
    .expect("empty plan");
    PlannerResult {
        outcome: Outcome::Solved,
        plan: Some(plan),
        cost: 0.0,
        stats,
    }
}

// ---------------------------------------------------------------------------
// Forward searches: sipp, aasipp, nto
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum SuccessorMode {
    Edges,
    EdgesWithReset,
    AllVisible,
}

const NEIGHBORS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn forward_search(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
    mode: SuccessorMode,
    options: SearchOptions,
    mut observer: Option<&mut dyn SearchObserver>,
) -> PlannerResult {
    let t0 = Instant::now();
    let mut stats = PlannerStats::default();
    let (start, goal) = match resolve_endpoints(instance, table) {
        Endpoints::Unsolvable => {
            stats.runtime = t0.elapsed();
            return PlannerResult::no_path(stats);
        }
        Endpoints::AlreadyThere => {
            stats.runtime = t0.elapsed();
            return solved_in_place(instance, stats);
        }
        Endpoints::Ready(s, g) => (s, g),
    };

    let n = table.len();
    let mut ctx = SearchContext::new(instance, table, heuristic);
    let mut g = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<StateId>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = OpenList::new(n);

    g[start as usize] = 0.0;
    open.push(start, ctx.h_goal(instance.start), 0.0);
    stats.nodes_generated = 1;

    let mut goal_reached = false;
    while let Some((s, f_ext)) = open.pop() {
        if !f_ext.is_finite() {
            break;
        }
        stats.iterations += 1;
        closed[s as usize] = true;
        let sv = table.vertex(s);
        let is_goal = s == goal;
        if is_goal {
            goal_reached = true;
        }

        if !(is_goal && !options.disable_goal_exit) {
            expand_forward(
                &mut ctx, mode, table, s, &mut g, &mut parent, &closed, &mut open, &mut stats,
            );
        }

        if let Some(obs) = observer.as_deref_mut() {
            let f_min = open.peek_min_f();
            obs.on_iteration(&IterationEvent {
                iteration: stats.iterations,
                state: s,
                vertex: sv,
                extracted_f: f_ext,
                extracted_g_low: g[s as usize],
                extracted_bpp_is_parent: true,
                end_g: g[s as usize],
                end_g_low: g[s as usize],
                end_f: f_ext,
                closed_now: true,
                is_goal,
                f_min_open: f_min,
                vt_calls: ctx.vt_calls,
            });
        }

        if is_goal && !options.disable_goal_exit {
            break;
        }
    }

    stats.vt_calls = ctx.vt_calls;
    stats.runtime = t0.elapsed();
    if goal_reached && g[goal as usize].is_finite() {
        let path = trace_path(table, &parent, &g, goal);
        let plan = reconstruct_plan(instance, table, &path);
        let cost = g[goal as usize];
        PlannerResult {
            outcome: Outcome::Solved,
            plan: Some(plan),
            cost,
            stats,
        }
    } else {
        PlannerResult::no_path(stats)
    }
}

#[allow(clippy::too_many_arguments)]
fn expand_forward(
    ctx: &mut SearchContext,
    mode: SuccessorMode,
    table: &SafeIntervalTable,
    s: StateId,
    g: &mut [f64],
    parent: &mut [Option<StateId>],
    closed: &[bool],
    open: &mut OpenList,
    stats: &mut PlannerStats,
) {
    let sv = table.vertex(s);
    let g_s = g[s as usize];
    let relax = |ctx: &mut SearchContext,
                     target: StateId,
                     arrival: f64,
                     via: StateId,
                     g: &mut [f64],
                     parent: &mut [Option<StateId>],
                     stats: &mut PlannerStats,
                     open: &mut OpenList| {
        if arrival < g[target as usize] - TOL {
            if g[target as usize].is_infinite() {
                stats.nodes_generated += 1;
            }
            g[target as usize] = arrival;
            parent[target as usize] = Some(via);
            let f = arrival + ctx.h_goal(table.vertex(target));
            open.push(target, f, arrival);
        }
    };

    match mode {
        SuccessorMode::Edges | SuccessorMode::EdgesWithReset => {
            let p = parent[s as usize];
            for (dx, dy) in NEIGHBORS {
                let nv = Vertex::new(sv.x + dx, sv.y + dy);
                if !ctx.instance.map.in_bounds(nv.x, nv.y)
                    || ctx.instance.map.is_blocked(nv.x, nv.y)
                    || !ctx.los(sv, nv)
                {
                    continue;
                }
                for target in table.states_at(nv) {
                    if closed[target as usize] {
                        continue;
                    }
                    let mut best = ctx.validate_transition(s, g_s, target);
                    let mut via = s;
                    if mode == SuccessorMode::EdgesWithReset {
                        if let Some(p) = p {
                            let pv = table.vertex(p);
                            if ctx.los(pv, nv) {
                                let shortcut =
                                    ctx.validate_transition(p, g[p as usize], target);
                                // Reset the parent only on a strictly earlier
                                // arrival.
                                if shortcut < best - TOL {
                                    best = shortcut;
                                    via = p;
                                }
                            }
                        }
                    }
                    if best.is_finite() {
                        relax(ctx, target, best, via, g, parent, stats, open);
                    }
                }
            }
        }
        SuccessorMode::AllVisible => {
            for target in table.states() {
                if closed[target as usize] {
                    continue;
                }
                let tv = table.vertex(target);
                if !ctx.los(sv, tv) {
                    continue;
                }
                let arrival = ctx.validate_transition(s, g_s, target);
                if arrival.is_finite() {
                    relax(ctx, target, arrival, s, g, parent, stats, open);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Inverted search: ito
// ---------------------------------------------------------------------------

struct ItoState {
    g: Vec<f64>,
    g_low: Vec<f64>,
    f: Vec<f64>,
    parent: Vec<Option<StateId>>,
    bpp: Vec<Option<StateId>>,
    parents: Vec<Vec<StateId>>,
    closed: Vec<bool>,
}

/// Initialization per the inverted planner: every state is generated, seeded
/// with the start node as its only potential parent when visible from it.
fn ito_init(ctx: &mut SearchContext, start: StateId, open: &mut OpenList) -> ItoState {
    let table = ctx.table;
    let n = table.len();
    let start_v = table.vertex(start);
    let mut st = ItoState {
        g: vec![f64::INFINITY; n],
        g_low: vec![f64::INFINITY; n],
        f: vec![f64::INFINITY; n],
        parent: vec![None; n],
        bpp: vec![None; n],
        parents: vec![Vec::new(); n],
        closed: vec![false; n],
    };
    for s in table.states() {
        let v = table.vertex(s);
        let i = s as usize;
        if ctx.los(start_v, v) {
            st.g_low[i] = table.interval(s).low.max(ctx.heuristic.pairwise(start_v, v));
            st.bpp[i] = Some(start);
            st.parents[i] = vec![start];
        }
        st.f[i] = st.g_low[i] + ctx.h_goal(v);
        open.push(s, st.f[i], st.g[i]);
    }
    st.g[start as usize] = 0.0;
    st.g_low[start as usize] = 0.0;
    open.discard(start);
    st.closed[start as usize] = true;
    st
}

/// `NewBestPotentialParentExists`: reset g_low to g and bpp to parent, then
/// adopt any listed potential parent that strictly improves g_low.
///
/// Parent candidates are clamped to the node's interval start, matching the
/// initialization formula `max(t1, h(start, n))`: any arrival inside the
/// interval is at least its start, so the clamped value stays a lower bound,
/// and without it a later adoption could drop g_low below the value the node
/// was extracted with.
fn new_best_potential_parent_exists(
    ctx: &mut SearchContext,
    st: &mut ItoState,
    s: StateId,
) -> bool {
    let i = s as usize;
    let v = ctx.table.vertex(s);
    let h_goal = ctx.h_goal(v);
    let t1 = ctx.table.interval(s).low;
    st.g_low[i] = st.g[i];
    st.bpp[i] = st.parent[i];
    st.f[i] = st.g_low[i] + h_goal;
    let mut found = false;
    for k in 0..st.parents[i].len() {
        let p = st.parents[i][k];
        let cand =
            t1.max(st.g[p as usize] + ctx.heuristic.pairwise(ctx.table.vertex(p), v));
        if cand < st.g_low[i] - TOL {
            st.g_low[i] = cand;
            st.bpp[i] = Some(p);
            st.f[i] = cand + h_goal;
            found = true;
        }
    }
    found
}

fn ito_search(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
    options: SearchOptions,
    mut observer: Option<&mut dyn SearchObserver>,
) -> PlannerResult {
    let t0 = Instant::now();
    let mut stats = PlannerStats::default();
    let (start, goal) = match resolve_endpoints(instance, table) {
        Endpoints::Unsolvable => {
            stats.runtime = t0.elapsed();
            return PlannerResult::no_path(stats);
        }
        Endpoints::AlreadyThere => {
            stats.runtime = t0.elapsed();
            return solved_in_place(instance, stats);
        }
        Endpoints::Ready(s, g) => (s, g),
    };

    let mut ctx = SearchContext::new(instance, table, heuristic);
    let mut open = OpenList::new(table.len());
    let mut st = ito_init(&mut ctx, start, &mut open);
    stats.nodes_generated = table.len() as u64;

    let mut goal_closed = false;
    loop {
        if open.peek_min_f().is_infinite() {
            break;
        }
        let (s, f_ext) = open.pop().expect("peek said OPEN is non-empty");
        stats.iterations += 1;
        let i = s as usize;
        let v = table.vertex(s);
        let extracted_g_low = st.g_low[i];
        let bpp_s = st.bpp[i].expect("extracted node has a best potential parent");
        let extracted_bpp_is_parent = st.parent[i] == Some(bpp_s);

        if let Some(pos) = st.parents[i].iter().position(|&p| p == bpp_s) {
            st.parents[i].swap_remove(pos);
        }

        let g_new = ctx.validate_transition(bpp_s, st.g[bpp_s as usize], s);
        if g_new < st.g[i] - TOL {
            st.g[i] = g_new;
            st.parent[i] = Some(bpp_s);
        }

        let mut closed_now = false;
        if new_best_potential_parent_exists(&mut ctx, &mut st, s) {
            open.push(s, st.f[i], st.g[i]);
        } else if st.g[i] + ctx.h_goal(v) <= open.peek_min_f() + TOL {
            st.closed[i] = true;
            closed_now = true;
            if s == goal {
                goal_closed = true;
            }
            let stop = goal_closed && !options.disable_goal_exit;
            if !stop {
                // Announce the newly consistent node as a potential parent
                // to every open node it can see.
                for t in table.states() {
                    if !open.contains(t) {
                        continue;
                    }
                    let tv = table.vertex(t);
                    if !ctx.los(v, tv) {
                        continue;
                    }
                    let ti = t as usize;
                    st.parents[ti].push(s);
                    // Clamped like the init and parent-scan formulas.
                    let cand = table
                        .interval(t)
                        .low
                        .max(st.g[i] + ctx.heuristic.pairwise(v, tv));
                    if cand < st.g_low[ti] - TOL {
                        st.g_low[ti] = cand;
                        st.bpp[ti] = Some(s);
                        st.f[ti] = cand + ctx.h_goal(tv);
                        open.push(t, st.f[ti], st.g[ti]);
                    }
                }
            }
        } else {
            open.push(s, st.f[i], st.g[i]);
        }

        if let Some(obs) = observer.as_deref_mut() {
            let f_min = open.peek_min_f();
            obs.on_iteration(&IterationEvent {
                iteration: stats.iterations,
                state: s,
                vertex: v,
                extracted_f: f_ext,
                extracted_g_low,
                extracted_bpp_is_parent,
                end_g: st.g[i],
                end_g_low: st.g_low[i],
                end_f: st.f[i],
                closed_now,
                is_goal: s == goal,
                f_min_open: f_min,
                vt_calls: ctx.vt_calls,
            });
        }

        if goal_closed && !options.disable_goal_exit {
            break;
        }
    }

    stats.vt_calls = ctx.vt_calls;
    stats.runtime = t0.elapsed();
    debug_assert_eq!(stats.iterations, stats.vt_calls);
    if goal_closed && st.g[goal as usize].is_finite() {
        let path = trace_path(table, &st.parent, &st.g, goal);
        let plan = reconstruct_plan(instance, table, &path);
        let cost = st.g[goal as usize];
        PlannerResult {
            outcome: Outcome::Solved,
            plan: Some(plan),
            cost,
            stats,
        }
    } else {
        PlannerResult::no_path(stats)
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// SIPP restricted to 8-connected edge moves (debug baseline).
pub fn plan_sipp(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
) -> PlannerResult {
    forward_search(
        instance,
        table,
        heuristic,
        SuccessorMode::Edges,
        SearchOptions::default(),
        None,
    )
}

/// Greedy any-angle SIPP: edge successors with the reset-parent shortcut.
/// Fast, feasible, not optimal.
pub fn plan_aa_sipp(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
) -> PlannerResult {
    forward_search(
        instance,
        table,
        heuristic,
        SuccessorMode::EdgesWithReset,
        SearchOptions::default(),
        None,
    )
}

/// Naive time-optimal any-angle SIPP: expansion validates a transition into
/// every state visible from the expanded node.
pub fn plan_nto(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
) -> PlannerResult {
    forward_search(
        instance,
        table,
        heuristic,
        SuccessorMode::AllVisible,
        SearchOptions::default(),
        None,
    )
}

/// Inverted time-optimal any-angle SIPP.
pub fn plan_ito(
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
) -> PlannerResult {
    ito_search(instance, table, heuristic, SearchOptions::default(), None)
}

/// Run the selected planner with options and an optional observer.
pub fn plan_with(
    algorithm: Algorithm,
    instance: &ProblemInstance,
    table: &SafeIntervalTable,
    heuristic: &Heuristic,
    options: SearchOptions,
    observer: Option<&mut dyn SearchObserver>,
) -> PlannerResult {
    match algorithm {
        Algorithm::Sipp => forward_search(
            instance,
            table,
            heuristic,
            SuccessorMode::Edges,
            options,
            observer,
        ),
        Algorithm::AaSipp => forward_search(
            instance,
            table,
            heuristic,
            SuccessorMode::EdgesWithReset,
            options,
            observer,
        ),
        Algorithm::Nto => forward_search(
            instance,
            table,
            heuristic,
            SuccessorMode::AllVisible,
            options,
            observer,
        ),
        Algorithm::Ito => ito_search(instance, table, heuristic, options, observer),
    }
}
