//! Admissible cost-to-go estimates: Euclidean distance and a precomputed
//! static any-angle heuristic, plus the pairwise estimate `h(a, b)` the
//! inverted planner needs between arbitrary states.

use crate::geometry;
use crate::world::{GridMap, Vertex};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io;
use std::path::Path;

/// Which estimate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    Euclid,
    Perfect,
}

impl std::fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeuristicKind::Euclid => write!(f, "euclid"),
            HeuristicKind::Perfect => write!(f, "perfect"),
        }
    }
}

/// A ready-to-query heuristic for one (map, goal, radius, speed) setup.
///
/// For the perfect kind, `values[vertex]` is the length of the shortest
/// static any-angle path to the goal divided by the agent speed (infinite
/// where statically unreachable).
#[derive(Debug, Clone)]
pub struct Heuristic {
    kind: HeuristicKind,
    goal: Vertex,
    speed: f64,
    width: i32,
    values: Vec<f64>,
}

/// Straight-line travel time estimate.
pub fn euclid_h(v: Vertex, goal: Vertex, speed: f64) -> f64 {
    v.distance(goal) / speed
}

impl Heuristic {
    pub fn euclid(goal: Vertex, speed: f64) -> Self {
        Heuristic {
            kind: HeuristicKind::Euclid,
            goal,
            speed,
            width: 0,
            values: Vec::new(),
        }
    }

    pub fn build(
        kind: HeuristicKind,
        map: &GridMap,
        goal: Vertex,
        radius: f64,
        speed: f64,
    ) -> Self {
        match kind {
            HeuristicKind::Euclid => Heuristic::euclid(goal, speed),
            HeuristicKind::Perfect => build_perfect_h(map, goal, radius, speed),
        }
    }

    pub fn kind(&self) -> HeuristicKind {
        self.kind
    }

    pub fn goal(&self) -> Vertex {
        self.goal
    }

    /// Estimated time to reach the goal from `v`.
    pub fn to_goal(&self, v: Vertex) -> f64 {
        match self.kind {
            HeuristicKind::Euclid => euclid_h(v, self.goal, self.speed),
            HeuristicKind::Perfect => self.values[(v.y * self.width + v.x) as usize],
        }
    }

    /// Estimated time to reach `b` from `a`.
    ///
    /// For the perfect kind this is the differential form
    /// `max(euclid(a,b)/speed, value(a) - value(b))`, which is admissible
    /// w.r.t. static travel time and keeps the triangle inequality.
    pub fn pairwise(&self, a: Vertex, b: Vertex) -> f64 {
        let e = euclid_h(a, b, self.speed);
        match self.kind {
            HeuristicKind::Euclid => e,
            HeuristicKind::Perfect => {
                let va = self.values[(a.y * self.width + a.x) as usize];
                let vb = self.values[(b.y * self.width + b.x) as usize];
                let diff = if va.is_finite() { va - vb } else { f64::NEG_INFINITY };
                e.max(diff)
            }
        }
    }
}

#[derive(Clone, Copy)]
struct DijkstraEntry {
    cost: f64,
    vertex: u32,
}

impl PartialEq for DijkstraEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.vertex == other.vertex
    }
}
impl Eq for DijkstraEntry {}
impl Ord for DijkstraEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, deterministic tie-break on vertex index.
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.vertex.cmp(&self.vertex))
    }
}
impl PartialOrd for DijkstraEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Backward Dijkstra from the goal, generating all any-angle successors at
/// every expansion (every free vertex with line of sight at the radius).
pub fn build_perfect_h(map: &GridMap, goal: Vertex, radius: f64, speed: f64) -> Heuristic {
    assert!(map.is_free_vertex(goal), "goal must be free");
    let n = map.vertex_count();
    let mut values = vec![f64::INFINITY; n];
    let free: Vec<Vertex> = map.free_vertices().collect();
    let goal_idx = map.vertex_index(goal);
    values[goal_idx] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(DijkstraEntry {
        cost: 0.0,
        vertex: goal_idx as u32,
    });
    let mut settled = vec![false; n];
    while let Some(entry) = heap.pop() {
        let ui = entry.vertex as usize;
        if settled[ui] || entry.cost > values[ui] {
            continue;
        }
        settled[ui] = true;
        let u = map.vertex_at(ui);
        for &w in &free {
            let wi = map.vertex_index(w);
            if settled[wi] {
                continue;
            }
            let alt = values[ui] + euclid_h(u, w, speed);
            // Cheap bound first: the los test is the expensive part.
            if alt >= values[wi] {
                continue;
            }
            if !geometry::los(u, w, radius, map) {
                continue;
            }
            values[wi] = alt;
            heap.push(DijkstraEntry {
                cost: alt,
                vertex: wi as u32,
            });
        }
    }
    Heuristic {
        kind: HeuristicKind::Perfect,
        goal,
        speed,
        width: map.width(),
        values,
    }
}

// ---------------------------------------------------------------------------
// Optional cache file for perfect-H tables
// ---------------------------------------------------------------------------

const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    map_hash: String,
    goal: [i32; 2],
    radius: f64,
    speed: f64,
    width: i32,
    /// Finite values as (vertex index, value); missing means unreachable.
    values: Vec<(u32, f64)>,
}

impl Heuristic {
    /// Write a perfect-H table to a cache file keyed by (map hash, goal,
    /// radius, speed).
    pub fn save_cache(&self, map: &GridMap, radius: f64, path: &Path) -> io::Result<()> {
        assert_eq!(self.kind, HeuristicKind::Perfect);
        let file = CacheFile {
            version: CACHE_VERSION,
            map_hash: map.content_hash(),
            goal: [self.goal.x, self.goal.y],
            radius,
            speed: self.speed,
            width: self.width,
            values: self
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .map(|(i, v)| (i as u32, *v))
                .collect(),
        };
        let mut text = serde_json::to_string(&file).expect("cache serialization");
        text.push('\n');
        std::fs::write(path, text)
    }

    /// Load a cached perfect-H table; `None` when the file does not match
    /// the requested (map, goal, radius, speed) key.
    pub fn load_cache(
        map: &GridMap,
        goal: Vertex,
        radius: f64,
        speed: f64,
        path: &Path,
    ) -> Option<Self> {
        let text = std::fs::read_to_string(path).ok()?;
        let file: CacheFile = serde_json::from_str(&text).ok()?;
        if file.version != CACHE_VERSION
            || file.map_hash != map.content_hash()
            || file.goal != [goal.x, goal.y]
            || file.radius != radius
            || file.speed != speed
        {
            return None;
        }
        let mut values = vec![f64::INFINITY; map.vertex_count()];
        for (i, v) in file.values {
            *values.get_mut(i as usize)? = v;
        }
        Some(Heuristic {
            kind: HeuristicKind::Perfect,
            goal,
            speed,
            width: file.width,
            values,
        })
    }
}
