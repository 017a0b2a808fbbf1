//! Safe-interval tables: the complete enumeration of (vertex, interval)
//! search states, built up front from the obstacle plans.

use crate::geometry::{self, MotionSegment, TimeInterval};
use crate::world::{ProblemInstance, Vertex};

/// Index of a search state (one (vertex, interval) pair) in the table.
pub type StateId = u32;

/// Per-vertex sorted disjoint safe intervals for a whole instance.
///
/// Each vertex's intervals are the exact complement in `[0, inf)` of the
/// union of its occupation intervals over all obstacles. With zero obstacles
/// every free vertex holds exactly `[0, inf)`. A vertex permanently covered
/// by a parked obstacle simply has no states.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    /// Flat interval storage; states of one vertex are contiguous.
    intervals: Vec<TimeInterval>,
    /// Vertex index -> range start into `intervals`; length = vertices + 1.
    offsets: Vec<u32>,
    /// State -> vertex (as a vertex index).
    state_vertex: Vec<u32>,
    width: i32,
}

impl SafeIntervalTable {
    /// Total number of search states.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval(&self, state: StateId) -> TimeInterval {
        self.intervals[state as usize]
    }

    pub fn vertex(&self, state: StateId) -> Vertex {
        let vi = self.state_vertex[state as usize] as i32;
        Vertex::new(vi % self.width, vi / self.width)
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.len() as StateId
    }

    /// State ids of one vertex, in ascending interval order.
    pub fn states_at(&self, v: Vertex) -> std::ops::Range<StateId> {
        let vi = (v.y * self.width + v.x) as usize;
        self.offsets[vi]..self.offsets[vi + 1]
    }

    /// The unique state whose interval contains `t`, if any.
    pub fn state_at(&self, v: Vertex, t: f64) -> Option<StateId> {
        let range = self.states_at(v);
        let base = range.start as usize;
        let slice = &self.intervals[base..range.end as usize];
        // First interval ending at or after t; it is the only candidate.
        let idx = slice.partition_point(|iv| iv.high < t);
        let candidate = slice.get(idx)?;
        candidate.contains(t).then_some((base + idx) as StateId)
    }

    /// Structured text dump (one line per vertex with states) for golden
    /// tests: `(x, y): [lo, hi] [lo, inf)`.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let mut last_vertex = u32::MAX;
        for s in self.states() {
            let vi = self.state_vertex[s as usize];
            if vi != last_vertex {
                if last_vertex != u32::MAX {
                    out.push('\n');
                }
                let v = self.vertex(s);
                let _ = write!(out, "({}, {}):", v.x, v.y);
                last_vertex = vi;
            }
            let iv = self.interval(s);
            if iv.is_unbounded() {
                let _ = write!(out, " [{:.6}, inf)", iv.low);
            } else {
                let _ = write!(out, " [{:.6}, {:.6}]", iv.low, iv.high);
            }
        }
        if last_vertex != u32::MAX {
            out.push('\n');
        }
        out
    }
}

/// Build the complete safe-interval table for an instance.
pub fn build_safe_intervals(instance: &ProblemInstance) -> SafeIntervalTable {
    let map = &instance.map;
    let obstacles: Vec<(Vec<MotionSegment>, f64)> = instance
        .obstacles
        .iter()
        .map(|o| {
            (
                geometry::decompose(o),
                instance.agent_radius + o.radius,
            )
        })
        .collect();

    let mut intervals = Vec::new();
    let mut offsets = Vec::with_capacity(map.vertex_count() + 1);
    let mut state_vertex = Vec::new();
    offsets.push(0u32);
    for vi in 0..map.vertex_count() {
        let v = map.vertex_at(vi);
        if map.is_free_vertex(v) {
            let safe = safe_intervals_at(v, &obstacles);
            for iv in safe {
                intervals.push(iv);
                state_vertex.push(vi as u32);
            }
        }
        offsets.push(intervals.len() as u32);
    }
    SafeIntervalTable {
        intervals,
        offsets,
        state_vertex,
        width: map.width(),
    }
}

fn safe_intervals_at(
    v: Vertex,
    obstacles: &[(Vec<MotionSegment>, f64)],
) -> Vec<TimeInterval> {
    let mut raw = Vec::new();
    for (segments, r) in obstacles {
        for iv in geometry::vertex_unsafe_intervals_for_segments(v, segments, *r) {
            raw.push((iv.low, iv.high));
        }
    }
    let merged = geometry::merge_intervals(raw);
    geometry::complement_intervals(&merged)
}
