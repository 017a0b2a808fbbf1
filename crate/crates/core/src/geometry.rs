//! Radius-aware line of sight over the grid and closed-form continuous-time
//! collision computations between disks moving piecewise-linearly.
//!
//! Collision is strict interior overlap: distance < R collides, distance = R
//! is safe. Every operation returning interval lists yields them sorted,
//! disjoint and minimal.

use crate::world::{GridMap, MotionPlan, Vertex};
use crate::TOL;

/// A 2D point or vector in cell units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(&self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn add(&self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    fn dot(&self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn norm_sq(&self) -> f64 {
        self.dot(*self)
    }
}

/// A closed time interval; `high` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub low: f64,
    pub high: f64,
}

impl TimeInterval {
    pub fn new(low: f64, high: f64) -> Self {
        debug_assert!(low <= high);
        TimeInterval { low, high }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.low && t <= self.high
    }

    pub fn is_unbounded(&self) -> bool {
        self.high.is_infinite()
    }
}

/// One piece of a piecewise-linear trajectory: `pos(t) = origin + velocity *
/// (t - window.low)` for `t` in `window`.
#[derive(Debug, Clone, Copy)]
pub struct MotionSegment {
    pub origin: Point,
    pub velocity: Point,
    pub window: TimeInterval,
}

impl MotionSegment {
    pub fn position_at(&self, t: f64) -> Point {
        self.origin.add(self.velocity.scale(t - self.window.low))
    }
}

/// Decompose a plan into contiguous segments covering `[0, inf)`: a parked
/// head if the first action starts after 0, one segment per action, and an
/// unbounded parked tail.
pub fn decompose(plan: &MotionPlan) -> Vec<MotionSegment> {
    let mut segs = Vec::with_capacity(plan.actions.len() + 2);
    let first_start = plan.actions.first().map_or(0.0, |a| a.start);
    if first_start > TOL {
        segs.push(MotionSegment {
            origin: plan.start.point(),
            velocity: Point::new(0.0, 0.0),
            window: TimeInterval::new(0.0, first_start),
        });
    }
    for a in &plan.actions {
        let p = a.source.point();
        let q = a.target.point();
        let velocity = match a.kind {
            crate::world::ActionKind::Wait => Point::new(0.0, 0.0),
            crate::world::ActionKind::Move => q.sub(p).scale(1.0 / a.duration),
        };
        segs.push(MotionSegment {
            origin: p,
            velocity,
            window: TimeInterval::new(a.start, a.end()),
        });
    }
    segs.push(MotionSegment {
        origin: plan.final_vertex().point(),
        velocity: Point::new(0.0, 0.0),
        window: TimeInterval::new(plan.end_time(), f64::INFINITY),
    });
    segs
}

// ---------------------------------------------------------------------------
// Exact segment/square distances
// ---------------------------------------------------------------------------

fn point_segment_dist_sq(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len_sq = ab.norm_sq();
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (p.sub(a).dot(ab) / len_sq).clamp(0.0, 1.0)
    };
    p.sub(a.add(ab.scale(t))).norm_sq()
}

fn orient(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segment_segment_dist_sq(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_properly_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist_sq(a, c, d)
        .min(point_segment_dist_sq(b, c, d))
        .min(point_segment_dist_sq(c, a, b))
        .min(point_segment_dist_sq(d, a, b))
}

/// Squared distance from segment `ab` to the solid unit square centered at
/// cell `(cx, cy)`. Zero when they overlap.
fn segment_square_dist_sq(a: Point, b: Point, cx: i32, cy: i32) -> f64 {
    let lo = Point::new(cx as f64 - 0.5, cy as f64 - 0.5);
    let hi = Point::new(cx as f64 + 0.5, cy as f64 + 0.5);
    let inside =
        |p: Point| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    if inside(a) || inside(b) {
        return 0.0;
    }
    let c0 = lo;
    let c1 = Point::new(hi.x, lo.y);
    let c2 = hi;
    let c3 = Point::new(lo.x, hi.y);
    segment_segment_dist_sq(a, b, c0, c1)
        .min(segment_segment_dist_sq(a, b, c1, c2))
        .min(segment_segment_dist_sq(a, b, c2, c3))
        .min(segment_segment_dist_sq(a, b, c3, c0))
}

/// Line-of-sight check: true iff the disk of the given radius can slide along
/// the segment `u -> v` without its interior overlapping any blocked cell.
/// Out-of-bounds cells count as blocked; tangency at exactly `radius` is
/// allowed.
pub fn los(u: Vertex, v: Vertex, radius: f64, map: &GridMap) -> bool {
    let a = u.point();
    let b = v.point();
    let thr = (radius - TOL).max(0.0);
    let thr_sq = thr * thr;
    // Cells whose square intersects the segment's bounding box inflated by
    // radius (one extra cell of slack costs little and dodges edge rounding).
    let x0 = (a.x.min(b.x) - radius).floor() as i32 - 1;
    let x1 = (a.x.max(b.x) + radius).ceil() as i32 + 1;
    let y0 = (a.y.min(b.y) - radius).floor() as i32 - 1;
    let y1 = (a.y.max(b.y) + radius).ceil() as i32 + 1;
    for cy in y0..=y1 {
        for cx in x0..=x1 {
            if !map.is_blocked(cx, cy) {
                continue;
            }
            if segment_square_dist_sq(a, b, cx, cy) < thr_sq {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Interval assembly helpers
// ---------------------------------------------------------------------------

/// Sort raw `(low, high)` pairs and merge overlapping or touching ones
/// (within tolerance) into a minimal disjoint union.
pub(crate) fn merge_intervals(mut raw: Vec<(f64, f64)>) -> Vec<TimeInterval> {
    raw.retain(|&(lo, hi)| hi - lo > 0.0);
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<TimeInterval> = Vec::new();
    for (lo, hi) in raw {
        match out.last_mut() {
            Some(last) if lo <= last.high + TOL => {
                last.high = last.high.max(hi);
            }
            _ => out.push(TimeInterval::new(lo, hi)),
        }
    }
    out
}

/// Complement of a sorted disjoint interval union within `[0, inf)`,
/// dropping slivers shorter than the tolerance.
pub(crate) fn complement_intervals(unsafe_iv: &[TimeInterval]) -> Vec<TimeInterval> {
    let mut out = Vec::with_capacity(unsafe_iv.len() + 1);
    let mut cursor = 0.0;
    for iv in unsafe_iv {
        let lo = iv.low.max(0.0);
        if lo - cursor > TOL {
            out.push(TimeInterval::new(cursor, lo));
        }
        cursor = cursor.max(iv.high);
        if cursor.is_infinite() {
            return out;
        }
    }
    out.push(TimeInterval::new(cursor, f64::INFINITY));
    out
}

fn push_quadratic_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    // Solve a t^2 + b t + c = 0.
    if a.abs() < 1e-14 {
        if b.abs() > 1e-14 {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    out.push((-b - sq) / (2.0 * a));
    out.push((-b + sq) / (2.0 * a));
}

// ---------------------------------------------------------------------------
// Vertex occupation intervals
// ---------------------------------------------------------------------------

/// The exact set of times at which an agent parked at `v` would overlap the
/// obstacle: `{t >= 0 : |obstacle(t) - v| < R}` with `R` the combined radius.
pub fn vertex_unsafe_intervals(
    v: Vertex,
    obstacle: &MotionPlan,
    agent_radius: f64,
) -> Vec<TimeInterval> {
    let segments = decompose(obstacle);
    vertex_unsafe_intervals_for_segments(v, &segments, agent_radius + obstacle.radius)
}

pub(crate) fn vertex_unsafe_intervals_for_segments(
    v: Vertex,
    segments: &[MotionSegment],
    combined_radius: f64,
) -> Vec<TimeInterval> {
    let p = v.point();
    let r_sq = combined_radius * combined_radius;
    let mut raw = Vec::new();
    for seg in segments {
        // |(origin - p) + w * s|^2 < R^2 with s = t - window.low.
        let c0 = seg.origin.sub(p);
        let w = seg.velocity;
        let a = w.norm_sq();
        if a == 0.0 {
            if c0.norm_sq() < r_sq {
                raw.push((seg.window.low, seg.window.high));
            }
            continue;
        }
        let b = 2.0 * c0.dot(w);
        let c = c0.norm_sq() - r_sq;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let s0 = (-b - sq) / (2.0 * a);
        let s1 = (-b + sq) / (2.0 * a);
        let span = seg.window.high - seg.window.low;
        let lo = s0.max(0.0);
        let hi = s1.min(span);
        if hi > lo {
            raw.push((seg.window.low + lo, seg.window.low + hi));
        }
    }
    let merged = merge_intervals(raw);
    merged
        .into_iter()
        .filter(|iv| iv.low < f64::INFINITY)
        .map(|iv| TimeInterval::new(iv.low.max(0.0), iv.high))
        .filter(|iv| iv.high - iv.low > TOL)
        .collect()
}

// ---------------------------------------------------------------------------
// Departure intervals for a traversal
// ---------------------------------------------------------------------------

/// The set of departure times `d >= 0` for which an agent traversing
/// `u -> v` during `[d, d + |uv|/speed]` comes strictly within the combined
/// radius of the obstacle at some instant.
pub fn unsafe_departure_intervals(
    u: Vertex,
    v: Vertex,
    speed: f64,
    obstacle: &MotionPlan,
    agent_radius: f64,
) -> Vec<TimeInterval> {
    assert!(u != v, "departure intervals require a real traversal");
    let segments = decompose(obstacle);
    let traversal = Traversal::new(u, v, speed);
    let mut raw = Vec::new();
    for seg in &segments {
        collect_segment_departures(
            &traversal,
            seg,
            agent_radius + obstacle.radius,
            None,
            &mut raw,
        );
    }
    merge_intervals(raw)
        .into_iter()
        .map(|iv| TimeInterval::new(iv.low.max(0.0), iv.high))
        .filter(|iv| iv.high - iv.low > 0.0)
        .collect()
}

/// Agent traversal `u -> v` at constant speed, parameterized by departure
/// time `d`: position(t) = u + vel * (t - d) for t in [d, d + duration].
pub(crate) struct Traversal {
    pub origin: Point,
    pub vel: Point,
    pub duration: f64,
}

impl Traversal {
    pub(crate) fn new(u: Vertex, v: Vertex, speed: f64) -> Self {
        let p = u.point();
        let q = v.point();
        let len = p.distance(q);
        Traversal {
            origin: p,
            vel: q.sub(p).scale(speed / len),
            duration: len / speed,
        }
    }
}

/// Minimum over the valid time window of `|agent(t) - obstacle(t)|^2 - R^2`
/// for a fixed departure `d`, or `None` when the windows do not overlap.
fn window_min_gap_sq(tr: &Traversal, seg: &MotionSegment, r_sq: f64, d: f64) -> Option<f64> {
    let lo = d.max(seg.window.low);
    let hi = (d + tr.duration).min(seg.window.high);
    if lo > hi {
        return None;
    }
    // D(t) = C + E t - V d  with C = u - o + w*s0, E = V - w.
    let c = tr
        .origin
        .sub(seg.origin)
        .add(seg.velocity.scale(seg.window.low))
        .sub(tr.vel.scale(d));
    let e = tr.vel.sub(seg.velocity);
    let a = e.norm_sq();
    let eval = |t: f64| c.add(e.scale(t)).norm_sq() - r_sq;
    if a == 0.0 {
        return Some(eval(lo));
    }
    let t_star = (-c.dot(e) / a).clamp(lo, hi);
    Some(eval(t_star))
}

/// Collect raw unsafe departure ranges contributed by one obstacle segment.
///
/// The relative position is affine in `(t, d)`, so `dist^2 < R^2` is a conic
/// region in that plane. Its projection onto the `d` axis, clipped by the
/// window constraints `t in [max(d, s0), min(d + T, s1)]`, has boundaries
/// among the roots of at most five quadratics in `d` (the interior-minimum
/// curve plus the four window edges). We gather every candidate breakpoint
/// and classify each resulting sub-range by one exact fixed-`d` evaluation at
/// its midpoint.
///
/// `clip` restricts the reported departure domain; ranges that continue past
/// the clip are truncated at its end, so a caller scanning for the first
/// safe departure inside the clip stays correct.
pub(crate) fn collect_segment_departures(
    tr: &Traversal,
    seg: &MotionSegment,
    combined_radius: f64,
    clip: Option<(f64, f64)>,
    raw: &mut Vec<(f64, f64)>,
) {
    let r_sq = combined_radius * combined_radius;
    let s0 = seg.window.low;
    let s1 = seg.window.high;
    let t_dur = tr.duration;

    // Departures with any window overlap at all.
    let mut d_min = (s0 - t_dur).max(0.0);
    let mut d_cap = f64::INFINITY;
    if let Some((lo, hi)) = clip {
        d_min = d_min.max(lo);
        d_cap = hi;
    }
    if s1 < d_min || d_cap < d_min {
        return;
    }

    // Base vector K = u - o + w*s0; D(t, d) = K + E t - V d.
    let k = tr
        .origin
        .sub(seg.origin)
        .add(seg.velocity.scale(s0));
    let e = tr.vel.sub(seg.velocity);
    let v = tr.vel;
    let w = seg.velocity;

    let mut cands: Vec<f64> = vec![d_min, s0 - t_dur, s0, s0 + t_dur];
    if s1.is_finite() {
        cands.extend([s1, s1 - t_dur]);
    }

    // Quadratic in d for |P + Q d|^2 = R^2.
    let push_conic = |p: Point, q: Point, cands: &mut Vec<f64>| {
        push_quadratic_roots(q.norm_sq(), 2.0 * p.dot(q), p.norm_sq() - r_sq, cands);
    };

    let e_sq = e.norm_sq();
    if e_sq > 0.0 {
        // Interior minimum: t*(d) = alpha d + beta.
        let alpha = v.dot(e) / e_sq;
        let beta = -k.dot(e) / e_sq;
        push_conic(
            k.add(e.scale(beta)),
            e.scale(alpha).sub(v),
            &mut cands,
        );
        // Where t*(d) crosses each window edge.
        if (1.0 - alpha).abs() > 1e-14 {
            cands.push(beta / (1.0 - alpha)); // t* = d
            cands.push((beta - t_dur) / (1.0 - alpha)); // t* = d + T
        }
        if alpha.abs() > 1e-14 {
            cands.push((s0 - beta) / alpha); // t* = s0
            if s1.is_finite() {
                cands.push((s1 - beta) / alpha); // t* = s1
            }
        }
    }
    // Window-edge curves: t = d, t = d + T, t = s0, t = s1.
    // Along t = d (and t = d + T) the d-coefficient is E - V = -W.
    push_conic(k, w.scale(-1.0), &mut cands); // t = d
    push_conic(k.add(e.scale(t_dur)), w.scale(-1.0), &mut cands); // t = d + T
    push_conic(k.add(e.scale(s0)), v.scale(-1.0), &mut cands); // t = s0
    if s1.is_finite() {
        push_conic(k.add(e.scale(s1)), v.scale(-1.0), &mut cands);
    }

    let d_max = s1.min(d_cap);
    let mut points: Vec<f64> = cands
        .into_iter()
        .filter(|d| d.is_finite() && *d >= d_min - TOL && *d <= d_max)
        .collect();
    points.push(d_min);
    if d_max.is_finite() {
        points.push(d_max);
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let unsafe_at = |d: f64| -> bool {
        matches!(window_min_gap_sq(tr, seg, r_sq, d), Some(g) if g < 0.0)
    };

    for pair in points.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        if unsafe_at(0.5 * (lo + hi)) {
            raw.push((lo, hi));
        }
    }
    if d_max.is_infinite() {
        // Beyond the last breakpoint the classification is constant.
        let last = *points.last().unwrap_or(&d_min);
        if unsafe_at(last + 1.0) {
            raw.push((last, f64::INFINITY));
        }
    }
}
