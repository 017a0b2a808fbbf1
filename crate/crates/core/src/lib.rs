//! Time-optimal any-angle path planning on grids with moving disk obstacles.
//!
//! The agent and every obstacle are disks travelling between cell centers at
//! constant speed along straight segments, with obstacle trajectories known in
//! advance. The library provides:
//!
//! - [`world`]: grid maps, motion plans, problem instances and all file I/O
//! - [`geometry`]: radius-aware line of sight and closed-form collision
//!   intervals between an agent traversal and a moving obstacle
//! - [`intervals`]: safe-interval tables enumerating the whole search space
//! - [`heuristics`]: Euclidean and precomputed static any-angle estimates
//! - [`planners`]: the greedy any-angle SIPP baseline plus two provably
//!   time-optimal planners (naive all-successors and inverted expansion)
//! - [`harness`]: plan validation, scenario generation, batch benchmarking
//!   and SVG rendering

pub mod geometry;
pub mod harness;
pub mod heuristics;
pub mod intervals;
pub mod planners;
pub mod world;

/// Absolute tolerance used for all time/length comparisons.
pub const TOL: f64 = 1e-9;
