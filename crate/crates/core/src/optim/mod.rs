//! Exact and approximate maximizers for piecewise-constant criteria.
//!
//! Tie-breaking everywhere: the leftmost maximizing region wins and its
//! midpoint is reported.

mod arrangement;
mod refine;
mod scan;
mod sweep;
mod window;

pub use arrangement::{vertex_sweep_2d, Slab};
pub use refine::{grid_refine, RefineOptions};
pub use scan::scan_1d;
pub use sweep::{angle_sweep_s1, HalfPlaneSum};
pub use window::{max_weighted_window, WeightedPoints};

use serde::{Deserialize, Serialize};

/// Breakpoints closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Scan1d,
    AngleSweep,
    VertexSweep,
    SlidingWindow,
    GridRefine,
    PairwiseSlopes,
    ConcaveMajorant,
}

/// Shape of the maximizing region the reported point was taken from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArgmaxRegion {
    /// Open interval; `None` marks an unbounded end.
    Interval { lo: Option<f64>, hi: Option<f64> },
    /// Open arc of S¹ from `start` to `end` (radians, `end` may exceed 2pi).
    Arc { start: f64, end: f64 },
    /// Open cell of a line arrangement.
    Cell,
    /// Closed window `[lo, hi]` of covered points.
    Window { lo: f64, hi: f64 },
    /// Isolated point (grid node).
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub point: Vec<f64>,
    pub region: ArgmaxRegion,
    pub value: f64,
    pub evaluations: usize,
    pub method: Method,
    /// Set when the optimizer is not guaranteed to find the global maximum.
    pub approximate: bool,
}

/// Sorts and merges values closer than [`DEDUP_TOL`].
pub(crate) fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&last) if x - last <= DEDUP_TOL => {}
            _ => out.push(x),
        }
    }
    out
}
