use std::f64::consts::{FRAC_PI_2, TAU};

use super::{sorted_unique, ArgmaxRegion, Method, OptimizerReport, DEDUP_TOL};
use crate::error::{Error, Result};

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        r - TAU
    } else {
        r
    }
}

fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

/// Sorted distinct critical angles in `[0, 2pi)`, merging across the wrap.
fn arcs_from(critical: &[f64]) -> Vec<f64> {
    let wrapped: Vec<f64> = critical.iter().map(|&a| wrap(a)).collect();
    let mut a = sorted_unique(&wrapped);
    if a.len() > 1 && a[0] + TAU - a[a.len() - 1] <= DEDUP_TOL {
        a.pop();
    }
    a
}

/// Arc `j` runs from `a[j]` to `a[j+1]` (the last one wraps).
fn arc_bounds(a: &[f64], j: usize) -> (f64, f64) {
    let start = a[j];
    let end = if j + 1 < a.len() { a[j + 1] } else { a[0] + TAU };
    (start, end)
}

fn better(value: f64, mid: f64, best: Option<(f64, f64, usize)>) -> bool {
    match best {
        None => true,
        Some((bv, bm, _)) => value > bv || (value == bv && mid < bm),
    }
}

/// Maximizes `eval` over S¹ when it is constant on the open arcs between
/// `critical` angles. Ties go to the smallest midpoint angle in `[0, 2pi)`.
pub fn angle_sweep_s1(critical: &[f64], eval: impl Fn(&[f64]) -> f64) -> Result<OptimizerReport> {
    if critical.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidInput("non-finite critical angle".into()));
    }
    let a = arcs_from(critical);
    if a.is_empty() {
        let p = unit(0.0);
        return Ok(OptimizerReport {
            value: eval(&p),
            point: p.to_vec(),
            region: ArgmaxRegion::Arc { start: 0.0, end: TAU },
            evaluations: 1,
            method: Method::AngleSweep,
            approximate: false,
        });
    }
    let mut best: Option<(f64, f64, usize)> = None;
    for j in 0..a.len() {
        let (s, e) = arc_bounds(&a, j);
        let mid = wrap(0.5 * (s + e));
        let v = eval(&unit(mid));
        if better(v, mid, best) {
            best = Some((v, mid, j));
        }
    }
    let (value, mid, j) = best.unwrap();
    let (start, end) = arc_bounds(&a, j);
    Ok(OptimizerReport {
        point: unit(mid).to_vec(),
        region: ArgmaxRegion::Arc { start, end },
        value,
        evaluations: a.len(),
        method: Method::AngleSweep,
        approximate: false,
    })
}

/// `theta -> sum_t w_t 1{v_t' theta >= 0}` on S¹, maximized by an
/// O(n log n) rotating sweep.
#[derive(Debug, Clone)]
pub struct HalfPlaneSum {
    vectors: Vec<[f64; 2]>,
    weights: Vec<f64>,
    /// Total weight of zero vectors, which count for every theta.
    constant: f64,
}

impl HalfPlaneSum {
    pub fn new(vectors: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if vectors.len() != weights.len() {
            return Err(Error::InvalidInput("vectors and weights differ in length".into()));
        }
        if vectors.iter().flatten().chain(&weights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite input to half-plane sum".into()));
        }
        let mut v = Vec::with_capacity(vectors.len());
        let mut w = Vec::with_capacity(vectors.len());
        let mut constant = 0.0;
        for (x, wt) in vectors.into_iter().zip(weights) {
            if wt == 0.0 {
                continue;
            }
            if x == [0.0, 0.0] {
                constant += wt;
            } else {
                v.push(x);
                w.push(wt);
            }
        }
        Ok(HalfPlaneSum { vectors: v, weights: w, constant })
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        let mut s = self.constant;
        for (x, w) in self.vectors.iter().zip(&self.weights) {
            if x[0] * theta[0] + x[1] * theta[1] >= 0.0 {
                s += w;
            }
        }
        s
    }

    /// Angles where some indicator switches.
    pub fn critical_angles(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.vectors.len());
        for x in &self.vectors {
            let phi = x[1].atan2(x[0]);
            out.push(phi - FRAC_PI_2);
            out.push(phi + FRAC_PI_2);
        }
        out
    }

    pub fn maximize(&self) -> Result<OptimizerReport> {
        if self.vectors.is_empty() {
            return Err(Error::DegenerateData("all regressor vectors are zero or carry no weight".into()));
        }
        // (angle, delta) events: entering at phi - pi/2, leaving at phi + pi/2.
        let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * self.vectors.len());
        for (x, &w) in self.vectors.iter().zip(&self.weights) {
            let phi = x[1].atan2(x[0]);
            events.push((wrap(phi - FRAC_PI_2), w));
            events.push((wrap(phi + FRAC_PI_2), -w));
        }
        events.sort_by(|p, q| p.0.total_cmp(&q.0));

        // Group events into distinct angles with their net delta.
        let mut angles: Vec<f64> = Vec::new();
        let mut deltas: Vec<f64> = Vec::new();
        for (a, d) in events {
            match angles.last() {
                Some(&last) if a - last <= DEDUP_TOL => *deltas.last_mut().unwrap() += d,
                _ => {
                    angles.push(a);
                    deltas.push(d);
                }
            }
        }
        if angles.len() > 1 && angles[0] + TAU - angles[angles.len() - 1] <= DEDUP_TOL {
            let d = deltas.pop().unwrap();
            angles.pop();
            deltas[0] += d;
        }

        let k = angles.len();
        let (s0, e0) = arc_bounds(&angles, 0);
        let mid0 = wrap(0.5 * (s0 + e0));
        // Compensated running sum keeps drift away from exact ties.
        let mut value = self.eval(&unit(mid0));
        let mut comp = 0.0;
        let mut best = Some((value, mid0, 0usize));
        for j in 1..k {
            let t = value + deltas[j];
            if value.abs() >= deltas[j].abs() {
                comp += (value - t) + deltas[j];
            } else {
                comp += (deltas[j] - t) + value;
            }
            value = t;
            let (s, e) = arc_bounds(&angles, j);
            let mid = wrap(0.5 * (s + e));
            if better(value + comp, mid, best) {
                best = Some((value + comp, mid, j));
            }
        }
        let (_, mid, j) = best.unwrap();
        let (start, end) = arc_bounds(&angles, j);
        let point = unit(mid);
        Ok(OptimizerReport {
            value: self.eval(&point),
            point: point.to_vec(),
            region: ArgmaxRegion::Arc { start, end },
            evaluations: k + 1,
            method: Method::AngleSweep,
            approximate: false,
        })
    }
}
