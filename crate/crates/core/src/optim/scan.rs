use super::{sorted_unique, ArgmaxRegion, Method, OptimizerReport};
use crate::error::{Error, Result};

/// Global maximizer of a function that is constant between `breakpoints`.
///
/// Probes the midpoint of every inner interval and the two outer half-lines
/// at `±(max|b| + 1)`.
pub fn scan_1d(breakpoints: &[f64], eval: impl Fn(f64) -> f64) -> Result<OptimizerReport> {
    if breakpoints.is_empty() {
        return Err(Error::InvalidInput("scan needs at least one breakpoint".into()));
    }
    if breakpoints.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("non-finite breakpoint".into()));
    }
    let b = sorted_unique(breakpoints);
    let outer = b.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;

    let mut probes = Vec::with_capacity(b.len() + 1);
    probes.push((None, Some(b[0]), -outer));
    for w in b.windows(2) {
        probes.push((Some(w[0]), Some(w[1]), 0.5 * (w[0] + w[1])));
    }
    probes.push((b.last().copied(), None, outer));

    let mut best: Option<(f64, usize)> = None;
    for (i, &(_, _, p)) in probes.iter().enumerate() {
        let v = eval(p);
        if best.map_or(true, |(bv, _)| v > bv) {
            best = Some((v, i));
        }
    }
    let (value, i) = best.expect("at least two probes");
    let (lo, hi, point) = probes[i];
    Ok(OptimizerReport {
        point: vec![point],
        region: ArgmaxRegion::Interval { lo, hi },
        value,
        evaluations: probes.len(),
        method: Method::Scan1d,
        approximate: false,
    })
}
