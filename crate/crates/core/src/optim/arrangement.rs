use super::{ArgmaxRegion, Method, OptimizerReport};
use crate::error::{Error, Result};

/// Closed slab `lo <= b0 + coef * b1 <= hi` in the `(b0, b1)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub coef: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Slab {
    #[inline]
    pub fn contains(&self, b: &[f64]) -> bool {
        let g = b[0] + self.coef * b[1];
        self.lo <= g && g <= self.hi
    }
}

pub(crate) fn depth(slabs: &[Slab], b: &[f64]) -> usize {
    slabs.iter().filter(|s| s.contains(b)).count()
}

/// Point of maximal depth in an arrangement of slabs.
///
/// The deepest open cell is bounded by some slab edge, so every edge line is
/// swept: along it the other slabs cut out intervals, the deepest segment's
/// midpoint is pushed a little into the slab owning the line, and the actual
/// depth there is counted. O(n² log n).
pub fn vertex_sweep_2d(slabs: &[Slab]) -> Result<OptimizerReport> {
    if slabs.is_empty() {
        return Err(Error::InvalidInput("no slabs".into()));
    }
    for s in slabs {
        if !(s.coef.is_finite() && s.lo.is_finite() && s.hi.is_finite()) || s.lo >= s.hi {
            return Err(Error::InvalidInput("slab needs finite bounds with lo < hi".into()));
        }
    }
    let lines: Vec<(usize, f64, f64)> =
        slabs.iter().enumerate().flat_map(|(t, s)| [(t, s.lo, 1.0), (t, s.hi, -1.0)]).collect();

    // Upper bounds from a slope histogram let most lines be skipped: along
    // every edge line the free coordinate is the slope b1, so one set of
    // bins serves all lines.
    let bins = SlopeBins::new(slabs);
    let mut counts = vec![0i32; bins.len() + 1];
    let mut order: Vec<(usize, usize)> = lines
        .iter()
        .enumerate()
        .map(|(i, &(t, edge, _))| (i, bins.line_bound(slabs, t, edge, &mut counts)))
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut best: Option<(usize, [f64; 2])> = None;
    let mut starts = Vec::with_capacity(slabs.len());
    let mut ends = Vec::with_capacity(slabs.len());
    let mut evaluations = 0;

    for &(i, bound) in &order {
        if best.is_some_and(|(d, _)| bound <= d) {
            break;
        }
        let (t, edge, inward) = lines[i];
        let st = &slabs[t];
        // Points on the line: b1 = tau, b0 = edge - coef_t * tau.
        starts.clear();
        ends.clear();
        let mut base = 0usize;
        for su in slabs {
            let delta = su.coef - st.coef;
            if delta == 0.0 {
                if su.lo <= edge && edge <= su.hi {
                    base += 1;
                }
                continue;
            }
            let (a, b) = ((su.lo - edge) / delta, (su.hi - edge) / delta);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            starts.push(a);
            ends.push(b);
        }
        starts.sort_unstable_by(f64::total_cmp);
        ends.sort_unstable_by(f64::total_cmp);
        let (line_max, tau) = deepest_segment(base, &starts, &ends);
        if best.is_some_and(|(d, _)| line_max <= d) {
            continue;
        }
        let on_line = [edge - st.coef * tau, tau];
        let p = nudge(slabs, t, inward, on_line);
        let d = depth(slabs, &p);
        evaluations += 1;
        if best.map_or(true, |(bd, _)| d > bd) {
            best = Some((d, p));
        }
    }
    let (value, point) = best.expect("at least one line was swept");
    Ok(OptimizerReport {
        point: point.to_vec(),
        region: ArgmaxRegion::Cell,
        value: value as f64,
        evaluations,
        method: Method::VertexSweep,
        approximate: false,
    })
}

/// Deepest open segment on a line given closed intervals `[starts_i, ends_i]`
/// and `base` slabs covering the whole line. Returns (depth, midpoint).
fn deepest_segment(base: usize, starts: &[f64], ends: &[f64]) -> (usize, f64) {
    if starts.is_empty() {
        return (base, 0.0);
    }
    let mut best = (base, starts[0] - 1.0);
    let (mut i, mut j) = (0usize, 0usize);
    let n = starts.len();
    while i < n || j < n {
        let e = match (starts.get(i), ends.get(j)) {
            (Some(&s), Some(&f)) => s.min(f),
            (Some(&s), None) => s,
            (None, Some(&f)) => f,
            (None, None) => unreachable!(),
        };
        while i < n && starts[i] <= e {
            i += 1;
        }
        while j < n && ends[j] <= e {
            j += 1;
        }
        let next = match (starts.get(i), ends.get(j)) {
            (Some(&s), Some(&f)) => s.min(f),
            (Some(&s), None) => s,
            (None, Some(&f)) => f,
            (None, None) => break,
        };
        let d = base + i - j;
        if d > best.0 && next > e {
            best = (d, 0.5 * (e + next));
        }
    }
    best
}

/// Uniform slope bins between robust limits, plus one overflow bin per side.
struct SlopeBins {
    lo: f64,
    inv_width: f64,
    inner: usize,
}

impl SlopeBins {
    const INNER: usize = 2048;

    fn new(slabs: &[Slab]) -> Self {
        // Slopes between consecutive slab centres give the spread of
        // plausible line slopes.
        let mut slopes: Vec<f64> = slabs
            .windows(2)
            .filter(|w| w[0].coef != w[1].coef)
            .map(|w| (0.5 * (w[1].lo + w[1].hi) - 0.5 * (w[0].lo + w[0].hi)) / (w[1].coef - w[0].coef))
            .filter(|v| v.is_finite())
            .collect();
        slopes.sort_unstable_by(f64::total_cmp);
        let (lo, hi) = if slopes.len() >= 4 {
            (slopes[slopes.len() / 20], slopes[slopes.len() - 1 - slopes.len() / 20])
        } else {
            (-1.0, 1.0)
        };
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
        SlopeBins { lo, inv_width: Self::INNER as f64 / (hi - lo), inner: Self::INNER }
    }

    fn len(&self) -> usize {
        self.inner + 2
    }

    /// Monotone in `tau`; 0 and `inner + 1` are the overflow bins.
    fn index(&self, tau: f64) -> usize {
        let u = (tau - self.lo) * self.inv_width;
        if u < 0.0 {
            0
        } else if u >= self.inner as f64 {
            self.inner + 1
        } else {
            1 + u as usize
        }
    }

    /// Upper bound on the depth of any point of the edge line `b0 + coef_t b1 = edge`.
    fn line_bound(&self, slabs: &[Slab], t: usize, edge: f64, counts: &mut [i32]) -> usize {
        counts.iter_mut().for_each(|c| *c = 0);
        let ct = slabs[t].coef;
        let mut base = 0usize;
        for su in slabs {
            let delta = su.coef - ct;
            if delta == 0.0 {
                if su.lo <= edge && edge <= su.hi {
                    base += 1;
                }
                continue;
            }
            let (a, b) = ((su.lo - edge) / delta, (su.hi - edge) / delta);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            counts[self.index(a)] += 1;
            counts[self.index(b) + 1] -= 1;
        }
        let mut run = 0i32;
        let mut top = 0i32;
        for c in &counts[..self.len()] {
            run += c;
            top = top.max(run);
        }
        base + top as usize
    }
}

/// Moves `p` from the edge of slab `t` into its interior, by less than the
/// distance to any other edge line that does not pass through `p`.
fn nudge(slabs: &[Slab], t: usize, inward: f64, p: [f64; 2]) -> [f64; 2] {
    let st = slabs[t];
    let norm = (1.0 + st.coef * st.coef).sqrt();
    let dir = [inward / norm, inward * st.coef / norm];
    let scale = 1.0 + p[0].abs() + p[1].abs();
    let mut step = 0.5 * (st.hi - st.lo) / norm;
    for su in slabs {
        let rate = dir[0] + su.coef * dir[1];
        if rate == 0.0 {
            continue;
        }
        let g = p[0] + su.coef * p[1];
        for edge in [su.lo, su.hi] {
            let s = (edge - g) / rate;
            if s > 1e-12 * scale {
                step = step.min(0.5 * s);
            }
        }
    }
    [p[0] + step * dir[0], p[1] + step * dir[1]]
}
