use super::{ArgmaxRegion, Method, OptimizerReport};
use crate::error::{Error, Result};
use crate::gridset::{linspace, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub points_per_axis: usize,
    pub levels: usize,
    pub shrink: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { points_per_axis: 21, levels: 3, shrink: 0.2 }
    }
}

/// Multi-level grid search: each level re-centres a box `shrink` times the
/// previous size on the best node, clipped to the original box.
pub fn grid_refine(
    eval: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    opts: RefineOptions,
) -> Result<OptimizerReport> {
    let d = lo.len();
    if d == 0 || hi.len() != d {
        return Err(Error::InvalidInput("box bounds must be nonempty and of equal length".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
        return Err(Error::InvalidInput("box bounds must be finite with lo < hi".into()));
    }
    if opts.points_per_axis < 2 || opts.levels == 0 || !(opts.shrink > 0.0 && opts.shrink < 1.0) {
        return Err(Error::InvalidInput("invalid refinement options".into()));
    }
    let mut cur_lo = lo.to_vec();
    let mut cur_hi = hi.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    for _ in 0..opts.levels {
        let axes: Vec<Vec<f64>> =
            (0..d).map(|k| linspace(cur_lo[k], cur_hi[k], opts.points_per_axis)).collect::<Result<_>>()?;
        let grid = Grid::new(axes)?;
        for i in 0..grid.len() {
            let p = grid.node(i);
            let v = eval(&p);
            evaluations += 1;
            if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                best = Some((v, p));
            }
        }
        let centre = &best.as_ref().unwrap().1;
        for k in 0..d {
            let half = 0.5 * opts.shrink * (cur_hi[k] - cur_lo[k]);
            cur_lo[k] = (centre[k] - half).max(lo[k]);
            cur_hi[k] = (centre[k] + half).min(hi[k]);
            if cur_hi[k] <= cur_lo[k] {
                cur_hi[k] = cur_lo[k] + f64::EPSILON.max(1e-12 * half);
            }
        }
    }
    let (value, point) = best.unwrap();
    Ok(OptimizerReport {
        point,
        region: ArgmaxRegion::Point,
        value,
        evaluations,
        method: Method::GridRefine,
        approximate: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_peak_at_grid_node() {
        let r = grid_refine(|t| -(t[0] * t[0] + t[1] * t[1]), &[-1.0, -1.0], &[1.0, 1.0], RefineOptions::default()).unwrap();
        assert_eq!(r.point, vec![0.0, 0.0]);
        assert!(r.approximate);
    }

    #[test]
    fn plateau_value() {
        let f = |t: &[f64]| if t[0] > 0.3 && t[0] < 0.6 { 2.0 } else { 0.0 };
        let r = grid_refine(f, &[0.0], &[1.0], RefineOptions::default()).unwrap();
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn smooth_concave_vs_dense_grid() {
        let f = |t: &[f64]| -((t[0] - 0.237).powi(2) + 2.0 * (t[1] + 0.411).powi(2) + 0.5 * (t[0] - 0.237) * (t[1] + 0.411));
        let r = grid_refine(f, &[-1.0, -1.0], &[1.0, 1.0], RefineOptions::default()).unwrap();
        let m = 1000;
        let mut dense = f64::NEG_INFINITY;
        for i in 0..m {
            for j in 0..m {
                let p = [-1.0 + 2.0 * i as f64 / (m - 1) as f64, -1.0 + 2.0 * j as f64 / (m - 1) as f64];
                dense = dense.max(f(&p));
            }
        }
        assert!(r.value >= dense - 1e-2);
    }
}
