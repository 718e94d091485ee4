//! Level-set estimator for binary choice with an interval-observed regressor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthRule;
use crate::error::{Error, Result};
use crate::gridset::{Grid, GridSet};
use crate::kernel::Kernel;
use crate::sample::TimeSeriesSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetEstimate {
    pub set: GridSet,
    pub cutoff: f64,
    /// `cutoff * n^{-1/2}`: nodes within this of the maximum are kept.
    pub threshold: f64,
    pub max_value: f64,
    /// Criterion at each grid node.
    pub values: Vec<f64>,
}

/// Nadaraya-Watson fit of `y` at every row, product Epanechnikov kernel with
/// one bandwidth for all regressors (observation itself included).
pub fn nadaraya_watson(y: &[f64], regressors: &[&[f64]], h: f64) -> Vec<f64> {
    let k = Kernel::default();
    let n = y.len();
    (0..n)
        .into_par_iter()
        .map(|t| {
            let (mut num, mut den) = (0.0, 0.0);
            for s in 0..n {
                let mut w = 1.0;
                for r in regressors {
                    w *= k.eval((r[t] - r[s]) / h);
                    if w == 0.0 {
                        break;
                    }
                }
                num += w * y[s];
                den += w;
            }
            num / den
        })
        .collect()
}

fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Level set `{theta : max S_n - S_n(theta) <= c n^{-1/2}}` of
/// `S_n(theta) = P_n (y - 1/2)[1{q > 1/2} sgn(x theta + w_u) + 1{q <= 1/2} sgn(x theta + w_l)]`
/// with `q` the kernel regression of `y` on `(x, w_l, w_u)`.
/// The default cutoff is `log n`.
pub fn manski_tamer_set(
    sample: &TimeSeriesSample,
    grid: &Grid,
    nuisance: BandwidthRule,
    cutoff: Option<f64>,
) -> Result<SetEstimate> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("the interval-regressor model has a scalar parameter".into()));
    }
    nuisance.validate()?;
    let (y, x, wl, wu) = (sample.column("y")?, sample.column("x")?, sample.column("w_l")?, sample.column("w_u")?);
    let n = sample.n();
    let cutoff = cutoff.unwrap_or((n as f64).ln());
    if !(cutoff >= 0.0) {
        return Err(Error::InvalidInput(format!("cutoff must be nonnegative, got {cutoff}")));
    }
    let q = nadaraya_watson(y, &[x, wl, wu], nuisance.at(n));
    let upper: Vec<bool> = q.iter().map(|&q| q > 0.5).collect();
    let values: Vec<f64> = grid
        .axes()[0]
        .par_iter()
        .map(|&theta| {
            let mut acc = 0.0;
            for t in 0..n {
                let w = if upper[t] { wu[t] } else { wl[t] };
                acc += (y[t] - 0.5) * sgn(x[t] * theta + w);
            }
            acc / n as f64
        })
        .collect();
    let max_value = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = cutoff / (n as f64).sqrt();
    let mask = values.iter().map(|v| max_value - v <= threshold).collect();
    Ok(SetEstimate { set: GridSet::new(grid.clone(), mask)?, cutoff, threshold, max_value, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{generate, Model};
    use crate::gridset::hausdorff;

    fn grid() -> Grid {
        "-4:6:201".parse().unwrap()
    }

    #[test]
    fn cutoff_extremes_and_monotonicity() {
        let s = generate(&Model::default_for("interval_binary").unwrap(), 300, 1).unwrap();
        let rule = BandwidthRule { c: 1.0, a: 1.0 / 7.0 };
        let all = manski_tamer_set(&s, &grid(), rule, Some(1e9)).unwrap();
        assert_eq!(all.set.count(), 201);
        let tight = manski_tamer_set(&s, &grid(), rule, Some(0.0)).unwrap();
        for (v, m) in tight.values.iter().zip(&tight.set.mask) {
            assert_eq!(*m, *v == tight.max_value);
        }
        let mut prev = tight.set.clone();
        for c in [0.5, 1.0, 2.0, 4.0] {
            let cur = manski_tamer_set(&s, &grid(), rule, Some(c)).unwrap().set;
            assert!(prev.is_subset_of(&cur));
            prev = cur;
        }
    }

    #[test]
    fn point_identified_set_shrinks() {
        let m = Model::IntervalBinary { theta: 1.0, width: 0.0, w_mean: -1.5, w_sd: 2.0, rho: 0.5 };
        let rule = BandwidthRule { c: 1.0, a: 1.0 / 7.0 };
        let g = grid();
        let truth = GridSet::from_predicate(g.clone(), |t| (t[0] - 1.0).abs() < 1e-9);
        let dist = |n| {
            let s = generate(&m, n, 5).unwrap();
            hausdorff(&manski_tamer_set(&s, &g, rule, None).unwrap().set, &truth).unwrap()
        };
        assert!(dist(2000) < dist(200));
    }

    #[test]
    fn kernel_regression_on_constant() {
        let y = vec![0.3; 20];
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
        for q in nadaraya_watson(&y, &[&x], 0.2) {
            assert!((q - 0.3).abs() < 1e-12);
        }
    }
}
