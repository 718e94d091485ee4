use super::{ArgmaxRegion, Method, OptimizerReport};
use crate::error::{Error, Result};

/// Points on the line with nonnegative weights, sorted for window queries.
#[derive(Debug, Clone)]
pub struct WeightedPoints {
    y: Vec<f64>,
    /// `prefix[i]` = total weight of the first `i` sorted points.
    prefix: Vec<f64>,
}

impl WeightedPoints {
    /// Drops zero-weight points.
    pub fn new(y: &[f64], w: &[f64]) -> Result<Self> {
        if y.len() != w.len() {
            return Err(Error::InvalidInput("values and weights differ in length".into()));
        }
        if y.iter().chain(w).any(|v| !v.is_finite()) || w.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let mut pts: Vec<(f64, f64)> = y.iter().zip(w).filter(|(_, &w)| w > 0.0).map(|(&y, &w)| (y, w)).collect();
        if pts.is_empty() {
            return Err(Error::AllZeroWeights);
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(pts.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &(_, w) in &pts {
            acc += w;
            prefix.push(acc);
        }
        Ok(WeightedPoints { y: pts.into_iter().map(|p| p.0).collect(), prefix })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.y
    }

    pub fn total(&self) -> f64 {
        self.prefix[self.y.len()]
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.prefix[j + 1] - self.prefix[i]
    }

    /// Best closed window of half-width `nu`. Returns the window midpoint,
    /// its weight, and the covered range `[y_i, y_j]`.
    pub fn best_window(&self, nu: f64) -> (f64, f64, f64, f64) {
        let n = self.y.len();
        let mut j = 0;
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for i in 0..n {
            j = j.max(i);
            while j + 1 < n && self.y[j + 1] - self.y[i] <= 2.0 * nu {
                j += 1;
            }
            let w = self.weight(i, j);
            if w > best.0 {
                best = (w, i, j);
            }
        }
        let (w, i, j) = best;
        (0.5 * (self.y[i] + self.y[j]), w, self.y[i], self.y[j])
    }

    /// Smallest half-width whose best window carries at least `mass`, and the
    /// first window attaining it.
    pub fn min_half_width(&self, mass: f64) -> Result<f64> {
        if mass > self.total() {
            return Err(Error::InvalidInput("requested mass exceeds total weight".into()));
        }
        let n = self.y.len();
        let mut best = f64::INFINITY;
        let mut j = 0;
        for i in 0..n {
            j = j.max(i);
            while j < n && self.weight(i, j) < mass {
                j += 1;
            }
            if j == n {
                break;
            }
            best = best.min(0.5 * (self.y[j] - self.y[i]));
        }
        Ok(best)
    }
}

/// Maximizes `sum_t w_t 1{y_t in [theta - nu, theta + nu]}` over theta.
pub fn max_weighted_window(y: &[f64], w: &[f64], nu: f64) -> Result<OptimizerReport> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidInput("half-width must be finite and nonnegative".into()));
    }
    let pts = WeightedPoints::new(y, w)?;
    let (theta, weight, first, last) = pts.best_window(nu);
    Ok(OptimizerReport {
        point: vec![theta],
        region: ArgmaxRegion::Window { lo: last - nu, hi: first + nu },
        value: weight,
        evaluations: pts.len(),
        method: Method::SlidingWindow,
        approximate: false,
    })
}
