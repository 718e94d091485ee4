//! Window estimators on the line: minimum-volume predictive region and
//! least median of squares.

use serde::{Deserialize, Serialize};

use super::PointEstimate;
use crate::bandwidth::BandwidthRule;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::optim::{max_weighted_window, ArgmaxRegion, Method, OptimizerReport, WeightedPoints};
use crate::sample::TimeSeriesSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub theta: f64,
    pub nu: f64,
    /// Weighted fraction of the sample inside `[theta - nu, theta + nu]`.
    pub coverage: f64,
    pub effective_size: f64,
    pub bandwidth: f64,
    pub report: OptimizerReport,
}

impl IntervalEstimate {
    pub fn into_point(self) -> PointEstimate {
        PointEstimate {
            theta: vec![self.theta],
            value: self.report.value,
            effective_size: self.effective_size,
            bandwidth: self.bandwidth,
            nu_hat: Some(self.nu),
            coverage: Some(self.coverage),
            report: Some(self.report),
        }
    }
}

fn minvol_weights(sample: &TimeSeriesSample, c: f64, kernel: Kernel, rule: BandwidthRule) -> Result<(Vec<f64>, f64)> {
    let n = sample.n();
    let h = rule.at(n);
    let w: Vec<f64> = sample.column("x")?.iter().map(|&x| kernel.eval((x - c) / h)).collect();
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEffectiveSample);
    }
    Ok((w, h))
}

/// Shortest interval `[theta - nu, theta + nu]` holding a kernel-weighted
/// fraction `alpha` of the responses `y` near `x = c`.
///
/// `nu` is the smallest half-gap `(y_(j) - y_(i))/2` whose best window
/// reaches the required mass (found directly by a two-pointer pass);
/// `theta` is the leftmost best window at that half-width.
pub fn min_volume_region(
    sample: &TimeSeriesSample,
    c: f64,
    alpha: f64,
    kernel: Kernel,
    rule: BandwidthRule,
) -> Result<IntervalEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (w, h) = minvol_weights(sample, c, kernel, rule)?;
    let y = sample.column("y")?;
    let pts = WeightedPoints::new(y, &w)?;
    let total = pts.total();
    let nu = pts.min_half_width(alpha * total)?;
    let mut report = max_weighted_window(y, &w, nu)?;
    let coverage = report.value / total;
    let n = sample.n() as f64;
    report.value = window_sum(y, Some(&w), report.point[0], nu) / (n * h);
    Ok(IntervalEstimate {
        theta: report.point[0],
        nu,
        coverage,
        effective_size: n * h,
        bandwidth: h,
        report,
    })
}

/// `(1/(nh)) sum_t K((x_t - c)/h) 1{|y_t - theta| <= nu_hat}`.
pub(crate) fn min_volume_criterion(
    sample: &TimeSeriesSample,
    c: f64,
    alpha: f64,
    kernel: Kernel,
    rule: BandwidthRule,
) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let fit = min_volume_region(sample, c, alpha, kernel, rule)?;
    let (w, h) = minvol_weights(sample, c, kernel, rule)?;
    let y = sample.column("y")?.to_vec();
    let (nu, scale) = (fit.nu, 1.0 / (y.len() as f64 * h));
    Ok(move |t: &[f64]| window_sum(&y, Some(&w), t[0], nu) * scale)
}

/// Weight of `{t : |y_t - theta| <= nu}`, summed in sorted-value order so
/// that it matches the sliding-window sums bit for bit.
fn window_sum(y: &[f64], w: Option<&[f64]>, theta: f64, nu: f64) -> f64 {
    let mut inside: Vec<(f64, f64)> = y
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - theta).abs() <= nu)
        .map(|(t, &v)| (v, w.map_or(1.0, |w| w[t])))
        .filter(|p| p.1 > 0.0)
        .collect();
    inside.sort_by(|a, b| a.0.total_cmp(&b.0));
    inside.iter().map(|p| p.1).sum()
}

/// Leftmost shortest window of `k` consecutive order statistics:
/// `(start index, width)` into `sorted`.
pub fn shorth(sorted: &[f64], k: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for i in 0..=sorted.len() - k {
        let width = sorted[i + k - 1] - sorted[i];
        if width < best.1 {
            best = (i, width);
        }
    }
    best
}

/// Midpoint of the shortest interval holding `ceil(n/2)` observations.
pub fn lms_location(y: &[f64]) -> Result<PointEstimate> {
    if y.is_empty() {
        return Err(Error::Data("empty sample".into()));
    }
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let k = n.div_ceil(2);
    let (i, width) = shorth(&s, k);
    let theta = 0.5 * (s[i] + s[i + k - 1]);
    let nu = 0.5 * width;
    let value = window_sum(y, None, theta, nu) / n as f64;
    Ok(PointEstimate {
        theta: vec![theta],
        value,
        effective_size: n as f64,
        bandwidth: 1.0,
        nu_hat: Some(nu),
        coverage: Some(k as f64 / n as f64),
        report: Some(OptimizerReport {
            point: vec![theta],
            region: ArgmaxRegion::Window { lo: s[i], hi: s[i + k - 1] },
            value,
            evaluations: n - k + 1,
            method: Method::SlidingWindow,
            approximate: false,
        }),
    })
}

/// `P_n 1{|y_t - theta| <= nu_hat}`.
pub(crate) fn lms_location_criterion(sample: &TimeSeriesSample) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let y = sample.column("y")?.to_vec();
    let nu = lms_location(&y)?.nu_hat.unwrap();
    let n = y.len() as f64;
    Ok(move |t: &[f64]| window_sum(&y, None, t[0], nu) / n)
}

/// Least median of squares line `(intercept, slope)` over the slopes of all
/// data-point pairs; for each slope the intercept is the residual shorth
/// midpoint. O(n³ log n).
pub fn lms_regression(sample: &TimeSeriesSample) -> Result<PointEstimate> {
    let y = sample.column("y")?;
    let x = sample.column("x")?;
    let n = y.len();
    if n < 3 {
        return Err(Error::InvalidInput("least median of squares regression needs n >= 3".into()));
    }
    let k = n.div_ceil(2);
    let mut best: Option<(f64, f64, f64)> = None;
    let mut resid = vec![0.0; n];
    let mut evaluations = 0;
    for i in 0..n {
        for j in i + 1..n {
            if x[i] == x[j] {
                continue;
            }
            let slope = (y[j] - y[i]) / (x[j] - x[i]);
            for t in 0..n {
                resid[t] = y[t] - slope * x[t];
            }
            resid.sort_by(f64::total_cmp);
            let (s, width) = shorth(&resid, k);
            evaluations += 1;
            if best.is_none_or(|b| width < b.0) {
                best = Some((width, 0.5 * (resid[s] + resid[s + k - 1]), slope));
            }
        }
    }
    let (width, intercept, slope) =
        best.ok_or_else(|| Error::DegenerateData("all regressor values are equal".into()))?;
    let nu = 0.5 * width;
    let value = regression_count(y, x, intercept, slope, nu) / n as f64;
    Ok(PointEstimate {
        theta: vec![intercept, slope],
        value,
        effective_size: n as f64,
        bandwidth: 1.0,
        nu_hat: Some(nu),
        coverage: Some(k as f64 / n as f64),
        report: Some(OptimizerReport {
            point: vec![intercept, slope],
            region: ArgmaxRegion::Point,
            value,
            evaluations,
            method: Method::PairwiseSlopes,
            approximate: false,
        }),
    })
}

fn regression_count(y: &[f64], x: &[f64], b0: f64, b1: f64, nu: f64) -> f64 {
    y.iter().zip(x).filter(|(&y, &x)| ((y - b1 * x) - b0).abs() <= nu).count() as f64
}

pub(crate) fn lms_regression_criterion(sample: &TimeSeriesSample) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let fit = lms_regression(sample)?;
    let nu = fit.nu_hat.unwrap();
    let y = sample.column("y")?.to_vec();
    let x = sample.column("x")?.to_vec();
    let n = y.len() as f64;
    Ok(move |t: &[f64]| regression_count(&y, &x, t[0], t[1], nu) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelKind;
    use proptest::prelude::*;

    fn yx(y: Vec<f64>) -> TimeSeriesSample {
        let n = y.len();
        TimeSeriesSample::from_columns(&[("y", y), ("x", vec![0.0; n])]).unwrap()
    }

    /// Exhaustive oracle: every candidate half-gap, smallest one whose best
    /// closed window holds `alpha` of the weight.
    fn minvol_oracle(y: &[f64], w: &[f64], alpha: f64) -> f64 {
        let total: f64 = w.iter().sum();
        let mut cands: Vec<f64> = Vec::new();
        for a in y {
            for b in y {
                if b >= a {
                    cands.push(0.5 * (b - a));
                }
            }
        }
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        let covered = |nu: f64| {
            y.iter()
                .map(|&l| y.iter().zip(w).filter(|(&v, _)| v >= l && v - l <= 2.0 * nu).map(|(_, &w)| w).sum::<f64>())
                .fold(0.0, f64::max)
        };
        // Binary search relies on monotone coverage.
        let (mut lo, mut hi) = (0usize, cands.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if covered(cands[mid]) >= alpha * total {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        cands[lo]
    }

    #[test]
    fn minvol_example() {
        let s = yx(vec![0.0, 1.0, 2.0, 10.0]);
        let r = min_volume_region(&s, 0.0, 0.5, Kernel::new(KernelKind::Boxcar), BandwidthRule::UNIT).unwrap();
        assert_eq!((r.nu, r.theta), (0.5, 0.5));
        assert_eq!(minvol_oracle(&[0.0, 1.0, 2.0, 10.0], &[1.0; 4], 0.5), 0.5);
        let r = min_volume_region(&s, 0.0, 1e-9, Kernel::new(KernelKind::Boxcar), BandwidthRule::UNIT).unwrap();
        assert_eq!((r.nu, r.theta), (0.0, 0.0));
        let far = min_volume_region(&s, 50.0, 0.5, Kernel::default(), BandwidthRule::UNIT);
        assert_eq!(far.unwrap_err(), Error::ZeroEffectiveSample);
    }

    #[test]
    fn lms_location_examples() {
        assert_eq!(lms_location(&[0.0, 1.0, 2.0, 10.0]).unwrap().theta, vec![0.5]);
        assert_eq!(lms_location(&[5.0]).unwrap().theta, vec![5.0]);
        assert_eq!(lms_location(&[-1.0, 0.0, 1.0]).unwrap().theta, vec![-0.5]);
    }

    #[test]
    fn lms_regression_recovers_line_with_outliers() {
        let x: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let mut y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        for (t, bump) in [(1usize, 40.0), (4, -25.0), (7, 13.0), (9, 70.0)] {
            y[t] += bump;
        }
        let s = TimeSeriesSample::from_columns(&[("y", y), ("x", x)]).unwrap();
        let e = lms_regression(&s).unwrap();
        assert_eq!(e.theta, vec![2.0, 3.0]);
        assert_eq!(e.nu_hat, Some(0.0));
    }

    #[test]
    fn lms_regression_three_points() {
        let (y, x) = (vec![0.0, 1.0, 5.0], vec![0.0, 1.0, 2.0]);
        let s = TimeSeriesSample::from_columns(&[("y", y.clone()), ("x", x.clone())]).unwrap();
        let e = lms_regression(&s).unwrap();
        // k = 2: every pairwise slope fits its pair exactly, so the first pair wins.
        assert_eq!(e.theta, vec![0.0, 1.0]);
        let degenerate = TimeSeriesSample::from_columns(&[("y", y), ("x", vec![1.0; 3])]).unwrap();
        assert!(matches!(lms_regression(&degenerate), Err(Error::DegenerateData(_))));
    }

    proptest! {
        #[test]
        fn minvol_matches_exhaustive_oracle(
            pts in prop::collection::vec((-3.0f64..3.0, 0.0f64..1.0), 1..40),
            alpha in 0.05f64..0.95,
        ) {
            let (y, x): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let s = TimeSeriesSample::from_columns(&[("y", y.clone()), ("x", x.clone())]).unwrap();
            let k = Kernel::default();
            let r = min_volume_region(&s, 0.5, alpha, k, BandwidthRule::UNIT).unwrap();
            let w: Vec<f64> = x.iter().map(|&v| k.eval(v - 0.5)).collect();
            prop_assert!(r.coverage >= alpha - 1e-12);
            prop_assert_eq!(r.nu, minvol_oracle(&y, &w, alpha));
        }

        #[test]
        fn lms_location_matches_brute_force(y in prop::collection::vec(-10.0f64..10.0, 1..60)) {
            let n = y.len();
            let k = n.div_ceil(2);
            // All k-subsets' enclosing intervals reduce to pairs (i, j) with
            // at least k points in [y_i, y_j].
            let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            for &a in &y {
                for &b in &y {
                    if b >= a && y.iter().filter(|&&v| v >= a && v <= b).count() >= k {
                        if b - a < best.0 || (b - a == best.0 && a < best.1) {
                            best = (b - a, a, b);
                        }
                    }
                }
            }
            let e = lms_location(&y).unwrap();
            prop_assert_eq!(e.nu_hat.unwrap() * 2.0, best.0);
            prop_assert_eq!(e.theta[0], 0.5 * (best.1 + best.2));
        }
    }
}
