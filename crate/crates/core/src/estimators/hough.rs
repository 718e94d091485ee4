use super::PointEstimate;
use crate::bandwidth::BandwidthRule;
use crate::error::Result;
use crate::optim::{vertex_sweep_2d, Slab};
use crate::sample::TimeSeriesSample;

/// Slabs `|y_t - b0 - b1 x_t| <= h sqrt(1 + x_t^2)` in `(b0, b1)`.
pub fn hough_slabs(y: &[f64], x: &[f64], h: f64) -> Vec<Slab> {
    y.iter()
        .zip(x)
        .map(|(&y, &x)| {
            let r = h * (1.0 + x * x).sqrt();
            Slab { coef: x, lo: y - r, hi: y + r }
        })
        .collect()
}

fn count(slabs: &[Slab], b: &[f64]) -> f64 {
    slabs.iter().filter(|s| s.contains(b)).count() as f64
}

/// Line `(intercept, slope)` lying in the largest number of slabs
/// `|y_t - x_t'beta| <= h_n |x_t|` with `x_t = (1, x~_t)`. Exact.
pub fn hough_estimate(sample: &TimeSeriesSample, rule: BandwidthRule) -> Result<PointEstimate> {
    let (y, x) = (sample.column("y")?, sample.column("x")?);
    let n = sample.n();
    let h = rule.at(n);
    let slabs = hough_slabs(y, x, h);
    let mut report = vertex_sweep_2d(&slabs)?;
    report.value = count(&slabs, &report.point) / (n as f64 * h);
    Ok(PointEstimate {
        theta: report.point.clone(),
        value: report.value,
        effective_size: n as f64 * h * h,
        bandwidth: h,
        nu_hat: None,
        coverage: None,
        report: Some(report),
    })
}

/// `(1/(n h)) sum_t 1{|y_t - x_t'beta| <= h |x_t|}`.
pub(crate) fn hough_criterion(sample: &TimeSeriesSample, rule: BandwidthRule) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let (y, x) = (sample.column("y")?, sample.column("x")?);
    let n = sample.n();
    let h = rule.at(n);
    let slabs = hough_slabs(y, x, h);
    let scale = 1.0 / (n as f64 * h);
    Ok(move |b: &[f64]| count(&slabs, b) * scale)
}
