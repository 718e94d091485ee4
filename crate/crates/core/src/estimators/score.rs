//! Maximum score family: plain, panel (conditional) and kernel-localized.

use std::f64::consts::{PI, TAU};

use super::PointEstimate;
use crate::bandwidth::BandwidthRule;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::optim::{grid_refine, HalfPlaneSum, OptimizerReport, RefineOptions};
use crate::sample::TimeSeriesSample;

/// Regressor columns `x1, x2, ...` in order (at least two).
pub fn regressor_columns(sample: &TimeSeriesSample) -> Result<Vec<&[f64]>> {
    let mut cols = Vec::new();
    while let Ok(c) = sample.column(&format!("x{}", cols.len() + 1)) {
        cols.push(c);
    }
    if cols.len() < 2 {
        return Err(Error::Data("maximum score needs regressor fields x1, x2".into()));
    }
    Ok(cols)
}

fn signs(sample: &TimeSeriesSample) -> Result<Vec<f64>> {
    Ok(sample.column("sign_y")?.iter().map(|&y| if y >= 0.0 { 1.0 } else { -1.0 }).collect())
}

/// `(1/n) sum_t w_t [1{y_t >= 0, x_t'theta >= 0} + 1{y_t < 0, x_t'theta < 0}]`
/// written as `(1/n) [sum_{y<0} w_t + sum_t s_t w_t 1{x_t'theta >= 0}]`.
struct ScoreProblem {
    x: Vec<Vec<f64>>,
    /// Signed weights `s_t w_t`.
    signed: Vec<f64>,
    offset: f64,
    scale: f64,
}

impl ScoreProblem {
    fn new(x: Vec<Vec<f64>>, s: &[f64], w: &[f64], scale: f64) -> Self {
        let offset = s.iter().zip(w).filter(|(&s, _)| s < 0.0).map(|(_, &w)| w).sum();
        let signed = s.iter().zip(w).map(|(s, w)| s * w).collect();
        ScoreProblem { x, signed, offset, scale }
    }

    fn eval(&self, theta: &[f64]) -> f64 {
        let mut acc = self.offset;
        for (xt, &sw) in self.x.iter().zip(&self.signed) {
            let dot: f64 = xt.iter().zip(theta).map(|(a, b)| a * b).sum();
            if dot >= 0.0 {
                acc += sw;
            }
        }
        acc * self.scale
    }

    fn maximize(&self) -> Result<OptimizerReport> {
        let d = self.x[0].len();
        if d == 2 {
            let hp = HalfPlaneSum::new(self.x.iter().map(|v| [v[0], v[1]]).collect(), self.signed.clone())?;
            let mut r = hp.maximize()?;
            r.value = self.eval(&r.point);
            return Ok(r);
        }
        if self.x.iter().all(|v| v.iter().all(|&c| c == 0.0)) {
            return Err(Error::DegenerateData("all regressor vectors are zero".into()));
        }
        // Hyperspherical angles: d-2 polar angles in [0, pi], one in [0, 2pi).
        let mut lo = vec![0.0; d - 1];
        let mut hi = vec![PI; d - 1];
        lo[d - 2] = 0.0;
        hi[d - 2] = TAU;
        let mut r = grid_refine(|a| self.eval(&sphere_point(a)), &lo, &hi, RefineOptions::default())?;
        r.point = sphere_point(&r.point);
        Ok(r)
    }
}

/// Unit vector with hyperspherical angles `a`.
fn sphere_point(a: &[f64]) -> Vec<f64> {
    let d = a.len() + 1;
    let mut v = vec![0.0; d];
    let mut sin_prod = 1.0;
    for (k, &ak) in a.iter().enumerate() {
        v[k] = sin_prod * ak.cos();
        sin_prod *= ak.sin();
    }
    v[d - 1] = sin_prod;
    v
}

fn rows(cols: &[&[f64]]) -> Vec<Vec<f64>> {
    (0..cols[0].len()).map(|t| cols.iter().map(|c| c[t]).collect()).collect()
}

fn finish(report: OptimizerReport, effective_size: f64, bandwidth: f64) -> PointEstimate {
    PointEstimate {
        theta: report.point.clone(),
        value: report.value,
        effective_size,
        bandwidth,
        nu_hat: None,
        coverage: None,
        report: Some(report),
    }
}

fn plain_problem(sample: &TimeSeriesSample) -> Result<ScoreProblem> {
    let x = rows(&regressor_columns(sample)?);
    let s = signs(sample)?;
    let n = s.len();
    Ok(ScoreProblem::new(x, &s, &vec![1.0; n], 1.0 / n as f64))
}

/// Maximum score over the unit sphere; exact for two regressors, grid
/// refinement (flagged approximate) otherwise.
pub fn max_score(sample: &TimeSeriesSample) -> Result<PointEstimate> {
    let p = plain_problem(sample)?;
    let r = p.maximize()?;
    Ok(finish(r, sample.n() as f64, 1.0))
}

pub(crate) fn max_score_criterion(sample: &TimeSeriesSample) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let p = plain_problem(sample)?;
    Ok(move |t: &[f64]| p.eval(t))
}

fn localized_problem(sample: &TimeSeriesSample, c: f64, kernel: Kernel, rule: BandwidthRule) -> Result<ScoreProblem> {
    let x = rows(&regressor_columns(sample)?);
    let s = signs(sample)?;
    let n = s.len();
    let h = rule.at(n);
    let w: Vec<f64> = sample.column("w")?.iter().map(|&w| kernel.eval((w - c) / h)).collect();
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEffectiveSample);
    }
    Ok(ScoreProblem::new(x, &s, &w, 1.0 / (n as f64 * h)))
}

/// Maximum score with observations weighted by `K((w_t - c)/h)`.
pub fn localized_max_score(sample: &TimeSeriesSample, c: f64, kernel: Kernel, rule: BandwidthRule) -> Result<PointEstimate> {
    let p = localized_problem(sample, c, kernel, rule)?;
    let r = p.maximize()?;
    let n = sample.n();
    Ok(finish(r, rule.effective_size(n), rule.at(n)))
}

pub(crate) fn localized_criterion(
    sample: &TimeSeriesSample,
    c: f64,
    kernel: Kernel,
    rule: BandwidthRule,
) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let p = localized_problem(sample, c, kernel, rule)?;
    Ok(move |t: &[f64]| p.eval(t))
}

/// `sum_i e_i sgn(z_i'theta)` with `sgn(v) = 1` for `v >= 0`, else `-1`,
/// equals `2 sum_i e_i 1{z_i'theta >= 0} - sum_i e_i`.
struct PanelProblem {
    inner: ScoreProblem,
    total: f64,
}

impl PanelProblem {
    fn eval(&self, theta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (z, &e) in self.inner.x.iter().zip(&self.inner.signed) {
            acc += if z[0] * theta[0] + z[1] * theta[1] >= 0.0 { e } else { -e };
        }
        acc * self.inner.scale
    }
}

fn panel_problem(sample: &TimeSeriesSample, kernel: Kernel, rule: BandwidthRule) -> Result<PanelProblem> {
    let col = |k: &str| sample.column(k);
    let (y0, y1, y2, y3) = (col("y0")?, col("y1")?, col("y2")?, col("y3")?);
    let (x1, x2, x3) = (col("x1")?, col("x2")?, col("x3")?);
    let n = sample.n();
    let b = rule.at(n);
    let mut z = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut any_kernel = false;
    for i in 0..n {
        let k = kernel.eval((x2[i] - x3[i]) / b) / b;
        any_kernel |= k > 0.0;
        z.push(vec![x2[i] - x1[i], y3[i] - y0[i]]);
        e.push(k * (y2[i] - y1[i]));
    }
    if !any_kernel || e.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEffectiveSample);
    }
    let total = e.iter().sum();
    Ok(PanelProblem { inner: ScoreProblem { x: z, signed: e, offset: 0.0, scale: 1.0 / n as f64 }, total })
}

/// Conditional maximum score for the dynamic binary panel with one
/// regressor: `(beta, gamma)` on the unit circle maximizing
/// `P_n K((x2 - x3)/b)/b (y2 - y1) sgn((x2 - x1) beta + (y3 - y0) gamma)`.
pub fn honore_kyriazidou(sample: &TimeSeriesSample, kernel: Kernel, rule: BandwidthRule) -> Result<PointEstimate> {
    let p = panel_problem(sample, kernel, rule)?;
    let hp = HalfPlaneSum::new(p.inner.x.iter().map(|v| [v[0], v[1]]).collect(), p.inner.signed.clone())?;
    let mut r = hp.maximize()?;
    r.value = p.eval(&r.point);
    debug_assert!((r.value - p.inner.scale * (2.0 * hp.eval(&r.point) - p.total)).abs() < 1e-9 * (1.0 + p.total.abs()));
    let n = sample.n();
    Ok(PointEstimate {
        theta: r.point.clone(),
        value: r.value,
        effective_size: rule.effective_size(n),
        bandwidth: rule.at(n),
        nu_hat: None,
        coverage: None,
        report: Some(r),
    })
}

pub(crate) fn hk_criterion(
    sample: &TimeSeriesSample,
    kernel: Kernel,
    rule: BandwidthRule,
) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync> {
    let p = panel_problem(sample, kernel, rule)?;
    Ok(move |t: &[f64]| p.eval(t))
}
