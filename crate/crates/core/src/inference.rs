//! Subsampling inference from consecutive blocks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, PointEstimate};
use crate::gridset::{Grid, GridSet};
use crate::sample::TimeSeriesSample;

/// Above this many blocks an equispaced subset is used.
pub const BLOCK_CAP: usize = 2000;

pub const EXTENSIVE_SEARCH_NOTE: &str =
    "the confidence set may require an extensive numerical search over the parameter space; grid resolution sets the cost";

/// `ceil(n^{2/3})`.
pub fn default_block_len(n: usize) -> usize {
    let s = (n as f64).powf(2.0 / 3.0).ceil() as usize;
    // Guard against the float landing one above an exact cube.
    if s > 1 && ((s - 1) as f64).powi(3) >= (n as f64).powi(2) {
        s - 1
    } else {
        s
    }
}

/// Start rows of the blocks `[b, b + s - 1]`, thinned to `cap` equispaced
/// starts when there are more.
pub fn block_starts(n: usize, s: usize, cap: usize) -> Vec<usize> {
    let count = n - s + 1;
    if count <= cap {
        return (0..count).collect();
    }
    (0..cap).map(|i| (i as f64 * (count - 1) as f64 / (cap - 1) as f64).round() as usize).collect()
}

/// Type-1 quantile: `sorted[ceil(p B) - 1]`, clamped to the sample.
pub fn quantile_type1(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len();
    let k = (p * b as f64).ceil() as usize;
    sorted[k.clamp(1, b) - 1]
}

fn check_block(n: usize, s: usize) -> Result<()> {
    if s < 2 || s >= n {
        return Err(Error::BlockTooShort { len: s, reason: format!("block length must satisfy 2 <= s < n = {n}") });
    }
    Ok(())
}

fn block_failure(s: usize) -> impl Fn(Error) -> Error {
    move |e| Error::BlockTooShort { len: s, reason: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleCi {
    pub theta_hat: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub block_len: usize,
    pub alpha: f64,
    pub blocks_used: usize,
    /// Exponent applied to the effective size.
    pub rate_exponent: f64,
    /// `(effective size at n)^{1/3}`.
    pub tau_n: f64,
    /// Per block, per coordinate `tau_s (theta_b - theta_hat)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_stats: Option<Vec<Vec<f64>>>,
}

/// Equal-tailed subsampling interval per coordinate:
/// `[theta_hat - q_{1-alpha/2}/tau_n, theta_hat - q_{alpha/2}/tau_n]` with `q`
/// the type-1 quantiles of `tau_s (theta_b - theta_hat)` over blocks.
pub fn subsample_ci(
    sample: &TimeSeriesSample,
    est: &Estimator,
    s: usize,
    alpha: f64,
    keep_blocks: bool,
) -> Result<SubsampleCi> {
    let n = sample.n();
    check_block(n, s)?;
    if !(alpha > 0.0) || alpha.is_nan() {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let full = est.estimate(sample)?;
    subsample_ci_from(sample, est, &full, s, alpha, keep_blocks)
}

/// As [`subsample_ci`] with the full-sample estimate supplied.
pub fn subsample_ci_from(
    sample: &TimeSeriesSample,
    est: &Estimator,
    full: &PointEstimate,
    s: usize,
    alpha: f64,
    keep_blocks: bool,
) -> Result<SubsampleCi> {
    let n = sample.n();
    check_block(n, s)?;
    let theta = &full.theta;
    let d = theta.len();
    let tau_n = est.effective_size(n).cbrt();
    let tau_s = est.effective_size(s).cbrt();
    let starts = block_starts(n, s, BLOCK_CAP);
    let stats: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&b| {
            let block = sample.rows(b..b + s)?;
            let e = est.estimate(&block).map_err(block_failure(s))?;
            Ok(e.theta.iter().zip(theta).map(|(tb, t)| tau_s * (tb - t)).collect())
        })
        .collect::<Result<_>>()?;
    let (lower, upper) = if alpha >= 1.0 {
        (theta.clone(), theta.clone())
    } else {
        let mut lower = Vec::with_capacity(d);
        let mut upper = Vec::with_capacity(d);
        for k in 0..d {
            let mut col: Vec<f64> = stats.iter().map(|r| r[k]).collect();
            col.sort_by(f64::total_cmp);
            lower.push(theta[k] - quantile_type1(&col, 1.0 - alpha / 2.0) / tau_n);
            upper.push(theta[k] - quantile_type1(&col, alpha / 2.0) / tau_n);
        }
        (lower, upper)
    };
    Ok(SubsampleCi {
        theta_hat: theta.clone(),
        lower,
        upper,
        block_len: s,
        alpha,
        blocks_used: starts.len(),
        rate_exponent: 1.0 / 3.0,
        tau_n,
        block_stats: keep_blocks.then_some(stats),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub set: GridSet,
    /// `Q_n` at each node.
    pub statistic: Vec<f64>,
    /// Block quantile `q_s(theta, 1 - alpha)` at each node.
    pub quantile: Vec<f64>,
    pub block_len: usize,
    pub alpha: f64,
    pub blocks_used: usize,
    pub note: String,
}

/// Per-node block statistics `Q_s(theta)`: `stats[node][block]`, plus the
/// full-sample `Q_n`.
pub struct CriterionBlocks {
    pub q_n: Vec<f64>,
    pub stats: Vec<Vec<f64>>,
    pub block_len: usize,
}

impl CriterionBlocks {
    pub fn compute(sample: &TimeSeriesSample, est: &Estimator, grid: &Grid, s: usize) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let n = sample.n();
        check_block(n, s)?;
        let nodes: Vec<Vec<f64>> = grid.nodes().collect();
        let gaps = |smp: &TimeSeriesSample| -> Result<Vec<f64>> {
            let fit = est.estimate(smp)?;
            let crit = est.criterion(smp)?;
            if nodes[0].len() != fit.theta.len() {
                return Err(Error::InvalidInput(format!(
                    "grid has dimension {} but the parameter has dimension {}",
                    nodes[0].len(),
                    fit.theta.len()
                )));
            }
            Ok(nodes.iter().map(|t| crate::estimators::gap_from(&crit, fit.value, t)).collect())
        };
        let q_n = gaps(sample)?;
        let per_block: Vec<Vec<f64>> = block_starts(n, s, BLOCK_CAP)
            .par_iter()
            .map(|&b| gaps(&sample.rows(b..b + s)?).map_err(block_failure(s)))
            .collect::<Result<_>>()?;
        let mut stats: Vec<Vec<f64>> = (0..nodes.len()).map(|i| per_block.iter().map(|r| r[i]).collect()).collect();
        for col in &mut stats {
            col.sort_by(f64::total_cmp);
        }
        Ok(CriterionBlocks { q_n, stats, block_len: s })
    }

    pub fn confidence_set(&self, grid: &Grid, alpha: f64) -> Result<ConfidenceSet> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let quantile: Vec<f64> = self.stats.iter().map(|c| quantile_type1(c, 1.0 - alpha)).collect();
        let mask = self.q_n.iter().zip(&quantile).map(|(q, c)| q <= c).collect();
        Ok(ConfidenceSet {
            set: GridSet::new(grid.clone(), mask)?,
            statistic: self.q_n.clone(),
            quantile,
            block_len: self.block_len,
            alpha,
            blocks_used: self.stats[0].len(),
            note: EXTENSIVE_SEARCH_NOTE.into(),
        })
    }
}

/// `C_n = {theta : Q_n(theta) <= q_s(theta, 1 - alpha)}` over grid nodes.
pub fn criterion_confidence_set(
    sample: &TimeSeriesSample,
    est: &Estimator,
    grid: &Grid,
    s: usize,
    alpha: f64,
) -> Result<ConfidenceSet> {
    CriterionBlocks::compute(sample, est, grid, s)?.confidence_set(grid, alpha)
}
