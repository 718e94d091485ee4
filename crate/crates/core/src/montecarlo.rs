//! Replicated experiments: convergence-rate fits, coverage frequencies and
//! comparison of normalized estimates with the simulated limit law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthRule;
use crate::dgp::{generate, interval_identified_set, minvol_truth, rc_truth, Model};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::estimators::manski_tamer_set;
use crate::estimators::{Estimator, RateFamily};
use crate::gridset::{rho, Grid, GridSet};
use crate::inference::{criterion_confidence_set, default_block_len, subsample_ci};
use crate::limitlaw::{ks_distance, limit_spec_for, simulate_argmax_law, ArgmaxSample};
use crate::rng::derive_seed;

pub const TARGET_SLOPE: f64 = -1.0 / 3.0;
/// Largest tolerated fraction of failed replications.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Population value an estimator targets, with the metric its errors are
/// measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub theta: Vec<f64>,
    /// Errors are great-circle angles rather than Euclidean distances.
    pub spherical: bool,
}

impl Truth {
    pub fn error(&self, theta_hat: &[f64]) -> Result<f64> {
        if theta_hat.len() != self.theta.len() {
            return Err(Error::InvalidInput("estimate and truth differ in dimension".into()));
        }
        if self.spherical {
            Ok(Direction::new(self.theta.clone())?.geodesic(theta_hat))
        } else {
            Ok(self.theta.iter().zip(theta_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        }
    }
}

fn unit(v: [f64; 2]) -> Vec<f64> {
    let r = v[0].hypot(v[1]);
    vec![v[0] / r, v[1] / r]
}

/// The estimand of `est` under `model`.
pub fn truth_for(model: &Model, est: &Estimator) -> Result<Truth> {
    let t = |theta: Vec<f64>, spherical| Ok(Truth { theta, spherical });
    match (model, est) {
        (Model::MaxScore { theta, .. }, Estimator::MaxScore) => t(unit(*theta), true),
        (Model::RcBinary { slope, .. }, Estimator::LocalizedMaxScore { c, .. }) => t(rc_truth(*slope, *c).to_vec(), true),
        (Model::PanelHk { beta, gamma }, Estimator::HonoreKyriazidou { .. }) => t(unit([*beta, *gamma]), true),
        (Model::Lms { intercept, slope: None, .. }, Estimator::LmsLocation) => t(vec![*intercept], false),
        (Model::Lms { intercept, slope: Some(s), .. }, Estimator::LmsRegression) => t(vec![*intercept, *s], false),
        (Model::HoughLine { beta, .. }, Estimator::Hough { .. }) => t(beta.to_vec(), false),
        (Model::MinvolPred { rho, sigma }, Estimator::MinVolume { c, alpha, .. }) => {
            t(vec![minvol_truth(*rho, *sigma, *c, *alpha).0], false)
        }
        (Model::MonotoneDensity { rate, .. }, Estimator::Grenander { at }) => t(vec![rate * (-rate * at).exp()], false),
        _ => Err(Error::InvalidInput(format!(
            "estimator '{}' has no known estimand under model '{}'",
            est.id(),
            model.id()
        ))),
    }
}

/// Level-set estimation for the interval-regressor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    /// Parameter grid, `lo:hi:count`.
    #[serde(default = "default_set_grid")]
    pub grid: String,
    #[serde(default = "default_nuisance")]
    pub nuisance: BandwidthRule,
    /// `None` selects `log n`.
    #[serde(default)]
    pub cutoff: Option<f64>,
}

fn default_set_grid() -> String {
    "-4:6:201".into()
}

fn default_nuisance() -> BandwidthRule {
    BandwidthRule { c: 1.0, a: 1.0 / 7.0 }
}

impl Default for SetConfig {
    fn default() -> Self {
        SetConfig { grid: default_set_grid(), nuisance: default_nuisance(), cutoff: None }
    }
}

impl SetConfig {
    pub fn parse_grid(&self) -> Result<Grid> {
        self.grid.parse()
    }
}

/// Identified set as grid nodes; the node nearest the interval midpoint when
/// the interval falls between nodes.
pub fn identified_nodes(grid: &Grid, lo: f64, hi: f64) -> GridSet {
    let set = GridSet::from_predicate(grid.clone(), |t| t[0] >= lo && t[0] <= hi);
    if !set.is_empty() {
        return set;
    }
    let mid = 0.5 * (lo + hi);
    let best = grid
        .nodes()
        .enumerate()
        .min_by(|a, b| (a.1[0] - mid).abs().total_cmp(&(b.1[0] - mid).abs()))
        .map_or(0, |(i, _)| i);
    let mut mask = vec![false; grid.len()];
    mask[best] = true;
    GridSet::new(grid.clone(), mask).expect("mask matches grid")
}

fn interval_model_set(model: &Model) -> Result<(f64, f64)> {
    match *model {
        Model::IntervalBinary { theta, width, w_mean, w_sd, .. } => Ok(interval_identified_set(theta, width, w_mean, w_sd)),
        _ => Err(Error::InvalidInput(format!("set estimation needs the interval_binary model, got '{}'", model.id()))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    Point(Estimator),
    Set(SetConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub model: Model,
    pub procedure: Procedure,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub bandwidth: f64,
    pub effective_size: f64,
    pub rmse: f64,
    pub median_error: f64,
    pub reps: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub slope_se: f64,
    pub target_slope: f64,
    pub rate_family: RateFamily,
}

/// Ordinary least squares slope of `y` on `x` with its standard error.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let k = x.len();
    if k < 3 || y.len() != k {
        return Err(Error::InvalidInput(format!("slope fit needs at least 3 paired points, got {k}")));
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    Ok((slope, (rss / (k - 2) as f64 / sxx).sqrt()))
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(Error::TooManyFailures { failed, total });
    }
    Ok(())
}

/// Rate fit from a per-replication error function `error(n, seed)`. The
/// replication seed is `derive_seed(derive_seed(seed, n), r)`.
pub fn rate_experiment_with<F>(
    n_values: &[usize],
    reps: usize,
    seed: u64,
    family: RateFamily,
    bandwidth: BandwidthRule,
    error: F,
) -> Result<RateReport>
where
    F: Fn(usize, u64) -> Result<f64> + Sync,
{
    let mut distinct = n_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || distinct.len() != n_values.len() {
        return Err(Error::InvalidInput("rate experiments need at least 3 distinct sample sizes".into()));
    }
    if reps < 50 {
        return Err(Error::InvalidInput(format!("rate experiments need at least 50 replications, got {reps}")));
    }
    let tasks: Vec<(usize, usize)> = (0..n_values.len()).flat_map(|i| (0..reps).map(move |r| (i, r))).collect();
    let results: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(i, r)| {
            let n = n_values[i];
            error(n, derive_seed(derive_seed(seed, n as u64), r as u64))
        })
        .collect();
    let failed = results.iter().filter(|r| r.is_err()).count();
    check_failures(failed, results.len())?;
    let mut rows = Vec::with_capacity(n_values.len());
    for (i, &n) in n_values.iter().enumerate() {
        let mut errs: Vec<f64> = results[i * reps..(i + 1) * reps].iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        if errs.is_empty() {
            return Err(Error::TooManyFailures { failed: reps, total: reps });
        }
        errs.sort_by(f64::total_cmp);
        let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        let m = errs.len();
        let median = if m % 2 == 1 { errs[m / 2] } else { 0.5 * (errs[m / 2 - 1] + errs[m / 2]) };
        let h = bandwidth.at(n);
        rows.push(RateRow {
            n,
            bandwidth: h,
            effective_size: family.size(n, h),
            rmse,
            median_error: median,
            reps: m,
            failures: reps - m,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.effective_size.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.rmse.ln()).collect();
    let (slope, slope_se) = ols_slope(&x, &y)?;
    Ok(RateReport { rows, slope, slope_se, target_slope: TARGET_SLOPE, rate_family: family })
}

/// Set estimation error `rho(Theta_hat, Theta_I)` for one replication.
pub fn set_error(model: &Model, cfg: &SetConfig, n: usize, seed: u64) -> Result<f64> {
    let (lo, hi) = interval_model_set(model)?;
    let grid = cfg.parse_grid()?;
    let sample = generate(model, n, seed)?;
    let est = manski_tamer_set(&sample, &grid, cfg.nuisance, cfg.cutoff)?;
    rho(&est.set, &identified_nodes(&grid, lo, hi))
}

pub fn rate_experiment(cfg: &RateConfig) -> Result<RateReport> {
    match &cfg.procedure {
        Procedure::Point(est) => {
            let truth = truth_for(&cfg.model, est)?;
            rate_experiment_with(&cfg.n_values, cfg.reps, cfg.seed, est.rate_family(), est.bandwidth_rule(), |n, s| {
                let sample = generate(&cfg.model, n, s)?;
                truth.error(&est.estimate(&sample)?.theta)
            })
        }
        Procedure::Set(set) => {
            interval_model_set(&cfg.model)?;
            set.parse_grid()?;
            rate_experiment_with(&cfg.n_values, cfg.reps, cfg.seed, RateFamily::NhOverLog, BandwidthRule::UNIT, |n, s| {
                set_error(&cfg.model, set, n, s)
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub reps: usize,
    pub covered: usize,
    pub failures: usize,
    pub coverage: f64,
    /// Binomial standard error of `coverage`.
    pub std_error: f64,
}

/// Coverage frequency of `covers(seed)` over `reps` replications with seeds
/// `derive_seed(seed, r)`.
pub fn coverage_of<F>(reps: usize, seed: u64, covers: F) -> Result<CoverageReport>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    if reps < 100 {
        return Err(Error::InvalidInput(format!("coverage experiments need at least 100 replications, got {reps}")));
    }
    let results: Vec<Result<bool>> = (0..reps).into_par_iter().map(|r| covers(derive_seed(seed, r as u64))).collect();
    let failures = results.iter().filter(|r| r.is_err()).count();
    check_failures(failures, reps)?;
    let ok = reps - failures;
    let covered = results.iter().filter(|r| matches!(r, Ok(true))).count();
    let p = covered as f64 / ok as f64;
    Ok(CoverageReport { reps: ok, covered, failures, coverage: p, std_error: (p * (1.0 - p) / ok as f64).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum CoverageTarget {
    /// Truth inside the subsampling interval in every coordinate.
    Subsample {
        estimator: Estimator,
        #[serde(default)]
        block_len: Option<usize>,
        alpha: f64,
    },
    /// Grid node nearest the truth inside the criterion-based set.
    ConfSet {
        estimator: Estimator,
        grid: String,
        #[serde(default)]
        block_len: Option<usize>,
        alpha: f64,
    },
    /// Identified set contained in the level-set estimate.
    SetContainment(SetConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub model: Model,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub target: CoverageTarget,
}

fn nearest_node(grid: &Grid, theta: &[f64]) -> usize {
    let d = |p: &[f64]| p.iter().zip(theta).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    grid.nodes()
        .enumerate()
        .min_by(|a, b| d(&a.1).total_cmp(&d(&b.1)))
        .map_or(0, |(i, _)| i)
}

pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<CoverageReport> {
    let (model, n) = (&cfg.model, cfg.n);
    match &cfg.target {
        CoverageTarget::Subsample { estimator, block_len, alpha } => {
            let truth = truth_for(model, estimator)?;
            let s = block_len.unwrap_or_else(|| default_block_len(n));
            coverage_of(cfg.reps, cfg.seed, |seed| {
                let ci = subsample_ci(&generate(model, n, seed)?, estimator, s, *alpha, false)?;
                Ok(truth.theta.iter().enumerate().all(|(k, t)| ci.lower[k] <= *t && *t <= ci.upper[k]))
            })
        }
        CoverageTarget::ConfSet { estimator, grid, block_len, alpha } => {
            let truth = truth_for(model, estimator)?;
            let grid: Grid = grid.parse()?;
            let node = nearest_node(&grid, &truth.theta);
            let s = block_len.unwrap_or_else(|| default_block_len(n));
            coverage_of(cfg.reps, cfg.seed, |seed| {
                let cs = criterion_confidence_set(&generate(model, n, seed)?, estimator, &grid, s, *alpha)?;
                Ok(cs.set.mask[node])
            })
        }
        CoverageTarget::SetContainment(set) => {
            let (lo, hi) = interval_model_set(model)?;
            let grid = set.parse_grid()?;
            let target = identified_nodes(&grid, lo, hi);
            coverage_of(cfg.reps, cfg.seed, |seed| {
                let est = manski_tamer_set(&generate(model, n, seed)?, &grid, set.nuisance, set.cutoff)?;
                Ok(target.is_subset_of(&est.set))
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub model: Model,
    pub estimator: Estimator,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Grid half-width `K`.
    pub radius: f64,
    /// Grid points per axis.
    pub points: usize,
    /// Limit-law draws `M`.
    pub draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    /// KS distance per coordinate.
    pub ks: Vec<f64>,
    pub boundary_mass: f64,
    pub failures: usize,
    /// `(effective size)^{1/3} (theta_hat - theta_0)` per replication.
    pub scaled: Vec<Vec<f64>>,
}

/// Coordinatewise KS distances between normalized estimates and an argmax
/// sample.
pub fn compare_with_limit(scaled: &[Vec<f64>], limit: &ArgmaxSample) -> Result<Vec<f64>> {
    let d = limit.draws.first().map_or(0, Vec::len);
    (0..d)
        .map(|k| {
            let a: Vec<f64> = scaled.iter().map(|v| v[k]).collect();
            ks_distance(&a, &limit.coordinate(k))
        })
        .collect()
}

pub fn limit_comparison(cfg: &LimitConfig) -> Result<LimitReport> {
    let est = &cfg.estimator;
    let truth = truth_for(&cfg.model, est)?;
    if truth.spherical {
        return Err(Error::InvalidInput("limit comparison needs a Euclidean parameter".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidInput("limit comparison needs at least one replication".into()));
    }
    let spec = limit_spec_for(&cfg.model, est, cfg.radius, cfg.points)?;
    spec.grid()?;
    let tau = est.effective_size(cfg.n).cbrt();
    let base = derive_seed(cfg.seed, 0);
    let results: Vec<Result<Vec<f64>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let sample = generate(&cfg.model, cfg.n, derive_seed(base, r as u64))?;
            let th = est.estimate(&sample)?.theta;
            Ok(th.iter().zip(&truth.theta).map(|(a, b)| tau * (a - b)).collect())
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_err()).count();
    check_failures(failures, cfg.reps)?;
    let scaled: Vec<Vec<f64>> = results.into_iter().filter_map(Result::ok).collect();
    let limit = simulate_argmax_law(&spec, cfg.draws, derive_seed(cfg.seed, 1))?;
    Ok(LimitReport { ks: compare_with_limit(&scaled, &limit)?, boundary_mass: limit.boundary_mass, failures, scaled })
}
