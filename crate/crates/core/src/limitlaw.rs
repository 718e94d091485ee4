//! Argmax of a Gaussian process with quadratic drift `s'Vs/2` and covariance
//! kernel `H`, simulated on a grid.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dgp::Model;
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::gridset::{linspace, Grid};
use crate::rng::{derive_seed, stream};

pub const MAX_NODES: usize = 100_000;
pub const PLUG_IN_DRAWS: usize = 1_000_000;
pub const PLUG_IN_SEED: u64 = 0x5EED_F1A3;
const ANGLE_TABLE: usize = 256;

pub trait CovarianceKernel: Send + Sync + Debug {
    fn cov(&self, s1: &[f64], s2: &[f64]) -> f64;

    /// True when the kernel vanishes identically.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroKernel;

impl CovarianceKernel for ZeroKernel {
    fn cov(&self, _: &[f64], _: &[f64]) -> f64 {
        0.0
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `u -> P|x'u|` from simulated draws of `x`; for `d = 2` through a table
/// over the direction of `u` with linear interpolation.
#[derive(Debug, Clone)]
pub enum AbsMoment {
    Scalar(f64),
    Planar(Vec<f64>),
}

impl AbsMoment {
    pub fn from_draws(draws: &[Vec<f64>]) -> Result<Self> {
        let d = draws.first().map_or(0, Vec::len);
        let n = draws.len() as f64;
        match d {
            1 => Ok(AbsMoment::Scalar(draws.iter().map(|x| x[0].abs()).sum::<f64>() / n)),
            2 => {
                let table = (0..=ANGLE_TABLE)
                    .map(|k| {
                        let a = PI * k as f64 / ANGLE_TABLE as f64;
                        let (c, s) = (a.cos(), a.sin());
                        draws.iter().map(|x| (x[0] * c + x[1] * s).abs()).sum::<f64>() / n
                    })
                    .collect();
                Ok(AbsMoment::Planar(table))
            }
            _ => Err(Error::InvalidInput(format!("absolute moments are implemented for d = 1, 2, got {d}"))),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            AbsMoment::Scalar(m) => m * u[0].abs(),
            AbsMoment::Planar(table) => {
                let r = u[0].hypot(u[1]);
                if r == 0.0 {
                    return 0.0;
                }
                // |x'u| is even in u, so fold the angle into [0, pi].
                let a = u[1].atan2(u[0]).rem_euclid(PI);
                let pos = a / PI * ANGLE_TABLE as f64;
                let k = (pos.floor() as usize).min(ANGLE_TABLE - 1);
                let f = pos - k as f64;
                r * (table[k] * (1.0 - f) + table[k + 1] * f)
            }
        }
    }
}

/// Moments of the regressor law used by the kernel builders.
#[derive(Debug, Clone)]
pub struct PlugIn {
    pub abs: AbsMoment,
    /// `P x x'`.
    pub second: DMatrix<f64>,
    /// `P |x| x x'`.
    pub weighted_second: DMatrix<f64>,
}

impl PlugIn {
    pub fn from_draws(draws: &[Vec<f64>]) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidInput("no regressor draws".into()));
        }
        let d = draws[0].len();
        let n = draws.len() as f64;
        let mut second = DMatrix::zeros(d, d);
        let mut weighted = DMatrix::zeros(d, d);
        for x in draws {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..d {
                for j in 0..d {
                    second[(i, j)] += x[i] * x[j] / n;
                    weighted[(i, j)] += norm * x[i] * x[j] / n;
                }
            }
        }
        Ok(PlugIn { abs: AbsMoment::from_draws(draws)?, second, weighted_second: weighted })
    }

    /// `x = 1`.
    pub fn location() -> Self {
        Self::from_draws(&[vec![1.0]]).expect("one draw")
    }

    /// `x = (1, z)` with `z ~ N(0, 1)`, from [`PLUG_IN_DRAWS`] draws.
    pub fn intercept_normal() -> Self {
        let mut rng = stream(PLUG_IN_SEED);
        let draws: Vec<Vec<f64>> = (0..PLUG_IN_DRAWS).map(|_| vec![1.0, rng.sample(StandardNormal)]).collect();
        Self::from_draws(&draws).expect("nonempty draws")
    }
}

/// `H(s1, s2) = (L(s1, 0) + L(0, s2) - L(s1, s2)) / 2` with
/// `L(s1, s2) = scale * P|x'(s1 - s2)|`.
#[derive(Debug, Clone)]
pub struct AbsKernel {
    pub scale: f64,
    pub abs: AbsMoment,
}

impl AbsKernel {
    fn l(&self, u: &[f64]) -> f64 {
        self.scale * self.abs.eval(u)
    }
}

impl CovarianceKernel for AbsKernel {
    fn cov(&self, s1: &[f64], s2: &[f64]) -> f64 {
        let diff: Vec<f64> = s1.iter().zip(s2).map(|(a, b)| a - b).collect();
        0.5 * (self.l(s1) + self.l(s2) - self.l(&diff))
    }
}

/// Normal error law, optionally truncated to `[-bound, bound]`, with its
/// density derivatives.
#[derive(Debug, Clone, Copy)]
pub struct NormalErrors {
    pub sigma: f64,
    pub bound: Option<f64>,
}

impl NormalErrors {
    fn norm(&self) -> f64 {
        match self.bound {
            Some(c) => {
                let phi = Normal::standard();
                phi.cdf(c / self.sigma) - phi.cdf(-c / self.sigma)
            }
            None => 1.0,
        }
    }

    fn base(&self, u: f64) -> f64 {
        if self.bound.is_some_and(|c| u.abs() > c) {
            return 0.0;
        }
        let z = u / self.sigma;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.sigma * self.norm())
    }

    pub fn density(&self, u: f64) -> f64 {
        self.base(u)
    }

    pub fn d1(&self, u: f64) -> f64 {
        -u / (self.sigma * self.sigma) * self.base(u)
    }

    pub fn d2(&self, u: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (u * u / (s2 * s2) - 1.0 / s2) * self.base(u)
    }
}

#[derive(Debug, Clone)]
pub struct LimitLawSpec {
    pub d: usize,
    /// Drift matrix, row-major.
    pub v: DMatrix<f64>,
    pub kernel: Arc<dyn CovarianceKernel>,
    pub radius: f64,
    pub points: usize,
}

impl LimitLawSpec {
    pub fn new(v: DMatrix<f64>, kernel: Arc<dyn CovarianceKernel>, radius: f64, points: usize) -> Result<Self> {
        let d = v.nrows();
        if d == 0 || v.ncols() != d {
            return Err(Error::InvalidInput("drift matrix must be square".into()));
        }
        if (&v - v.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidInput("drift matrix must be symmetric".into()));
        }
        if !v.symmetric_eigenvalues().iter().all(|&e| e < 0.0) {
            return Err(Error::InvalidInput("drift matrix must be negative definite".into()));
        }
        if !(radius.is_finite() && radius > 0.0) || points < 2 {
            return Err(Error::InvalidInput("grid needs a positive radius and at least 2 points per axis".into()));
        }
        let spec = LimitLawSpec { d, v, kernel, radius, points };
        for (a, b) in spec.probe_pairs() {
            let (hab, hba) = (spec.kernel.cov(&a, &b), spec.kernel.cov(&b, &a));
            if (hab - hba).abs() > 1e-12 * (1.0 + hab.abs()) || spec.kernel.cov(&a, &a) < -1e-12 {
                return Err(Error::InvalidInput("covariance kernel must be symmetric with H(s, s) >= 0".into()));
            }
        }
        Ok(spec)
    }

    fn probe_pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let r = self.radius;
        let probes: Vec<Vec<f64>> = (0..5)
            .map(|k| (0..self.d).map(|i| r * (((k * 7 + i * 3) % 11) as f64 / 5.0 - 1.0)).collect())
            .collect();
        let mut pairs = Vec::new();
        for a in &probes {
            for b in &probes {
                pairs.push((a.clone(), b.clone()));
            }
        }
        pairs
    }

    pub fn grid(&self) -> Result<Grid> {
        let nodes = (self.points as f64).powi(self.d as i32);
        if nodes > MAX_NODES as f64 {
            return Err(Error::GridTooLarge { nodes: nodes as usize, limit: MAX_NODES });
        }
        let axis = linspace(-self.radius, self.radius, self.points)?;
        Grid::new(vec![axis; self.d])
    }

    pub fn drift(&self, s: &[f64]) -> f64 {
        let sv = DVector::from_column_slice(s);
        0.5 * (sv.transpose() * &self.v * &sv)[(0, 0)]
    }

    pub fn with_grid(&self, radius: f64, points: usize) -> Result<Self> {
        Self::new(self.v.clone(), self.kernel.clone(), radius, points)
    }
}

fn check_density(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDensity(format!("{name} is not finite")))
    }
}

/// Least median of squares: `L = 2 gamma(nu0) P|x'(s1 - s2)|`,
/// `V = 2 gamma'(nu0) P x x'`.
pub fn build_kernel_lms(gamma: f64, gamma_dot: f64, plug: &PlugIn, radius: f64, points: usize) -> Result<LimitLawSpec> {
    check_density("gamma", gamma)?;
    check_density("gamma derivative", gamma_dot)?;
    if gamma <= 0.0 {
        return Err(Error::InvalidDensity(format!("error density must be positive at the half-width, got {gamma}")));
    }
    if gamma_dot >= 0.0 {
        return Err(Error::InvalidDensity(format!("error density must be decreasing at the half-width, got slope {gamma_dot}")));
    }
    let kernel = AbsKernel { scale: 2.0 * gamma, abs: plug.abs.clone() };
    LimitLawSpec::new(&plug.second * (2.0 * gamma_dot), Arc::new(kernel), radius, points)
}

/// Hough transform: `L = 2 gamma(0) P|x'(s1 - s2)|`, `V = gamma''(0) P(|x| x x')`.
pub fn build_kernel_hough(gamma0: f64, gamma_ddot0: f64, plug: &PlugIn, radius: f64, points: usize) -> Result<LimitLawSpec> {
    check_density("gamma", gamma0)?;
    check_density("gamma second derivative", gamma_ddot0)?;
    if gamma0 <= 0.0 {
        return Err(Error::InvalidDensity(format!("error density must be positive at 0, got {gamma0}")));
    }
    if gamma_ddot0 >= 0.0 {
        return Err(Error::InvalidDensity(format!("error density must have a strict mode at 0, got curvature {gamma_ddot0}")));
    }
    let kernel = AbsKernel { scale: 2.0 * gamma0, abs: plug.abs.clone() };
    LimitLawSpec::new(&plug.weighted_second * gamma_ddot0, Arc::new(kernel), radius, points)
}

/// Limit law of the normalized estimator for the supported model pairs.
pub fn limit_spec_for(model: &Model, est: &Estimator, radius: f64, points: usize) -> Result<LimitLawSpec> {
    match (est, model) {
        (Estimator::LmsLocation, Model::Lms { sigma, slope: None, .. })
        | (Estimator::LmsRegression, Model::Lms { sigma, slope: Some(_), .. }) => {
            let errors = NormalErrors { sigma: *sigma, bound: None };
            // Half the shortest interval holding half the mass.
            let nu0 = sigma * Normal::standard().inverse_cdf(0.75);
            let plug = if matches!(est, Estimator::LmsLocation) { PlugIn::location() } else { PlugIn::intercept_normal() };
            build_kernel_lms(errors.density(nu0), errors.d1(nu0), &plug, radius, points)
        }
        (Estimator::Hough { .. }, Model::HoughLine { .. }) => {
            let errors = NormalErrors { sigma: 1.0, bound: Some(5.0) };
            build_kernel_hough(errors.density(0.0), errors.d2(0.0), &PlugIn::intercept_normal(), radius, points)
        }
        _ => Err(Error::InvalidInput(format!(
            "no limit law is implemented for estimator '{}' on model '{}'",
            est.id(),
            model.id()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxSample {
    /// Argmax node per draw.
    pub draws: Vec<Vec<f64>>,
    /// Fraction of draws whose argmax sits on the grid boundary.
    pub boundary_mass: f64,
    pub jitter: f64,
    pub nodes: usize,
}

impl ArgmaxSample {
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[k]).collect()
    }
}

/// Lower Cholesky factor of `c + jitter I`, escalating the jitter from 1e-10
/// by factors of 10 up to 1e-6.
pub fn jittered_cholesky(c: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let mut jitter = 1e-10;
    loop {
        let mut m = c.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok((ch.l(), jitter));
        }
        if jitter >= 1e-6 {
            return Err(Error::FactorizationFailure { jitter });
        }
        jitter *= 10.0;
    }
}

/// Draws `m` paths of `Z(s) = G(s) + s'Vs/2` on the grid and records each
/// argmax node (ties to the lexicographically smallest node).
pub fn simulate_argmax_law(spec: &LimitLawSpec, m: usize, seed: u64) -> Result<ArgmaxSample> {
    let grid = spec.grid()?;
    let nodes: Vec<Vec<f64>> = grid.nodes().collect();
    let g = nodes.len();
    let drift: Vec<f64> = nodes.iter().map(|s| spec.drift(s)).collect();
    let factor = if spec.kernel.is_zero() {
        None
    } else {
        let mut c = DMatrix::zeros(g, g);
        for i in 0..g {
            for j in 0..=i {
                let v = spec.kernel.cov(&nodes[i], &nodes[j]);
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        Some(jittered_cholesky(&c)?)
    };
    let jitter = factor.as_ref().map_or(0.0, |f| f.1);
    let idx: Vec<usize> = (0..m)
        .into_par_iter()
        .map(|r| {
            let path: Vec<f64> = match &factor {
                None => drift.clone(),
                Some((l, _)) => {
                    let mut rng = stream(derive_seed(seed, r as u64));
                    let z = DVector::from_fn(g, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let noise = l * z;
                    noise.iter().zip(&drift).map(|(a, b)| a + b).collect()
                }
            };
            let mut best = 0;
            for i in 1..g {
                if path[i] > path[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    let edge = |s: &[f64]| s.iter().any(|v| v.abs() >= spec.radius);
    let draws: Vec<Vec<f64>> = idx.iter().map(|&i| nodes[i].clone()).collect();
    let boundary = draws.iter().filter(|s| edge(s)).count();
    Ok(ArgmaxSample { boundary_mass: boundary as f64 / m.max(1) as f64, draws, jitter, nodes: g })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS distance needs two nonempty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Type-1 quantiles of each coordinate.
pub fn summary_quantiles(sample: &ArgmaxSample, probs: &[f64]) -> Vec<Vec<f64>> {
    let d = sample.draws.first().map_or(0, Vec::len);
    (0..d)
        .map(|k| {
            let mut c = sample.coordinate(k);
            c.sort_by(f64::total_cmp);
            probs.iter().map(|&p| crate::inference::quantile_type1(&c, p)).collect()
        })
        .collect()
}
