//! Seeded data-generating processes.
//!
//! Serial dependence comes from stationary Gaussian AR(1) recursions, which
//! are exponentially beta-mixing; everything else is drawn iid. Each model
//! component reads its own child stream so adding a field never shifts the
//! draws of another.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, Stream};
use crate::sample::TimeSeriesSample;

pub const BURN_IN: usize = 1000;

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn zero() -> f64 {
    0.0
}
fn w_mean() -> f64 {
    -1.5
}
fn two() -> f64 {
    2.0
}
fn diagonal() -> [f64; 2] {
    [std::f64::consts::FRAC_1_SQRT_2; 2]
}
fn hough_beta() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// `x_t = rho x_{t-1} + sigma e_t`.
    Ar1 {
        #[serde(default = "half")]
        rho: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `sign_y = sgn(x' theta + u)`, two AR(1) regressors, logistic `u`.
    MaxScore {
        #[serde(default = "diagonal")]
        theta: [f64; 2],
        #[serde(default = "half")]
        rho: f64,
    },
    /// Dynamic binary panel, periods 0..3.
    PanelHk {
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "half")]
        gamma: f64,
    },
    /// Binary choice with coefficients rotating in `w`:
    /// angle `pi/4 + slope * w`.
    RcBinary {
        #[serde(default = "half")]
        slope: f64,
        #[serde(default = "half")]
        rho: f64,
    },
    /// `y = 1{x theta + w + u >= 0}` with `w ~ N(w_mean, w_sd^2)` observed
    /// only through `[w_l, w_u]` of length `width`. The mean offset centres
    /// the latent index so the criterion is informative on both sides.
    IntervalBinary {
        #[serde(default = "one")]
        theta: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "w_mean")]
        w_mean: f64,
        #[serde(default = "two")]
        w_sd: f64,
        #[serde(default = "half")]
        rho: f64,
    },
    /// Exponential draws with the given rate, dependence through a
    /// Gaussian copula AR(1).
    MonotoneDensity {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "zero")]
        rho: f64,
    },
    /// `y = beta_0 + beta_1 x + u`, `u` standard normal truncated to [-5, 5].
    HoughLine {
        #[serde(default = "hough_beta")]
        beta: [f64; 2],
        #[serde(default = "half")]
        rho: f64,
    },
    /// Pairs `(x_t, x_{t+1})` of an AR(1) path with innovation sd `sigma`.
    MinvolPred {
        #[serde(default = "half")]
        rho: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `y = intercept [+ slope x] + u`, `u` AR(1) with marginal N(0, sigma^2).
    Lms {
        #[serde(default = "zero")]
        intercept: f64,
        #[serde(default)]
        slope: Option<f64>,
        #[serde(default = "half")]
        rho: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn generate(&self) -> Result<TimeSeriesSample> {
        generate(&self.model, self.n, self.seed)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("AR coefficient must lie in (-1, 1), got {rho}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be finite")))
    }
}

impl Model {
    pub fn id(&self) -> &'static str {
        match self {
            Model::Ar1 { .. } => "ar1",
            Model::MaxScore { .. } => "max_score",
            Model::PanelHk { .. } => "panel_hk",
            Model::RcBinary { .. } => "rc_binary",
            Model::IntervalBinary { .. } => "interval_binary",
            Model::MonotoneDensity { .. } => "monotone_density",
            Model::HoughLine { .. } => "hough_line",
            Model::MinvolPred { .. } => "minvol_pred",
            Model::Lms { .. } => "lms",
        }
    }

    /// Model with default parameters.
    pub fn default_for(id: &str) -> Result<Self> {
        serde_json::from_value(serde_json::json!({ "model": id }))
            .map_err(|e| Error::InvalidSpec(format!("unknown model '{id}': {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::Ar1 { rho, sigma } | Model::MinvolPred { rho, sigma } => {
                check_rho(rho)?;
                check_positive("sigma", sigma)
            }
            Model::MaxScore { theta, rho } => {
                check_rho(rho)?;
                let norm = theta[0].hypot(theta[1]);
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSpec(format!("theta must have unit length, got {norm}")));
                }
                Ok(())
            }
            Model::PanelHk { beta, gamma } => {
                check_finite("beta", beta)?;
                check_finite("gamma", gamma)?;
                if beta == 0.0 && gamma == 0.0 {
                    return Err(Error::InvalidSpec("beta and gamma cannot both be zero".into()));
                }
                Ok(())
            }
            Model::RcBinary { slope, rho } => {
                check_finite("slope", slope)?;
                check_rho(rho)
            }
            Model::IntervalBinary { theta, width, w_mean, w_sd, rho } => {
                check_finite("theta", theta)?;
                check_finite("w_mean", w_mean)?;
                check_positive("w_sd", w_sd)?;
                if !(width.is_finite() && width >= 0.0) {
                    return Err(Error::InvalidSpec("width must be nonnegative".into()));
                }
                check_rho(rho)
            }
            Model::MonotoneDensity { rate, rho } => {
                check_positive("rate", rate)?;
                check_rho(rho)
            }
            Model::HoughLine { beta, rho } => {
                check_finite("beta", beta[0])?;
                check_finite("beta", beta[1])?;
                check_rho(rho)
            }
            Model::Lms { intercept, slope, rho, sigma } => {
                check_finite("intercept", intercept)?;
                if let Some(s) = slope {
                    check_finite("slope", s)?;
                }
                check_rho(rho)?;
                check_positive("sigma", sigma)
            }
        }
    }
}

/// Child streams of one generation call.
struct Streams {
    seed: u64,
}

impl Streams {
    fn get(&self, k: u64) -> Stream {
        stream(derive_seed(self.seed, k))
    }

    /// Stationary AR(1) path with N(0, 1) marginals from components `k`
    /// (burn-in) and `k + 1` (output).
    fn gaussian_ar(&self, k: u64, n: usize, rho: f64) -> Vec<f64> {
        let scale = (1.0 - rho * rho).sqrt();
        let mut burn = self.get(k);
        let mut x = 0.0;
        for _ in 0..BURN_IN {
            x = rho * x + scale * burn.sample::<f64, _>(StandardNormal);
        }
        let mut out = self.get(k + 1);
        (0..n)
            .map(|_| {
                x = rho * x + scale * out.sample::<f64, _>(StandardNormal);
                x
            })
            .collect()
    }

    fn iid<F: FnMut(&mut Stream) -> f64>(&self, k: u64, n: usize, mut f: F) -> Vec<f64> {
        let mut s = self.get(k);
        (0..n).map(|_| f(&mut s)).collect()
    }
}

fn normal(s: &mut Stream) -> f64 {
    s.sample(StandardNormal)
}

fn logistic(s: &mut Stream) -> f64 {
    let u: f64 = s.random_range(f64::EPSILON..1.0);
    (u / (1.0 - u)).ln()
}

fn truncated_normal(s: &mut Stream, bound: f64) -> f64 {
    loop {
        let z = normal(s);
        if z.abs() <= bound {
            return z;
        }
    }
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Draws a sample of size `n`; identical arguments give identical output.
pub fn generate(model: &Model, n: usize, seed: u64) -> Result<TimeSeriesSample> {
    model.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    let st = Streams { seed };
    match *model {
        Model::Ar1 { rho, sigma } => {
            // Output innovations come from the parent stream itself.
            let mut burn = st.get(0);
            let mut x = 0.0;
            for _ in 0..BURN_IN {
                x = rho * x + sigma * normal(&mut burn);
            }
            let mut main = stream(seed);
            let path = (0..n)
                .map(|_| {
                    x = rho * x + sigma * normal(&mut main);
                    x
                })
                .collect();
            TimeSeriesSample::from_columns(&[("x", path)])
        }
        Model::MaxScore { theta, rho } => {
            let x1 = st.gaussian_ar(1, n, rho);
            let x2 = st.gaussian_ar(3, n, rho);
            let u = st.iid(5, n, logistic);
            let y = (0..n).map(|t| sign(theta[0] * x1[t] + theta[1] * x2[t] + u[t])).collect();
            TimeSeriesSample::from_columns(&[("sign_y", y), ("x1", x1), ("x2", x2)])
        }
        Model::PanelHk { beta, gamma } => {
            let mut rng = st.get(1);
            let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 7];
            for _ in 0..n {
                let alpha = normal(&mut rng);
                let x = [normal(&mut rng), normal(&mut rng), normal(&mut rng)];
                let xbar = (x[0] + x[1] + x[2]) / 3.0;
                let mut y = [0.0; 4];
                y[0] = if xbar + alpha + logistic(&mut rng) >= 0.0 { 1.0 } else { 0.0 };
                for t in 1..4 {
                    let index = beta * x[t - 1] + gamma * y[t - 1] + alpha + logistic(&mut rng);
                    y[t] = if index >= 0.0 { 1.0 } else { 0.0 };
                }
                for t in 0..4 {
                    cols[t].push(y[t]);
                }
                for t in 0..3 {
                    cols[4 + t].push(x[t]);
                }
            }
            let names = ["y0", "y1", "y2", "y3", "x1", "x2", "x3"];
            TimeSeriesSample::new(names.iter().map(|s| s.to_string()).collect(), cols)
        }
        Model::RcBinary { slope, rho } => {
            let x1 = st.gaussian_ar(1, n, rho);
            let x2 = st.gaussian_ar(3, n, rho);
            let w = st.iid(5, n, normal);
            let u = st.iid(6, n, logistic);
            let y = (0..n)
                .map(|t| {
                    let phi = FRAC_PI_4 + slope * w[t];
                    sign(phi.cos() * x1[t] + phi.sin() * x2[t] + u[t])
                })
                .collect();
            TimeSeriesSample::from_columns(&[("sign_y", y), ("x1", x1), ("x2", x2), ("w", w)])
        }
        Model::IntervalBinary { theta, width, w_mean, w_sd, rho } => {
            let phi = std_normal();
            let x: Vec<f64> = st.gaussian_ar(1, n, rho).into_iter().map(|g| 1.0 + phi.cdf(g)).collect();
            let w = st.iid(3, n, |s| w_mean + w_sd * normal(s));
            let v = st.iid(4, n, |s| s.random::<f64>());
            let u = st.iid(5, n, normal);
            let y = (0..n).map(|t| if x[t] * theta + w[t] + u[t] >= 0.0 { 1.0 } else { 0.0 }).collect();
            let w_l: Vec<f64> = (0..n).map(|t| w[t] - width * v[t]).collect();
            let w_u: Vec<f64> = w_l.iter().map(|l| l + width).collect();
            TimeSeriesSample::from_columns(&[("y", y), ("x", x), ("w_l", w_l), ("w_u", w_u)])
        }
        Model::MonotoneDensity { rate, rho } => {
            let phi = std_normal();
            let z = st
                .gaussian_ar(1, n, rho)
                .into_iter()
                // Upper tail form keeps precision for large g.
                .map(|g| -phi.cdf(-g).ln() / rate)
                .map(|z| if z > 0.0 { z } else { f64::MIN_POSITIVE })
                .collect();
            TimeSeriesSample::from_columns(&[("z", z)])
        }
        Model::HoughLine { beta, rho } => {
            let x = st.gaussian_ar(1, n, rho);
            let u = st.iid(3, n, |s| truncated_normal(s, 5.0));
            let y = (0..n).map(|t| beta[0] + beta[1] * x[t] + u[t]).collect();
            TimeSeriesSample::from_columns(&[("y", y), ("x", x)])
        }
        Model::MinvolPred { rho, sigma } => {
            let sd = sigma / (1.0 - rho * rho).sqrt();
            let path: Vec<f64> = st.gaussian_ar(1, n + 1, rho).into_iter().map(|g| sd * g).collect();
            TimeSeriesSample::from_columns(&[("x", path[..n].to_vec()), ("y", path[1..].to_vec())])
        }
        Model::Lms { intercept, slope, rho, sigma } => {
            let u = st.gaussian_ar(1, n, rho);
            match slope {
                None => TimeSeriesSample::from_columns(&[("y", u.iter().map(|e| intercept + sigma * e).collect())]),
                Some(b) => {
                    let x = st.gaussian_ar(3, n, rho);
                    let y = (0..n).map(|t| intercept + b * x[t] + sigma * u[t]).collect();
                    TimeSeriesSample::from_columns(&[("y", y), ("x", x)])
                }
            }
        }
    }
}

/// Identified interval for `interval_binary`.
///
/// Given `w_l`, `w` has density proportional to its normal density on
/// `[w_l, w_l + width]`, so `q(x, w_l) = P(y = 1 | x, w_l)` is computable by
/// quadrature. With `w*(x)` the root of `q = 1/2` in `w_l`, the identified
/// set is `[sup_x -(w*(x) + width)/x, inf_x -w*(x)/x]` over `x` in [1, 2].
pub fn interval_identified_set(theta: f64, width: f64, w_mean: f64, w_sd: f64) -> (f64, f64) {
    if width == 0.0 {
        return (theta, theta);
    }
    let phi = std_normal();
    let q = |x: f64, wl: f64| {
        let m = 400;
        let h = width / m as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=m {
            let w = wl + i as f64 * h;
            let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let dens = (-0.5 * ((w - w_mean) / w_sd).powi(2)).exp();
            num += c * dens * phi.cdf(x * theta + w);
            den += c * dens;
        }
        num / den
    };
    let root = |x: f64| {
        let (mut a, mut b) = (-x * theta - width - 20.0, -x * theta + 20.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if q(x, m) > 0.5 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..=200 {
        let x = 1.0 + i as f64 / 200.0;
        let r = root(x);
        lo = lo.max(-(r + width) / x);
        hi = hi.min(-r / x);
    }
    (lo, hi)
}

/// Centre and half-width of the shortest `alpha` predictive interval of
/// `x_{t+1}` given `x_t = c` for `minvol_pred`.
pub fn minvol_truth(rho: f64, sigma: f64, c: f64, alpha: f64) -> (f64, f64) {
    (rho * c, sigma * std_normal().inverse_cdf(0.5 * (1.0 + alpha)))
}

/// Direction of `rc_binary` coefficients at `w = c`.
pub fn rc_truth(slope: f64, c: f64) -> [f64; 2] {
    let phi = FRAC_PI_4 + slope * c;
    [phi.cos(), phi.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn iid_ar1_is_raw_innovations() {
        let s = generate(&Model::Ar1 { rho: 0.0, sigma: 1.0 }, 5, 7).unwrap();
        let mut rng = stream(7);
        let raw: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
        assert_eq!(s.column("x").unwrap(), raw.as_slice());
    }

    #[test]
    fn ar1_stationary_variance() {
        let s = generate(&Model::Ar1 { rho: 0.5, sigma: 1.0 }, 100_000, 3).unwrap();
        let x = s.column("x").unwrap();
        let (_, v) = mean_var(x);
        assert!((v - 4.0 / 3.0).abs() < 0.05, "{v}");
        // Halves agree; AR(1) long-run sd of the mean is sigma/(1-rho)/sqrt(n/2).
        let (m1, v1) = mean_var(&x[..50_000]);
        let (m2, v2) = mean_var(&x[50_000..]);
        let se_mean = 2.0 / (25_000.0f64).sqrt();
        assert!((m1 - m2).abs() < 3.0 * se_mean);
        assert!((v1 - v2).abs() < 0.06);
    }

    #[test]
    fn exponential_mean() {
        let s = generate(&Model::default_for("monotone_density").unwrap(), 100_000, 5).unwrap();
        let (m, _) = mean_var(s.column("z").unwrap());
        assert!((m - 1.0).abs() < 0.02, "{m}");
        assert!(s.column("z").unwrap().iter().all(|&z| z > 0.0));
    }

    #[test]
    fn interval_bounds_and_point_identification() {
        let m = Model::default_for("interval_binary").unwrap();
        let s = generate(&m, 2000, 9).unwrap();
        for ((l, u), x) in s.column("w_l").unwrap().iter().zip(s.column("w_u").unwrap()).zip(s.column("x").unwrap()) {
            assert!(l <= u && (u - l - 1.0).abs() < 1e-12);
            assert!((1.0..=2.0).contains(x));
        }
        assert_eq!(interval_identified_set(1.0, 0.0, -1.5, 2.0), (1.0, 1.0));
        let (lo, hi) = interval_identified_set(1.0, 1.0, -1.5, 2.0);
        assert!(lo < 1.0 && hi > 1.0 && hi - lo < 1.0, "{lo} {hi}");
        // Tiny width converges to the point.
        let (lo, hi) = interval_identified_set(1.0, 1e-3, -1.5, 2.0);
        assert!((lo - 1.0).abs() < 1e-3 && (hi - 1.0).abs() < 1e-3);
    }

    #[test]
    fn all_models_are_deterministic_with_expected_schema() {
        let cases = [
            ("ar1", vec!["x"]),
            ("max_score", vec!["sign_y", "x1", "x2"]),
            ("panel_hk", vec!["y0", "y1", "y2", "y3", "x1", "x2", "x3"]),
            ("rc_binary", vec!["sign_y", "x1", "x2", "w"]),
            ("interval_binary", vec!["y", "x", "w_l", "w_u"]),
            ("monotone_density", vec!["z"]),
            ("hough_line", vec!["y", "x"]),
            ("minvol_pred", vec!["x", "y"]),
            ("lms", vec!["y"]),
        ];
        for (id, schema) in cases {
            let m = Model::default_for(id).unwrap();
            assert_eq!(m.id(), id);
            let a = generate(&m, 50, 42).unwrap();
            let b = generate(&m, 50, 42).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.schema(), schema.iter().map(|s| s.to_string()).collect::<Vec<_>>().as_slice());
            assert_ne!(a, generate(&m, 50, 43).unwrap());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(generate(&Model::Ar1 { rho: 1.0, sigma: 1.0 }, 5, 0), Err(Error::InvalidSpec(_))));
        assert!(generate(&Model::MaxScore { theta: [1.0, 1.0], rho: 0.0 }, 5, 0).is_err());
        assert!(Model::default_for("nope").is_err());
        let spec: DgpSpec = serde_json::from_str(r#"{"model":"lms","slope":2.0,"n":10,"seed":1}"#).unwrap();
        assert_eq!(spec.generate().unwrap().schema().len(), 2);
    }

    #[test]
    fn minvol_pairs_are_shifted_path() {
        let s = generate(&Model::default_for("minvol_pred").unwrap(), 100, 1).unwrap();
        assert_eq!(&s.column("x").unwrap()[1..], &s.column("y").unwrap()[..99]);
        let (c, nu) = minvol_truth(0.5, 1.0, 2.0, 0.5);
        assert_eq!(c, 1.0);
        assert!((nu - 0.6744897501960817).abs() < 1e-9);
    }
}
