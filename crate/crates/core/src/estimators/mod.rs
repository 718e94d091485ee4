//! Estimators: a criterion builder composed with an optimizer.
//!
//! Criteria are sample averages `P_n f_{n,theta}` with the localization
//! weight scaled by `1/h`, so `(effective size)^{2/3}` times a criterion gap
//! is `O_p(1)` at the truth.

mod grenander;
mod hough;
mod location;
mod manski;
mod score;

pub use grenander::{grenander_at, grenander_slopes};
pub use hough::{hough_estimate, hough_slabs};
pub use location::{lms_location, lms_regression, min_volume_region, shorth, IntervalEstimate};
pub use manski::{manski_tamer_set, nadaraya_watson, SetEstimate};
pub use score::{honore_kyriazidou, localized_max_score, max_score, regressor_columns};

use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthRule;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::optim::OptimizerReport;
use crate::sample::TimeSeriesSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub theta: Vec<f64>,
    /// Criterion at `theta`.
    pub value: f64,
    /// Size governing the rate: `n h_n`, or `n h_n^2` for the Hough estimator.
    pub effective_size: f64,
    pub bandwidth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<OptimizerReport>,
}

/// How the rate's effective size depends on `n` and `h_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFamily {
    /// `n h_n`.
    Nh,
    /// `n h_n / log(n h_n)`.
    NhOverLog,
    /// `n h_n^2`.
    Nh2,
}

impl RateFamily {
    pub fn size(self, n: usize, h: f64) -> f64 {
        let nh = n as f64 * h;
        match self {
            RateFamily::Nh => nh,
            RateFamily::NhOverLog => nh / nh.ln(),
            RateFamily::Nh2 => nh * h,
        }
    }
}

fn hk_bandwidth() -> BandwidthRule {
    BandwidthRule { c: 1.0, a: 0.24 }
}
fn localized_bandwidth() -> BandwidthRule {
    BandwidthRule { c: 1.0, a: 0.125 }
}
fn minvol_bandwidth() -> BandwidthRule {
    BandwidthRule { c: 1.0, a: 0.2 }
}
fn hough_bandwidth() -> BandwidthRule {
    BandwidthRule { c: 1.0, a: 0.19 }
}
fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}

/// Estimator choice with its tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    MaxScore,
    HonoreKyriazidou {
        #[serde(default)]
        kernel: Kernel,
        #[serde(default = "hk_bandwidth")]
        bandwidth: BandwidthRule,
    },
    LocalizedMaxScore {
        #[serde(default)]
        c: f64,
        #[serde(default)]
        kernel: Kernel,
        #[serde(default = "localized_bandwidth")]
        bandwidth: BandwidthRule,
    },
    MinVolume {
        #[serde(default)]
        c: f64,
        #[serde(default = "half")]
        alpha: f64,
        #[serde(default)]
        kernel: Kernel,
        #[serde(default = "minvol_bandwidth")]
        bandwidth: BandwidthRule,
    },
    LmsLocation,
    LmsRegression,
    Hough {
        #[serde(default = "hough_bandwidth")]
        bandwidth: BandwidthRule,
    },
    Grenander {
        #[serde(default = "one")]
        at: f64,
    },
}

pub const ESTIMATOR_IDS: [&str; 8] = [
    "max_score",
    "honore_kyriazidou",
    "localized_max_score",
    "min_volume",
    "lms_location",
    "lms_regression",
    "hough",
    "grenander",
];

/// Sample criterion ready for repeated evaluation.
pub struct Criterion {
    eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub effective_size: f64,
}

impl Criterion {
    pub fn eval(&self, theta: &[f64]) -> f64 {
        (self.eval)(theta)
    }
}

impl Estimator {
    pub fn id(&self) -> &'static str {
        match self {
            Estimator::MaxScore => "max_score",
            Estimator::HonoreKyriazidou { .. } => "honore_kyriazidou",
            Estimator::LocalizedMaxScore { .. } => "localized_max_score",
            Estimator::MinVolume { .. } => "min_volume",
            Estimator::LmsLocation => "lms_location",
            Estimator::LmsRegression => "lms_regression",
            Estimator::Hough { .. } => "hough",
            Estimator::Grenander { .. } => "grenander",
        }
    }

    /// Estimator with default tuning.
    pub fn default_for(id: &str) -> Result<Self> {
        serde_json::from_value(serde_json::json!({ "estimator": id }))
            .map_err(|e| Error::InvalidInput(format!("unknown estimator '{id}': {e}")))
    }

    pub fn bandwidth_rule(&self) -> BandwidthRule {
        match *self {
            Estimator::HonoreKyriazidou { bandwidth, .. }
            | Estimator::LocalizedMaxScore { bandwidth, .. }
            | Estimator::MinVolume { bandwidth, .. }
            | Estimator::Hough { bandwidth } => bandwidth,
            _ => BandwidthRule::UNIT,
        }
    }

    /// Replaces the bandwidth rule of localized estimators.
    pub fn with_bandwidth(mut self, rule: BandwidthRule) -> Self {
        match &mut self {
            Estimator::HonoreKyriazidou { bandwidth, .. }
            | Estimator::LocalizedMaxScore { bandwidth, .. }
            | Estimator::MinVolume { bandwidth, .. }
            | Estimator::Hough { bandwidth } => *bandwidth = rule,
            _ => {}
        }
        self
    }

    /// Replaces the kernel of kernel-weighted estimators.
    pub fn with_kernel(mut self, k: Kernel) -> Self {
        match &mut self {
            Estimator::HonoreKyriazidou { kernel, .. }
            | Estimator::LocalizedMaxScore { kernel, .. }
            | Estimator::MinVolume { kernel, .. } => *kernel = k,
            _ => {}
        }
        self
    }

    pub fn rate_family(&self) -> RateFamily {
        match self {
            Estimator::Hough { .. } => RateFamily::Nh2,
            _ => RateFamily::Nh,
        }
    }

    pub fn effective_size(&self, n: usize) -> f64 {
        self.rate_family().size(n, self.bandwidth_rule().at(n))
    }

    pub fn validate(&self) -> Result<()> {
        self.bandwidth_rule().validate()?;
        match *self {
            Estimator::MinVolume { alpha, c, .. } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidInput("conditioning point must be finite".into()));
                }
            }
            Estimator::LocalizedMaxScore { c, .. } if !c.is_finite() => {
                return Err(Error::InvalidInput("conditioning point must be finite".into()));
            }
            Estimator::Grenander { at } if !(at > 0.0 && at.is_finite()) => {
                return Err(Error::InvalidInput(format!("evaluation point must be positive, got {at}")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn estimate(&self, sample: &TimeSeriesSample) -> Result<PointEstimate> {
        self.validate()?;
        match *self {
            Estimator::MaxScore => max_score(sample),
            Estimator::HonoreKyriazidou { kernel, bandwidth } => honore_kyriazidou(sample, kernel, bandwidth),
            Estimator::LocalizedMaxScore { c, kernel, bandwidth } => localized_max_score(sample, c, kernel, bandwidth),
            Estimator::MinVolume { c, alpha, kernel, bandwidth } => {
                min_volume_region(sample, c, alpha, kernel, bandwidth).map(IntervalEstimate::into_point)
            }
            Estimator::LmsLocation => lms_location(sample.column("y")?),
            Estimator::LmsRegression => lms_regression(sample),
            Estimator::Hough { bandwidth } => hough_estimate(sample, bandwidth),
            Estimator::Grenander { at } => {
                let z = sample.column("z")?;
                let v = grenander_at(z, at)?;
                Ok(PointEstimate {
                    theta: vec![v],
                    value: v,
                    effective_size: z.len() as f64,
                    bandwidth: 1.0,
                    nu_hat: None,
                    coverage: None,
                    report: None,
                })
            }
        }
    }

    /// The sample criterion `theta -> P_n f_{n,theta}`. Nuisance quantities
    /// (such as a fitted half-width) are computed once from `sample`.
    pub fn criterion(&self, sample: &TimeSeriesSample) -> Result<Criterion> {
        self.validate()?;
        let n = sample.n();
        let effective_size = self.effective_size(n);
        let eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync> = match *self {
            Estimator::MaxScore => Box::new(score::max_score_criterion(sample)?),
            Estimator::HonoreKyriazidou { kernel, bandwidth } => {
                Box::new(score::hk_criterion(sample, kernel, bandwidth)?)
            }
            Estimator::LocalizedMaxScore { c, kernel, bandwidth } => {
                Box::new(score::localized_criterion(sample, c, kernel, bandwidth)?)
            }
            Estimator::MinVolume { c, alpha, kernel, bandwidth } => {
                Box::new(location::min_volume_criterion(sample, c, alpha, kernel, bandwidth)?)
            }
            Estimator::LmsLocation => Box::new(location::lms_location_criterion(sample)?),
            Estimator::LmsRegression => Box::new(location::lms_regression_criterion(sample)?),
            Estimator::Hough { bandwidth } => Box::new(hough::hough_criterion(sample, bandwidth)?),
            Estimator::Grenander { .. } => {
                return Err(Error::InvalidInput("the density estimator has no criterion to invert".into()))
            }
        };
        Ok(Criterion { eval, effective_size })
    }
}

/// `Q_n(theta) = (effective size)^{2/3} (max P_n f - P_n f_theta)`, with the
/// maximum taken at the estimate.
pub fn criterion_gap(sample: &TimeSeriesSample, est: &Estimator, theta: &[f64]) -> Result<f64> {
    let fit = est.estimate(sample)?;
    let crit = est.criterion(sample)?;
    Ok(gap_from(&crit, fit.value, theta))
}

pub(crate) fn gap_from(crit: &Criterion, max: f64, theta: &[f64]) -> f64 {
    (crit.effective_size.powf(2.0 / 3.0) * (max - crit.eval(theta))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{generate, Model};

    #[test]
    fn default_configs_roundtrip() {
        for id in ESTIMATOR_IDS {
            let e = Estimator::default_for(id).unwrap();
            assert_eq!(e.id(), id);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(serde_json::from_str::<Estimator>(&json).unwrap(), e);
        }
        assert!(Estimator::default_for("bogus").is_err());
    }

    #[test]
    fn criterion_matches_estimate_value() {
        let cases = [
            ("max_score", "max_score"),
            ("localized_max_score", "rc_binary"),
            ("honore_kyriazidou", "panel_hk"),
            ("min_volume", "minvol_pred"),
            ("lms_location", "lms"),
            ("hough", "hough_line"),
        ];
        for (est, model) in cases {
            let e = Estimator::default_for(est).unwrap();
            let s = generate(&Model::default_for(model).unwrap(), 300, 17).unwrap();
            let fit = e.estimate(&s).unwrap();
            let crit = e.criterion(&s).unwrap();
            assert_eq!(crit.eval(&fit.theta), fit.value, "{est}");
            assert_eq!(gap_from(&crit, fit.value, &fit.theta), 0.0);
        }
    }

    #[test]
    fn max_score_gap_by_hand() {
        // Two points; theta = (1, 0) classifies one of them correctly.
        let s = TimeSeriesSample::from_columns(&[
            ("sign_y", vec![1.0, -1.0]),
            ("x1", vec![1.0, 1.0]),
            ("x2", vec![0.5, -0.5]),
        ])
        .unwrap();
        let est = Estimator::MaxScore;
        // Separable: maximum count 2; (1, 0) scores 1; P_n gap = 1/2.
        let q = criterion_gap(&s, &est, &[1.0, 0.0]).unwrap();
        assert!((q - 2f64.powf(2.0 / 3.0) * 0.5).abs() < 1e-12);
        assert!(criterion_gap(&s, &est, &[0.0, 1.0]).unwrap() == 0.0);
    }
}
