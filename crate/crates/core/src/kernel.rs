use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Epanechnikov,
    Triangular,
    Boxcar,
    /// Standard normal restricted to `[-r, r]` and renormalized.
    TruncatedGaussian,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] =
        [KernelKind::Epanechnikov, KernelKind::Triangular, KernelKind::Boxcar, KernelKind::TruncatedGaussian];

    fn default_radius(self) -> f64 {
        match self {
            KernelKind::TruncatedGaussian => 4.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Triangular => "triangular",
            KernelKind::Boxcar => "boxcar",
            KernelKind::TruncatedGaussian => "truncated_gaussian",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "triangular" => Ok(KernelKind::Triangular),
            "boxcar" | "uniform" => Ok(KernelKind::Boxcar),
            "truncated_gaussian" | "gaussian" => Ok(KernelKind::TruncatedGaussian),
            other => Err(Error::InvalidInput(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Symmetric probability density with bounded support `[-radius, radius]`.
///
/// For the polynomial kernels the radius rescales the unit-support shape,
/// `K(u) = K_1(u / r) / r`. For the truncated Gaussian the radius is the
/// truncation point of a standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr", into = "KernelRepr")]
pub struct Kernel {
    kind: KernelKind,
    radius: f64,
    norm: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelRepr {
    kind: KernelKind,
    #[serde(default)]
    radius: Option<f64>,
}

impl TryFrom<KernelRepr> for Kernel {
    type Error = Error;
    fn try_from(r: KernelRepr) -> Result<Self> {
        match r.radius {
            Some(radius) => Kernel::with_radius(r.kind, radius),
            None => Ok(Kernel::new(r.kind)),
        }
    }
}

impl From<Kernel> for KernelRepr {
    fn from(k: Kernel) -> Self {
        KernelRepr { kind: k.kind, radius: Some(k.radius) }
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::new(KernelKind::Epanechnikov)
    }
}

impl Kernel {
    pub fn new(kind: KernelKind) -> Self {
        Self::with_radius(kind, kind.default_radius()).expect("default radius is valid")
    }

    pub fn with_radius(kind: KernelKind, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("kernel support radius must be positive and finite, got {radius}")));
        }
        let norm = match kind {
            KernelKind::TruncatedGaussian => 1.0 / erf(radius / SQRT_2),
            _ => 1.0 / radius,
        };
        Ok(Self { kind, radius, norm })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, u: f64) -> f64 {
        if !(u.abs() <= self.radius) {
            return 0.0;
        }
        match self.kind {
            KernelKind::TruncatedGaussian => self.norm * (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
            kind => {
                let v = u * self.norm;
                self.norm
                    * match kind {
                        KernelKind::Epanechnikov => 0.75 * (1.0 - v * v),
                        KernelKind::Triangular => 1.0 - v.abs(),
                        KernelKind::Boxcar => 0.5,
                        KernelKind::TruncatedGaussian => unreachable!(),
                    }
            }
        }
    }

    /// `sup_u K(u)`, attained at `u = 0`.
    pub fn bound(&self) -> f64 {
        self.eval(0.0)
    }
}
