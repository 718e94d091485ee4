use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `h_n = c * n^(-a)` with `c > 0` and `0 <= a < 1`, so that `n h_n -> inf`.
/// `a = 0, c = 1` is the unlocalized case `h_n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub c: f64,
    pub a: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self::UNIT
    }
}

impl BandwidthRule {
    pub const UNIT: BandwidthRule = BandwidthRule { c: 1.0, a: 0.0 };

    pub fn new(c: f64, a: f64) -> Result<Self> {
        let rule = Self { c, a };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidInput(format!("bandwidth constant must be positive, got {}", self.c)));
        }
        if !(0.0..1.0).contains(&self.a) {
            return Err(Error::InvalidInput(format!("bandwidth exponent must lie in [0, 1), got {}", self.a)));
        }
        Ok(())
    }

    pub fn at(&self, n: usize) -> f64 {
        self.c * (n.max(1) as f64).powf(-self.a)
    }

    /// `n * h_n`.
    pub fn effective_size(&self, n: usize) -> f64 {
        n as f64 * self.at(n)
    }
}
