use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIGN_THRESHOLD: f64 = 1e-9;

/// Unit vector in `R^d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v` to unit length.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidInput(format!("direction needs dimension >= 2, got {}", v.len())));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("direction of a zero or non-finite vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    pub fn from_angle(angle: f64) -> Self {
        Self(vec![angle.cos(), angle.sin()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Angle in `[0, 2pi)` of a planar direction.
    pub fn angle(&self) -> f64 {
        let a = self.0[1].atan2(self.0[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    /// Representative of the line through `±v` whose first non-negligible
    /// coordinate is positive.
    pub fn canonical(&self) -> Self {
        match self.0.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
            Some(&x) if x < 0.0 => Self(self.0.iter().map(|v| -v).collect()),
            _ => self.clone(),
        }
    }

    /// Great-circle distance in `[0, pi]`.
    pub fn geodesic(&self, other: &[f64]) -> f64 {
        let on = other.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = self.0.iter().zip(other).map(|(a, b)| a * b).sum::<f64>() / on;
        dot.clamp(-1.0, 1.0).acos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_and_rejects() {
        let d = Direction::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(d.as_slice(), &[0.6, 0.8]);
        assert!(Direction::new(vec![0.0, 0.0]).is_err());
        assert!(Direction::new(vec![1.0]).is_err());
        assert_eq!(Direction::new(vec![-1e-12, -1.0]).unwrap().canonical().as_slice()[1], 1.0);
        assert!((d.geodesic(&[-0.6, -0.8]) - std::f64::consts::PI).abs() < 1e-7);
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent_and_sign_free(v in prop::collection::vec(-5.0f64..5.0, 2..5)) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
            let d = Direction::new(v.clone()).unwrap();
            let norm: f64 = d.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let neg = Direction::new(v.iter().map(|x| -x).collect()).unwrap();
            prop_assert_eq!(d.canonical().canonical(), d.canonical());
            prop_assert_eq!(neg.canonical(), d.canonical());
        }
    }
}
