//! Local M-estimation with discontinuous criteria: exact optimizers,
//! estimators with cube-root asymptotics, subsampling inference, limit-law
//! simulation and Monte Carlo rate checks.

pub mod bandwidth;
pub mod dgp;
pub mod direction;
pub mod error;
pub mod estimators;
pub mod gridset;
pub mod inference;
pub mod kernel;
pub mod limitlaw;
pub mod montecarlo;
pub mod optim;
pub mod rng;
pub mod sample;

pub use bandwidth::BandwidthRule;
pub use direction::Direction;
pub use error::{Error, ErrorKind, Result};
pub use gridset::{hausdorff, rho, Grid, GridSet};
pub use kernel::{Kernel, KernelKind};
pub use sample::TimeSeriesSample;
