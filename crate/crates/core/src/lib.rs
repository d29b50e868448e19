//! Locally differentially private SGD with Polyak-Ruppert averaging and
//! streaming uncertainty quantification.
//!
//! The pieces fit together as a pipeline:
//!
//! * [`sgd`] drives the recursion `theta_i = theta_{i-1} - eta_i * g_i` over a
//!   [`data::SampleStream`], where `g_i` is either a clean gradient or one
//!   privatized per datum by the mechanisms in [`privacy`].
//! * [`trace::IterateTrace`] accumulates the running average and per-block
//!   sums in `O(blocks * dim)` memory, never storing the iterates themselves.
//! * [`bootstrap`] turns a finished trace into multiplier-bootstrap
//!   confidence intervals, with a batch-mean interval as the baseline.
//! * [`models`] supplies the two built-in estimation problems (scalar
//!   quantile, quantile regression) together with their data generators and
//!   closed-form asymptotic covariances used to validate the pipeline.

pub mod bootstrap;
pub mod data;
pub mod error;
pub mod models;
pub mod privacy;
pub mod rng;
pub mod schedule;
pub mod sgd;
pub mod trace;

pub use error::{Error, Result};
