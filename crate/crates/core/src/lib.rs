//! Rank-based regression for response-biased samples.
//!
//! Implements maximum rank correlation (MRC) estimation for semiparametric
//! transformation models `H(Y) = Z + beta' X + eps` where `H` is an unknown
//! increasing function and the sample may have been selected on the value of
//! the response. Because the objective depends on responses only through
//! their order, the estimator needs neither the transformation nor the
//! sampling probabilities.
//!
//! The pieces:
//! - [`rankcorr`]: exact `O(n^2)` and fast `O(n log n)` pair-counting
//!   kernels, a weighted variant, and a smoothed relaxation;
//! - [`optimize`]: multi-start Nelder-Mead over the (piecewise-constant)
//!   objective;
//! - [`inference`]: random-weighting resampling for standard errors and
//!   confidence intervals;
//! - [`sampling`]: population generators and response-biased sampling
//!   schemes for simulation studies;
//! - [`comparator`]: inverse-probability-weighted least squares baseline;
//! - [`datasets`]: CSV ingestion and complete-case extraction from censored
//!   or partially missing records;
//! - [`harness`]: Monte Carlo scenario runner aggregating BIAS/SE/SEE/CP.
//!
//! Numeric kernels are generic over the scalar type via [`num::Real`];
//! `f64` aliases for the main types are exported at the crate root.

pub mod comparator;
pub mod data;
pub mod datasets;
pub mod error;
pub mod harness;
pub mod inference;
pub mod num;
pub mod optimize;
pub mod rankcorr;
pub mod rng;
pub mod sampling;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// `f64` dataset, the default working type.
pub type Dataset = data::Dataset<f64>;
/// `f64` score vector.
pub type ScoreVector = data::ScoreVector<f64>;
/// `f64` resampling weights.
pub type WeightVector = data::WeightVector<f64>;
/// `f64` objective value.
pub type ObjectiveValue = rankcorr::ObjectiveValue<f64>;
/// `f64` optimizer settings.
pub type OptimizerConfig = optimize::OptimizerConfig<f64>;
/// `f64` fit result.
pub type FitResult = optimize::FitResult<f64>;
/// `f64` resampling settings.
pub type ResampleConfig = inference::ResampleConfig<f64>;
/// `f64` resampling summary.
pub type ResampleSummary = inference::ResampleSummary<f64>;
/// `f64` IPW least-squares fit.
pub type IpwFit = comparator::IpwFit<f64>;

pub use data::ModelSpec;
pub use sampling::{CovariateLaw, ErrorDist, PopulationModel, SamplingScheme, Transform};
