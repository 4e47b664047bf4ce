// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nonparametric detection of a change point in the conditional variance
//! (volatility) function of a heteroscedastic time-series regression
//!
//! ```text
//! Y_t = m(X_t) + sigma_t(X_t) * eps_t
//! ```
//!
//! The test is built on the sequential marked empirical process of squared
//! kernel residuals,
//!
//! ```text
//! T(s, z) = n^{-1/2} * sum_{t <= ns} ((Y_t - m_hat(X_t))^2 - sigma2_hat(X_t)) * w(X_t) * 1{X_t <= z}
//! ```
//!
//! which is reduced to four statistics (two marked, two classical CUSUM),
//! normalized by a consistent variance estimate and compared against
//! simulated limiting null laws.
//!
//! Module map:
//!
//! - [`model`]: synthetic CHARN data generators.
//! - [`kernel`]: Nadaraya-Watson mean and conditional-variance estimators.
//! - [`process`]: residual marks and the process surface.
//! - [`stats`]: statistics, normalizer, p-values, change-point estimate.
//! - [`nulldist`]: Monte Carlo tables for the limiting laws.
//! - [`harness`]: rejection-frequency experiments.
//! - [`data`]: CSV ingestion, returns, lag embedding, exports.

#![forbid(unsafe_code)]

pub mod data;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod model;
pub mod nulldist;
pub mod process;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use kernel::EstimatorConfig;
pub use model::Sample;
pub use nulldist::{NullTable, StatisticKind};
pub use process::{MarkVector, ProcessGrid};
pub use stats::TestReport;
