// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multiple changepoint isolation for functional time series.
//!
//! Each curve is reduced to two scalars (its total variation and its score on
//! the leading functional principal component). Every resulting series is
//! segmented by a fused lasso whose nearby jumps are linked into changesets;
//! each changeset defines a region tested with a CUSUM statistic, and the
//! region p-values are corrected with Benjamini–Hochberg. `(λ, c)` are tuned
//! by BIC over a `√n`-scaled grid.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiation. Simulation
//! and the CLI work in `f64`.

#![forbid(unsafe_code)]
// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cusum;
pub mod detector;
pub mod error;
pub mod fused_lasso;
pub mod linalg;
pub mod metrics;
pub mod projections;
pub mod regions;
pub mod report;
pub mod scalar;
pub mod series;
pub mod simulation;
pub mod tuning;

pub use detector::{detect, DetectorConfig, FixedTuning, DEFAULT_ALPHA};
pub use error::{Error, Result};
pub use report::{emit_report, parse_report, ChangepointReport};
pub use scalar::Scalar;
pub use series::{load_csv, FunctionalSeries, ProjectedSeries, Projection};

pub type Series = FunctionalSeries<f64>;
pub type Series32 = FunctionalSeries<f32>;
pub type Report = ChangepointReport<f64>;
pub type Report32 = ChangepointReport<f32>;
pub type Config = DetectorConfig<f64>;
pub type Config32 = DetectorConfig<f32>;
pub type Grid = tuning::TuningGrid<f64>;
