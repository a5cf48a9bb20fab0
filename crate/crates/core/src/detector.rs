// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end multiple changepoint isolation.
//!
//! 1. Project every curve to TVN and FPC1 scores.
//! 2. Per projection, choose `(λ, c)` by BIC (or take the fixed override).
//! 3. Fused lasso, changesets, regions, region-wise CUSUM, BH at level `α`.
//! 4. Merge the significant locations of both projections.

use crate::error::{Error, Result};
use crate::projections::{fpc1_projection, tvn_projection};
use crate::regions::{finalize, isolate, Isolation};
use crate::report::{ChangepointReport, Diagnostics, PerProjection, Tuned, TunedPair};
use crate::scalar::Scalar;
use crate::series::{FunctionalSeries, ProjectedSeries, Projection};
use crate::tuning::{grid_search, TuningGrid};

pub const DEFAULT_ALPHA: f64 = 0.001;

/// Fixed `(λ, c)` that bypasses tuning for one projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTuning<S> {
    pub lambda: S,
    pub c: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig<S> {
    pub alpha: S,
    pub grid: TuningGrid<S>,
    pub fixed_tvn: Option<FixedTuning<S>>,
    pub fixed_fpc1: Option<FixedTuning<S>>,
}

impl<S: Scalar> Default for DetectorConfig<S> {
    fn default() -> Self {
        Self {
            alpha: S::of(DEFAULT_ALPHA),
            grid: TuningGrid::default(),
            fixed_tvn: None,
            fixed_fpc1: None,
        }
    }
}

impl<S: Scalar> DetectorConfig<S> {
    pub fn with_alpha(mut self, alpha: S) -> Self {
        self.alpha = alpha;
        self
    }

    /// Uses the same fixed `(λ, c)` for both projections.
    pub fn with_fixed(mut self, lambda: S, c: usize) -> Self {
        let fixed = Some(FixedTuning { lambda, c });
        self.fixed_tvn = fixed;
        self.fixed_fpc1 = fixed;
        self
    }

    pub fn fixed_for(&self, source: Projection) -> Option<FixedTuning<S>> {
        match source {
            Projection::Tvn => self.fixed_tvn,
            Projection::Fpc1 => self.fixed_fpc1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > S::zero() && self.alpha < S::one()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        for fixed in [self.fixed_tvn, self.fixed_fpc1].into_iter().flatten() {
            if !(fixed.lambda > S::zero()) || !fixed.lambda.is_finite() || fixed.c < 1 {
                return Err(Error::InvalidConfig(
                    "fixed λ must be positive and finite and c at least 1".into(),
                ));
            }
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("tuning grid is empty".into()));
        }
        Ok(())
    }
}

/// Tuned parameters and isolation output for one projection.
#[derive(Debug, Clone)]
pub struct ProjectionDetection<S> {
    pub source: Projection,
    pub tuned: Tuned<S>,
    pub isolation: Isolation<S>,
}

/// Steps 2–3 on a single projected series.
pub fn detect_projection<S: Scalar>(
    projected: &ProjectedSeries<S>,
    config: &DetectorConfig<S>,
) -> Result<ProjectionDetection<S>> {
    let y = projected.values();
    let tuned = match config.fixed_for(projected.source()) {
        Some(fixed) => Tuned {
            lambda: fixed.lambda,
            c: fixed.c,
            bic: None,
        },
        None => {
            let best = grid_search(y, &config.grid, config.alpha)?;
            Tuned {
                lambda: best.lambda,
                c: best.c,
                bic: Some(best.bic),
            }
        }
    };
    let isolation = isolate(y, tuned.lambda, tuned.c, config.alpha)?;
    Ok(ProjectionDetection {
        source: projected.source(),
        tuned,
        isolation,
    })
}

/// Runs the full detector on a functional series.
pub fn detect<S: Scalar>(
    series: &FunctionalSeries<S>,
    config: &DetectorConfig<S>,
) -> Result<ChangepointReport<S>> {
    config.validate()?;

    let tvn = detect_projection(&tvn_projection(series), config)?;
    let (fpc1, degenerate_covariance) = match fpc1_projection(series) {
        Ok(projected) => (Some(detect_projection(&projected, config)?), false),
        Err(Error::DegenerateCovariance) => (None, true),
        Err(other) => return Err(other),
    };

    let tvn_candidates = tvn.isolation.candidates;
    let fpc1_candidates = fpc1
        .as_ref()
        .map(|d| d.isolation.candidates.clone())
        .unwrap_or_default();
    let changepoints = finalize(&tvn_candidates, &fpc1_candidates, config.alpha);

    Ok(ChangepointReport {
        changepoints,
        alpha: config.alpha,
        tuned: TunedPair {
            tvn: Some(tvn.tuned),
            fpc1: fpc1.map(|d| d.tuned),
        },
        per_projection: PerProjection {
            tvn: tvn_candidates,
            fpc1: fpc1_candidates,
        },
        diagnostics: Diagnostics {
            n: series.n(),
            m: series.m(),
            degenerate_covariance,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_reports_nothing() {
        let s = FunctionalSeries::with_uniform_grid(vec![vec![0.1, 0.2]; 3]).unwrap();
        let report = detect(&s, &DetectorConfig::<f64>::default()).unwrap();
        assert!(report.changepoints.is_empty());
        assert!(report.diagnostics.degenerate_covariance);
        assert!(report.tuned.fpc1.is_none());
        report.validate().unwrap();
    }

    #[test]
    fn invalid_config_rejected() {
        let s = FunctionalSeries::with_uniform_grid(vec![vec![0.1, 0.2]; 3]).unwrap();
        let bad = DetectorConfig::<f64>::default().with_alpha(0.0);
        assert!(detect(&s, &bad).is_err());
        let bad = DetectorConfig::<f64>::default().with_fixed(-1.0, 2);
        assert!(detect(&s, &bad).is_err());
    }

    #[test]
    fn clean_step_in_mean() {
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|t| {
                let level = if t < 60 { 0.0 } else { 1.0 };
                let wiggle = ((t * 37 % 11) as f64 - 5.0) * 0.02;
                vec![level + wiggle, level * 0.5 + wiggle, level + 2.0 * wiggle]
            })
            .collect();
        let s = FunctionalSeries::with_uniform_grid(rows).unwrap();
        let report = detect(&s, &DetectorConfig::default()).unwrap();
        report.validate().unwrap();
        assert_eq!(report.changepoints, vec![60]);
    }
}
