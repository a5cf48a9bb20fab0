// SPDX-License-Identifier: MIT OR Apache-2.0

//! BIC grid search over the fused-lasso penalty `λ = r√n` and the linkage
//! `c = max(1, round(k√n))`.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fused_lasso::{default_jump_tolerance, jump_set, tv_denoise};
use crate::regions::{
    adjust_candidates, agglomerate, build_regions, isolate, retained, test_region, Region,
    RegionCandidate,
};
use crate::scalar::Scalar;

/// Multipliers of `√n` searched for `λ` (`r_values`) and `c` (`k_values`).
#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid<S> {
    pub r_values: Vec<S>,
    pub k_values: Vec<S>,
}

impl<S: Scalar> Default for TuningGrid<S> {
    /// `0.2, 0.3, …, 5.0` for both multipliers.
    fn default() -> Self {
        let values: Vec<S> = (2..=50).map(|i| S::of_usize(i) / S::of(10.0)).collect();
        Self {
            r_values: values.clone(),
            k_values: values,
        }
    }
}

impl<S: Scalar> TuningGrid<S> {
    /// Same arithmetic ladder `min, min + step, …, ≤ max` for both multipliers.
    pub fn from_range(min: S, max: S, step: S) -> Result<Self> {
        if !(min > S::zero()) || !(step > S::zero()) || !(max >= min) || !max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid range needs 0 < min ≤ max and step > 0 (got {min}, {max}, {step})"
            )));
        }
        let count = ((max - min) / step + S::of(1e-9)).floor().to_usize().unwrap_or(0) + 1;
        let values: Vec<S> = (0..count).map(|i| min + S::of_usize(i) * step).collect();
        Ok(Self {
            r_values: values.clone(),
            k_values: values,
        })
    }

    pub fn len(&self) -> usize {
        self.r_values.len() * self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `λ = r √n`.
pub fn penalty_for<S: Scalar>(r: S, n: usize) -> S {
    r * S::of_usize(n).sqrt()
}

/// `c = max(1, round(k √n))`.
pub fn linkage_for<S: Scalar>(k: S, n: usize) -> usize {
    (k * S::of_usize(n).sqrt()).round().to_usize().unwrap_or(1).max(1)
}

/// Piecewise segment means; segment `i` spans `τ_{i−1}+1 ..= τ_i` (1-based)
/// with `τ_0 = 0` and a final segment ending at `n`.
pub fn theta_star<S: Scalar>(y: &[S], taus: &[usize]) -> Vec<S> {
    let n = y.len();
    let mut out = Vec::with_capacity(n);
    let mut start = 0usize;
    for end in taus.iter().copied().chain(std::iter::once(n)) {
        assert!(end > start && end <= n, "changepoints must be strictly increasing inside 1..n-1");
        let seg = &y[start..end];
        let m = seg.iter().copied().sum::<S>() / S::of_usize(seg.len());
        out.extend(std::iter::repeat_n(m, seg.len()));
        start = end;
    }
    out
}

/// `Σ_t (y_t − θ*_t)² + |τ| log n`.
pub fn bic<S: Scalar>(y: &[S], taus: &[usize]) -> S {
    let fit = theta_star(y, taus);
    let sse: S = y.iter().zip(&fit).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
    sse + S::of_usize(taus.len()) * S::of_usize(y.len()).ln()
}

/// One grid point of the BIC surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicEvaluation<S> {
    pub r: S,
    pub k: S,
    pub lambda: S,
    pub c: usize,
    pub changepoints: Vec<usize>,
    pub bic: S,
}

/// Total order used for selection: lower BIC, then fewer changepoints, then
/// larger `λ`, then larger `c`.
pub fn selection_order<S: Scalar>(a: &BicEvaluation<S>, b: &BicEvaluation<S>) -> Ordering {
    a.bic
        .partial_cmp(&b.bic)
        .unwrap_or(Ordering::Equal)
        .then(a.changepoints.len().cmp(&b.changepoints.len()))
        .then(b.lambda.partial_cmp(&a.lambda).unwrap_or(Ordering::Equal))
        .then(b.c.cmp(&a.c))
}

fn check_alpha<S: Scalar>(alpha: S) -> Result<()> {
    if alpha > S::zero() && alpha < S::one() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// Full BIC surface. The fused-lasso fit is computed once per `λ`, and CUSUM
/// results are shared between linkages that produce the same region.
pub fn evaluate_grid<S: Scalar>(y: &[S], grid: &TuningGrid<S>, alpha: S) -> Result<Vec<BicEvaluation<S>>> {
    check_alpha(alpha)?;
    let n = y.len();
    let mut out = Vec::with_capacity(grid.len());
    for &r in &grid.r_values {
        let lambda = penalty_for(r, n);
        let fit = tv_denoise(y, lambda)?;
        let jumps = jump_set(&fit, default_jump_tolerance(y));
        let mut cache: HashMap<(usize, usize), RegionCandidate<S>> = HashMap::new();
        for &k in &grid.k_values {
            let c = linkage_for(k, n);
            let regions: Vec<Region> = build_regions(&agglomerate(&jumps, c), n);
            let mut candidates: Vec<RegionCandidate<S>> = regions
                .iter()
                .map(|region| {
                    let mut cand = *cache
                        .entry((region.lo, region.hi))
                        .or_insert_with(|| test_region(y, &fit.theta, *region));
                    cand.region = *region;
                    cand
                })
                .collect();
            adjust_candidates(&mut candidates);
            let changepoints = retained(&candidates, alpha);
            let bic = bic(y, &changepoints);
            out.push(BicEvaluation { r, k, lambda, c, changepoints, bic });
        }
    }
    Ok(out)
}

/// Reference evaluation that reruns the whole pipeline at every grid point.
pub fn evaluate_grid_uncached<S: Scalar>(
    y: &[S],
    grid: &TuningGrid<S>,
    alpha: S,
) -> Result<Vec<BicEvaluation<S>>> {
    check_alpha(alpha)?;
    let n = y.len();
    let mut out = Vec::with_capacity(grid.len());
    for &r in &grid.r_values {
        for &k in &grid.k_values {
            let lambda = penalty_for(r, n);
            let c = linkage_for(k, n);
            let changepoints = isolate(y, lambda, c, alpha)?.changepoints;
            let bic = bic(y, &changepoints);
            out.push(BicEvaluation { r, k, lambda, c, changepoints, bic });
        }
    }
    Ok(out)
}

/// Grid point minimising BIC under [`selection_order`].
pub fn select<S: Scalar>(evaluations: Vec<BicEvaluation<S>>) -> Option<BicEvaluation<S>> {
    evaluations.into_iter().min_by(selection_order)
}

/// Tunes `(λ, c)` for one projected series.
pub fn grid_search<S: Scalar>(y: &[S], grid: &TuningGrid<S>, alpha: S) -> Result<BicEvaluation<S>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("tuning grid is empty".into()));
    }
    if y.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "tuning needs at least 2 observations, got {}",
            y.len()
        )));
    }
    Ok(select(evaluate_grid(y, grid, alpha)?).expect("non-empty grid"))
}
