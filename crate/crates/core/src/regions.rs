// SPDX-License-Identifier: MIT OR Apache-2.0

//! Changeset regionalization: fused-lasso jumps are linked into changesets,
//! each changeset gets the widest interval free of other changesets, and a
//! CUSUM test runs inside every interval. Benjamini–Hochberg adjustment
//! controls the false discovery rate across the intervals of one projection.

use serde::{Deserialize, Serialize};

use crate::cusum::cusum_test;
use crate::error::Result;
use crate::fused_lasso::{default_jump_tolerance, jump_set, tv_denoise, JumpSet, PiecewiseFit};
use crate::scalar::Scalar;

/// Fused-lasso jumps grouped by linkage distance `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangesetPartition {
    pub changesets: Vec<Vec<usize>>,
    pub linkage: usize,
}

impl ChangesetPartition {
    pub fn len(&self) -> usize {
        self.changesets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changesets.is_empty()
    }
}

/// Closed 1-based interval `[lo, hi]` assumed to hold at most one change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub lo: usize,
    pub hi: usize,
    pub changeset_index: usize,
}

impl Region {
    pub fn len(&self) -> usize {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// Zero-based half-open slice range.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.lo - 1..self.hi
    }
}

/// CUSUM result for one region, located in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCandidate<S> {
    pub region: Region,
    /// Global 1-based index; the change is between `location` and `location + 1`.
    pub location: usize,
    pub statistic: S,
    pub raw_p: S,
    /// Benjamini–Hochberg adjusted p-value; equals `raw_p` until adjusted.
    pub adjusted_p: S,
}

/// Links sorted jumps into changesets: a new set starts whenever the gap to
/// the previous jump exceeds `c`.
pub fn agglomerate(jumps: &JumpSet, c: usize) -> ChangesetPartition {
    assert!(c >= 1, "linkage must be at least 1");
    let mut changesets: Vec<Vec<usize>> = Vec::new();
    for &t in &jumps.indices {
        match changesets.last_mut() {
            Some(set) if t - set[set.len() - 1] <= c => set.push(t),
            _ => changesets.push(vec![t]),
        }
    }
    ChangesetPartition { changesets, linkage: c }
}

/// Regions `[max b_{j−1} + 1, min b_{j+1} − 1]` with `max b_0 = 0` and
/// `min b_{M+1} = n + 1`. An empty partition yields the single region `[1, n]`.
pub fn build_regions(partition: &ChangesetPartition, n: usize) -> Vec<Region> {
    let sets = &partition.changesets;
    if sets.is_empty() {
        return vec![Region { lo: 1, hi: n, changeset_index: 0 }];
    }
    (0..sets.len())
        .map(|j| {
            let lo = if j == 0 { 1 } else { sets[j - 1][sets[j - 1].len() - 1] + 1 };
            let hi = if j + 1 == sets.len() { n } else { sets[j + 1][0] - 1 };
            Region { lo, hi, changeset_index: j }
        })
        .collect()
}

/// Runs the CUSUM test on each region restriction of `y` and `theta_hat`.
pub fn detect_in_regions<S: Scalar>(
    y: &[S],
    theta_hat: &[S],
    regions: &[Region],
) -> Vec<RegionCandidate<S>> {
    regions
        .iter()
        .map(|region| test_region(y, theta_hat, *region))
        .collect()
}

pub(crate) fn test_region<S: Scalar>(y: &[S], theta_hat: &[S], region: Region) -> RegionCandidate<S> {
    let range = region.range();
    let result = cusum_test(&y[range.clone()], &theta_hat[range]);
    RegionCandidate {
        region,
        location: region.lo - 1 + result.location,
        statistic: result.statistic,
        raw_p: result.p_value,
        adjusted_p: result.p_value,
    }
}

/// Benjamini–Hochberg step-up adjusted p-values, returned in input order.
pub fn bh_adjust<S: Scalar>(pvals: &[S]) -> Vec<S> {
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).expect("p-values are not NaN").then(a.cmp(&b)));
    let total = S::of_usize(m);
    let mut adjusted = vec![S::zero(); m];
    let mut running = S::one();
    for rank in (0..m).rev() {
        let idx = order[rank];
        // m/rank ≥ 1, so the scaled value never drops below the raw one; the
        // max guards against rounding.
        let scaled = (total * pvals[idx] / S::of_usize(rank + 1)).min(S::one()).max(pvals[idx]);
        running = running.min(scaled);
        adjusted[idx] = running;
    }
    adjusted
}

/// Writes BH-adjusted p-values into the candidates.
pub fn adjust_candidates<S: Scalar>(candidates: &mut [RegionCandidate<S>]) {
    let raw: Vec<S> = candidates.iter().map(|c| c.raw_p).collect();
    for (cand, adj) in candidates.iter_mut().zip(bh_adjust(&raw)) {
        cand.adjusted_p = adj;
    }
}

/// Sorted, deduplicated locations of candidates with `adjusted_p ≤ alpha`.
pub fn retained<S: Scalar>(candidates: &[RegionCandidate<S>], alpha: S) -> Vec<usize> {
    let mut out: Vec<usize> = candidates
        .iter()
        .filter(|c| c.adjusted_p <= alpha)
        .map(|c| c.location)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Merges significant candidates of both projections into one sorted list
/// with exact duplicates removed.
pub fn finalize<S: Scalar>(
    candidates_tvn: &[RegionCandidate<S>],
    candidates_fpc1: &[RegionCandidate<S>],
    alpha: S,
) -> Vec<usize> {
    let mut out = retained(candidates_tvn, alpha);
    out.extend(retained(candidates_fpc1, alpha));
    out.sort_unstable();
    out.dedup();
    out
}

/// Everything produced by one pass of jump detection, regionalization and
/// region-wise testing on a projected series for fixed `(λ, c)`.
#[derive(Debug, Clone)]
pub struct Isolation<S> {
    pub fit: PiecewiseFit<S>,
    pub jumps: JumpSet,
    pub partition: ChangesetPartition,
    pub candidates: Vec<RegionCandidate<S>>,
    /// Sorted locations with `adjusted_p ≤ alpha`.
    pub changepoints: Vec<usize>,
}

/// Runs regionalization and testing on a precomputed fused-lasso fit.
pub fn isolate_with_fit<S: Scalar>(y: &[S], fit: PiecewiseFit<S>, c: usize, alpha: S) -> Isolation<S> {
    let jumps = jump_set(&fit, default_jump_tolerance(y));
    let partition = agglomerate(&jumps, c);
    let regions = build_regions(&partition, y.len());
    let mut candidates = detect_in_regions(y, &fit.theta, &regions);
    adjust_candidates(&mut candidates);
    let changepoints = retained(&candidates, alpha);
    Isolation {
        fit,
        jumps,
        partition,
        candidates,
        changepoints,
    }
}

/// Fused lasso at `lambda`, then [`isolate_with_fit`].
pub fn isolate<S: Scalar>(y: &[S], lambda: S, c: usize, alpha: S) -> Result<Isolation<S>> {
    let fit = tv_denoise(y, lambda)?;
    Ok(isolate_with_fit(y, fit, c, alpha))
}
