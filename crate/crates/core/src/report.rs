// SPDX-License-Identifier: MIT OR Apache-2.0

//! Detection report and its JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regions::RegionCandidate;
use crate::scalar::Scalar;
use crate::series::Projection;

/// `(λ, c)` used for one projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuned<S> {
    pub lambda: S,
    pub c: usize,
    /// BIC at the selected grid point; absent when `(λ, c)` were fixed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bic: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedPair<S> {
    pub tvn: Option<Tuned<S>>,
    pub fpc1: Option<Tuned<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerProjection<S> {
    pub tvn: Vec<RegionCandidate<S>>,
    pub fpc1: Vec<RegionCandidate<S>>,
}

impl<S> PerProjection<S> {
    pub fn get(&self, source: Projection) -> &[RegionCandidate<S>] {
        match source {
            Projection::Tvn => &self.tvn,
            Projection::Fpc1 => &self.fpc1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub m: usize,
    /// The curves did not vary, so no FPC1 projection exists.
    pub degenerate_covariance: bool,
}

/// Final changepoints plus everything needed to audit them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointReport<S> {
    /// Sorted 1-based indices `t`; the distribution changes between `t` and `t + 1`.
    pub changepoints: Vec<usize>,
    pub alpha: S,
    pub tuned: TunedPair<S>,
    pub per_projection: PerProjection<S>,
    pub diagnostics: Diagnostics,
}

impl<S: Scalar> ChangepointReport<S> {
    /// Significant locations of one projection, sorted.
    pub fn detections(&self, source: Projection) -> Vec<usize> {
        crate::regions::retained(self.per_projection.get(source), self.alpha)
    }

    /// Checks the structural invariants of a report.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if !(self.alpha > S::zero() && self.alpha < S::one()) {
            return fail(format!("alpha {} outside (0,1)", self.alpha));
        }
        if self.changepoints.windows(2).any(|w| w[0] >= w[1]) {
            return fail("changepoints are not strictly increasing".into());
        }
        let n = self.diagnostics.n;
        if self.changepoints.iter().any(|t| *t < 1 || *t >= n) {
            return fail(format!("changepoint outside 1..{}", n.saturating_sub(1)));
        }
        let all: Vec<&RegionCandidate<S>> = self
            .per_projection
            .tvn
            .iter()
            .chain(&self.per_projection.fpc1)
            .collect();
        for cand in &all {
            let r = cand.region;
            if !(r.lo <= cand.location && cand.location < r.hi) {
                return fail(format!(
                    "candidate {} not inside region [{}, {}]",
                    cand.location, r.lo, r.hi
                ));
            }
            if cand.adjusted_p < cand.raw_p {
                return fail(format!("adjusted p below raw p at {}", cand.location));
            }
        }
        for t in &self.changepoints {
            if !all.iter().any(|c| c.location == *t && c.adjusted_p <= self.alpha) {
                return fail(format!("changepoint {t} has no significant candidate"));
            }
        }
        for tuned in [&self.tuned.tvn, &self.tuned.fpc1].into_iter().flatten() {
            if !(tuned.lambda > S::zero()) || tuned.c < 1 {
                return fail("tuned parameters must be positive".into());
            }
        }
        Ok(())
    }
}

/// Pretty-printed JSON with a trailing newline; key order follows field order.
pub fn emit_report<S: Scalar + Serialize>(report: &ChangepointReport<S>) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn parse_report(text: &str) -> Result<ChangepointReport<f64>> {
    Ok(serde_json::from_str(text)?)
}
