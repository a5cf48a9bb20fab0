// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact 1-D fused lasso (total-variation denoising).
//!
//! Minimises `Σ_t (y_t − θ_t)² + λ Σ_t |θ_{t+1} − θ_t|`. Note the squared
//! error carries no ½ factor; the solver internally works with the
//! half-weighted form and a threshold of `λ / 2`.
//!
//! The solver is Condat's direct taut-string style scan: it grows the current
//! segment while the running dual variable stays inside `[−μ, μ]` and commits
//! a segment as soon as the bound is violated, restarting from the segment
//! end. Linear on typical inputs, quadratic in the worst case.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fused-lasso solution `θ̂` for penalty `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFit<S> {
    pub theta: Vec<S>,
    pub lambda: S,
}

impl<S: Scalar> PiecewiseFit<S> {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Sorted 1-based indices `t` where `θ̂_t ≠ θ̂_{t+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JumpSet {
    pub indices: Vec<usize>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Fused-lasso objective value of `theta` for data `y`.
pub fn objective<S: Scalar>(y: &[S], theta: &[S], lambda: S) -> S {
    let sse: S = y.iter().zip(theta).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
    let tv: S = theta.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    sse + lambda * tv
}

/// Jump threshold `1e-9 · (max(y) − min(y))`, floored at the smallest positive normal.
pub fn default_jump_tolerance<S: Scalar>(y: &[S]) -> S {
    let (lo, hi) = y
        .iter()
        .fold((S::infinity(), S::neg_infinity()), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let range = if y.is_empty() { S::zero() } else { hi - lo };
    (S::of(1e-9) * range).max(S::min_positive_value())
}

/// Global minimiser of the fused-lasso objective.
pub fn tv_denoise<S: Scalar>(y: &[S], lambda: S) -> Result<PiecewiseFit<S>> {
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if !(lambda >= S::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "fused-lasso penalty must be finite and non-negative, got {lambda}"
        )));
    }
    let theta = if lambda == S::zero() || y.len() < 2 {
        y.to_vec()
    } else {
        condat(y, lambda * S::of(0.5))
    };
    Ok(PiecewiseFit { theta, lambda })
}

/// Writes `value` from `k0` through `last`, always writing at least one entry.
fn fill<S: Copy>(x: &mut [S], k0: &mut usize, last: usize, value: S) {
    loop {
        x[*k0] = value;
        *k0 += 1;
        if *k0 > last {
            break;
        }
    }
}

/// Solves `argmin ½‖y − x‖² + mu Σ|x_{k+1} − x_k|` for `mu > 0`, `y.len() ≥ 1`.
fn condat<S: Scalar>(y: &[S], mu: S) -> Vec<S> {
    let n = y.len();
    let mut x = vec![S::zero(); n];
    let two_mu = mu + mu;
    let neg_mu = -mu;

    // Segment start, current position, and the last positions where the
    // lower and upper candidate values were updated.
    let mut k0 = 0usize;
    let mut k = 0usize;
    let mut kminus = 0usize;
    let mut kplus = 0usize;
    let mut vmin = y[0] - mu;
    let mut vmax = y[0] + mu;
    let mut umin = mu;
    let mut umax = neg_mu;

    loop {
        while k == n - 1 {
            if umin < S::zero() {
                fill(&mut x, &mut k0, kminus, vmin);
                k = k0;
                kminus = k0;
                vmin = y[k0];
                umin = mu;
                umax = vmin + umin - vmax;
            } else if umax > S::zero() {
                fill(&mut x, &mut k0, kplus, vmax);
                k = k0;
                kplus = k0;
                vmax = y[k0];
                umax = neg_mu;
                umin = vmax + umax - vmin;
            } else {
                vmin = vmin + umin / S::of_usize(k - k0 + 1);
                fill(&mut x, &mut k0, k, vmin);
                return x;
            }
        }

        umin = umin + y[k + 1] - vmin;
        if umin < neg_mu {
            fill(&mut x, &mut k0, kminus, vmin);
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = y[k0];
            vmax = vmin + two_mu;
            umin = mu;
            umax = neg_mu;
            continue;
        }
        umax = umax + y[k + 1] - vmax;
        if umax > mu {
            fill(&mut x, &mut k0, kplus, vmax);
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = y[k0];
            vmin = vmax - two_mu;
            umin = mu;
            umax = neg_mu;
            continue;
        }
        k += 1;
        if umin >= mu {
            kminus = k;
            vmin = vmin + (umin - mu) / S::of_usize(kminus - k0 + 1);
            umin = mu;
        }
        if umax <= neg_mu {
            kplus = k;
            vmax = vmax + (umax + mu) / S::of_usize(kplus - k0 + 1);
            umax = neg_mu;
        }
    }
}

/// Indices `t` (1-based) with `|θ̂_{t+1} − θ̂_t| > tol`.
pub fn jump_set<S: Scalar>(fit: &PiecewiseFit<S>, tol: S) -> JumpSet {
    let indices = fit
        .theta
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() > tol)
        .map(|(i, _)| i + 1)
        .collect();
    JumpSet { indices }
}
