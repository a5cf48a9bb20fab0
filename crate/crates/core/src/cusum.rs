// SPDX-License-Identifier: MIT OR Apache-2.0

//! At-most-one-change CUSUM test for a mean shift in a univariate sequence.

use crate::scalar::{mean, Scalar};

const SERIES_TERM_CUTOFF: f64 = 1e-12;
const MAX_SERIES_TERMS: usize = 100;
/// Below this argument the theta-function form of the Kolmogorov series is
/// used; it converges in a handful of terms where the alternating form would not.
const SMALL_ARGUMENT: f64 = 1.0;

/// Outcome of a single CUSUM test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CusumResult<S> {
    /// `max_k |T_n(k)| / σ̂_n` over `k = 1..n−1`.
    pub statistic: S,
    pub p_value: S,
    /// 1-based split index `k̂`: the change falls between `k̂` and `k̂ + 1`.
    pub location: usize,
    pub sigma_hat: S,
}

/// `T_n(k) = n^{-1/2} Σ_{t ≤ k} (y_t − ȳ)` for `k = 1..n`; element `k − 1` holds `T_n(k)`.
pub fn cusum_process<S: Scalar>(y: &[S]) -> Vec<S> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let ybar = mean(y);
    let scale = S::one() / S::of_usize(n).sqrt();
    let mut acc = S::zero();
    y.iter()
        .map(|v| {
            acc = acc + (*v - ybar);
            acc * scale
        })
        .collect()
}

/// Sample variance (divisor `n − 1`) of the residual `y − θ̂`.
pub fn long_run_variance<S: Scalar>(y: &[S], theta_hat: &[S]) -> S {
    assert_eq!(y.len(), theta_hat.len(), "residual inputs differ in length");
    let n = y.len();
    if n < 2 {
        return S::zero();
    }
    let resid: Vec<S> = y.iter().zip(theta_hat).map(|(a, b)| *a - *b).collect();
    let rbar = mean(&resid);
    let ss: S = resid.iter().map(|r| (*r - rbar) * (*r - rbar)).sum();
    ss / S::of_usize(n - 1)
}

fn kolmogorov_cdf_f64(t: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    if t < SMALL_ARGUMENT {
        // K(t) = √(2π)/t · Σ_{j≥1} exp(−(2j−1)² π² / (8t²))
        let pi2_over_8t2 = std::f64::consts::PI.powi(2) / (8.0 * t * t);
        let mut sum = 0.0;
        for j in 1..=MAX_SERIES_TERMS {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * pi2_over_8t2).exp();
            sum += term;
            if term < SERIES_TERM_CUTOFF * sum.max(f64::MIN_POSITIVE) || term == 0.0 {
                break;
            }
        }
        ((2.0 * std::f64::consts::PI).sqrt() / t * sum).clamp(0.0, 1.0)
    } else {
        (1.0 - kolmogorov_tail_series(t)).clamp(0.0, 1.0)
    }
}

/// `2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² t²)`, truncated once a term drops below 1e-12.
fn kolmogorov_tail_series(t: f64) -> f64 {
    let mut sum = 0.0;
    for j in 1..=MAX_SERIES_TERMS {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * t * t).exp();
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < SERIES_TERM_CUTOFF {
            break;
        }
    }
    2.0 * sum
}

/// Distribution function of the supremum of a standard Brownian bridge,
/// `P(sup |B(r) − rB(1)| ≤ t)`.
pub fn kolmogorov_cdf<S: Scalar>(t: S) -> S {
    S::of(kolmogorov_cdf_f64(t.to_f64_lossy()))
}

/// Upper tail `1 − kolmogorov_cdf(t)`, evaluated without cancellation for large `t`.
pub fn kolmogorov_sf<S: Scalar>(t: S) -> S {
    let t = t.to_f64_lossy();
    let p = if t >= SMALL_ARGUMENT {
        kolmogorov_tail_series(t)
    } else {
        1.0 - kolmogorov_cdf_f64(t)
    };
    S::of(p.clamp(0.0, 1.0))
}

/// CUSUM test of `y` against the null of a constant mean. `theta_hat` is a
/// nonparametric mean estimate used only for the variance of the residuals.
///
/// A residual variance that is zero (to rounding) yields `statistic = 0` and
/// `p_value = 1`.
pub fn cusum_test<S: Scalar>(y: &[S], theta_hat: &[S]) -> CusumResult<S> {
    let n = y.len();
    assert!(n >= 2, "CUSUM needs at least two observations");
    assert_eq!(n, theta_hat.len(), "CUSUM inputs differ in length");

    let process = cusum_process(y);
    let mut location = 1;
    let mut peak = process[0].abs();
    for (k, v) in process.iter().enumerate().take(n - 1).skip(1) {
        if v.abs() > peak {
            peak = v.abs();
            location = k + 1;
        }
    }

    let sigma_hat = long_run_variance(y, theta_hat).sqrt();
    let magnitude = y.iter().fold(S::zero(), |acc, v| acc.max(v.abs()));
    let floor = S::epsilon() * S::of(64.0) * magnitude.max(S::min_positive_value());
    if !(sigma_hat > floor) {
        return CusumResult {
            statistic: S::zero(),
            p_value: S::one(),
            location,
            sigma_hat,
        };
    }
    let statistic = peak / sigma_hat;
    CusumResult {
        statistic,
        p_value: kolmogorov_sf(statistic),
        location,
        sigma_hat,
    }
}
