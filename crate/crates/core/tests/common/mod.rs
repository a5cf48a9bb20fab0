// SPDX-License-Identifier: MIT OR Apache-2.0

//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Fused lasso by projected coordinate descent on the dual
/// `min ½‖y − Dᵀu‖²` subject to `|u_i| ≤ λ/2`, run until the projected
/// gradient is below `tol`. Returns the primal `θ = y − Dᵀu`.
pub fn fused_lasso_dual(y: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let n = y.len();
    let mut x = y.to_vec();
    if n < 2 || lambda == 0.0 {
        return x;
    }
    let bound = lambda / 2.0;
    let mut u = vec![0.0; n - 1];
    for _sweep in 0..5_000_000 {
        for i in 0..n - 1 {
            let target = (u[i] + (x[i + 1] - x[i]) / 2.0).clamp(-bound, bound);
            let delta = target - u[i];
            if delta != 0.0 {
                u[i] = target;
                x[i] += delta;
                x[i + 1] -= delta;
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..n - 1 {
            let grad = -(x[i + 1] - x[i]);
            let projected = (u[i] - grad).clamp(-bound, bound) - u[i];
            worst = worst.max(projected.abs());
        }
        if worst <= tol {
            break;
        }
    }
    x
}

/// `max_k |Σ_{i≤k}(y_i − ȳ)| / √n` by a double loop, with the maximiser.
pub fn naive_cusum(y: &[f64]) -> (f64, usize) {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut best = (-1.0, 0);
    for k in 1..n {
        let mut s = 0.0;
        for v in &y[..k] {
            s += v - mean;
        }
        let stat = s.abs() / (n as f64).sqrt();
        if stat > best.0 {
            best = (stat, k);
        }
    }
    best
}

/// Energy distance by explicit double loops.
pub fn naive_energy(x: &[f64], y: &[f64]) -> f64 {
    let avg = |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for p in a {
            for q in b {
                s += (p - q).abs();
            }
        }
        s / (a.len() * b.len()) as f64
    };
    2.0 * avg(x, y) - avg(x, x) - avg(y, y)
}

/// Reference Kolmogorov CDF values `(t, P(K ≤ t))` from an independent
/// high-precision evaluation.
pub fn kolmogorov_reference() -> Vec<(f64, f64)> {
    include_str!("../data/kolmogorov_reference.csv")
        .lines()
        .skip(1)
        .map(|line| {
            let (t, p) = line.split_once(',').expect("two columns");
            (t.parse().unwrap(), p.parse().unwrap())
        })
        .collect()
}

/// Kolmogorov–Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, p)| {
            let lo = p - i as f64 / n;
            let hi = (i + 1) as f64 / n - p;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
