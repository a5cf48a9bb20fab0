// SPDX-License-Identifier: MIT OR Apache-2.0

//! Set-level errors between estimated and true changepoints.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Difference in the number of changepoints.
pub fn annotation_error(x: &[usize], y: &[usize]) -> usize {
    x.len().abs_diff(y.len())
}

fn mean_abs_cross<S: Scalar>(x: &[S], y: &[S]) -> S {
    let total: S = x
        .iter()
        .map(|a| y.iter().map(|b| (*a - *b).abs()).sum::<S>())
        .sum();
    total / (S::of_usize(x.len()) * S::of_usize(y.len()))
}

/// Mean pairwise distance within a set, `1/n² ΣΣ |x_i − x_j|`, in `O(n log n)`.
fn mean_abs_within<S: Scalar>(x: &[S]) -> S {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    // Σ_{i<j} (x_j − x_i) = Σ_j (2j − n + 1) x_j over the sorted order.
    let half: S = sorted
        .iter()
        .enumerate()
        .map(|(j, v)| (S::of_usize(2 * j + 1) - S::of_usize(n)) * *v)
        .sum();
    (half + half) / (S::of_usize(n) * S::of_usize(n))
}

/// Energy distance between two non-empty sets of points.
///
/// Returns `Some(0)` when both sets are empty and `None` when exactly one is.
/// Tiny negative round-off is clamped to zero.
pub fn energy_distance<S: Scalar>(x: &[S], y: &[S]) -> Option<S> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => return Some(S::zero()),
        (true, false) | (false, true) => return None,
        _ => {}
    }
    let cross = mean_abs_cross(x, y);
    let d = cross + cross - mean_abs_within(x) - mean_abs_within(y);
    Some(d.max(S::zero()))
}

/// Energy distance between two changepoint index sets.
pub fn changepoint_energy(x: &[usize], y: &[usize]) -> Option<f64> {
    let xs: Vec<f64> = x.iter().map(|v| *v as f64).collect();
    let ys: Vec<f64> = y.iter().map(|v| *v as f64).collect();
    energy_distance(&xs, &ys)
}

/// `log(1 + error)`, the scale used for plotting error distributions.
pub fn log1p_error(error: f64) -> f64 {
    error.ln_1p()
}

/// Both errors for one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub annotation: usize,
    /// `None` when exactly one of the two sets is empty.
    pub energy: Option<f64>,
}

impl ErrorSummary {
    pub fn between(estimated: &[usize], truth: &[usize]) -> Self {
        Self {
            annotation: annotation_error(estimated, truth),
            energy: changepoint_energy(estimated, truth),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotation_examples() {
        assert_eq!(annotation_error(&[], &[]), 0);
        assert_eq!(annotation_error(&[1, 2, 3, 4, 5], &[7, 8, 9]), 2);
        assert_eq!(annotation_error(&[7, 8, 9], &[1, 2, 3, 4, 5]), 2);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_distance(&[0.0], &[1.0]), Some(2.0));
        assert_eq!(energy_distance(&[3.0, 9.0, 4.0], &[3.0, 9.0, 4.0]), Some(0.0));
        assert_eq!(energy_distance::<f64>(&[], &[]), Some(0.0));
        assert_eq!(energy_distance::<f64>(&[1.0], &[]), None);
        assert_eq!(energy_distance::<f64>(&[], &[1.0]), None);
    }

    #[test]
    fn within_matches_double_loop() {
        let x = [5.0, -1.0, 2.5, 2.5, 10.0];
        let mut naive = 0.0;
        for a in &x {
            for b in &x {
                naive += f64::abs(a - b);
            }
        }
        naive /= 25.0;
        assert!((mean_abs_within(&x) - naive).abs() < 1e-12);
    }

    #[test]
    fn summary() {
        let s = ErrorSummary::between(&[100, 300], &[100]);
        assert_eq!(s.annotation, 1);
        assert!(s.energy.unwrap() > 0.0);
        assert_eq!(ErrorSummary::between(&[], &[50]).energy, None);
    }
}
