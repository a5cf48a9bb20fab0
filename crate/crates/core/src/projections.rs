// SPDX-License-Identifier: MIT OR Apache-2.0

//! Univariate projections of a functional series.
//!
//! * TVN: discrete total variation `Σ_j |f(s_{j+1}) − f(s_j)|` of each curve.
//! * FPC1: trapezoid inner product of each centered curve with the leading
//!   eigenfunction of the pooled empirical covariance operator.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Scalar;
use crate::series::{FunctionalSeries, ProjectedSeries, Projection};

const SYMMETRY_TOL: f64 = 1e-10;

/// Trapezoid quadrature weights on a strictly increasing grid.
pub fn trapezoid_weights<S: Scalar>(grid: &[S]) -> Vec<S> {
    let m = grid.len();
    let half = S::of(0.5);
    (0..m)
        .map(|j| {
            let left = if j > 0 { grid[j] - grid[j - 1] } else { S::zero() };
            let right = if j + 1 < m { grid[j + 1] - grid[j] } else { S::zero() };
            half * (left + right)
        })
        .collect()
}

/// Symmetric `m × m` covariance on the grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<S> {
    values: Vec<S>,
    dim: usize,
}

impl<S: Scalar> CovarianceMatrix<S> {
    pub fn new(values: Vec<S>, dim: usize) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::InvalidConfig(format!(
                "covariance buffer of {} entries is not {dim}×{dim}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let scale = values.iter().fold(S::one(), |acc, v| acc.max(v.abs()));
        let tol = S::of(SYMMETRY_TOL).max(S::epsilon() * S::of(16.0)) * scale;
        for j in 0..dim {
            for k in (j + 1)..dim {
                if (values[j * dim + k] - values[k * dim + j]).abs() > tol {
                    return Err(Error::InvalidConfig(format!(
                        "covariance is not symmetric at ({j},{k})"
                    )));
                }
            }
        }
        Ok(Self { values, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> S {
        self.values[j * self.dim + k]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    /// Smallest eigenvalue of the matrix itself (no quadrature weighting).
    pub fn min_eigenvalue(&self) -> S {
        symmetric_eigen(&self.values, self.dim)
            .values
            .into_iter()
            .fold(S::infinity(), S::min)
    }
}

/// Leading eigenfunction of the covariance operator, sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction<S> {
    pub values: Vec<S>,
    pub eigenvalue: S,
}

/// Per-row discrete total variation.
pub fn tvn_projection<S: Scalar>(series: &FunctionalSeries<S>) -> ProjectedSeries<S> {
    let values = series
        .rows()
        .map(|row| row.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
        .collect();
    ProjectedSeries::new(values, Projection::Tvn).expect("total variation of finite rows is finite and non-negative")
}

fn pointwise_mean<S: Scalar>(values: &[S], m: usize) -> Vec<S> {
    let mut mean = vec![S::zero(); m];
    for row in values.chunks_exact(m) {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc = *acc + *v;
        }
    }
    let n = S::of_usize(values.len() / m);
    mean.iter_mut().for_each(|v| *v = *v / n);
    mean
}

/// Sample covariance (divisor `n − 1`) of the rows of a row-major `n × m`
/// buffer. Requires `n ≥ 2`.
pub fn sample_covariance<S: Scalar>(values: &[S], m: usize) -> CovarianceMatrix<S> {
    let n = values.len() / m;
    assert!(n >= 2 && values.len() == n * m, "need at least two rows of width {m}");
    let mean = pointwise_mean(values, m);
    let mut cov = vec![S::zero(); m * m];
    let mut centered = vec![S::zero(); m];
    for row in values.chunks_exact(m) {
        for ((c, v), mu) in centered.iter_mut().zip(row).zip(&mean) {
            *c = *v - *mu;
        }
        for j in 0..m {
            let cj = centered[j];
            for k in j..m {
                cov[j * m + k] = cov[j * m + k] + cj * centered[k];
            }
        }
    }
    let denom = S::of_usize(n - 1);
    for j in 0..m {
        for k in j..m {
            let v = cov[j * m + k] / denom;
            cov[j * m + k] = v;
            cov[k * m + j] = v;
        }
    }
    CovarianceMatrix { values: cov, dim: m }
}

/// Pooled empirical covariance of all functions in the series.
pub fn empirical_covariance<S: Scalar>(series: &FunctionalSeries<S>) -> CovarianceMatrix<S> {
    sample_covariance(series.as_flat(), series.m())
}

/// Solves `∫ C(s, u) φ(u) du = λ φ(s)` under trapezoid quadrature and returns
/// the eigenpair with the largest eigenvalue, normalised to unit weighted L².
pub fn leading_eigenfunction<S: Scalar>(
    cov: &CovarianceMatrix<S>,
    grid: &[S],
) -> Result<Eigenfunction<S>> {
    let m = cov.dim();
    if grid.len() != m {
        return Err(Error::InvalidConfig(format!(
            "grid has {} points, covariance is {m}×{m}",
            grid.len()
        )));
    }
    if cov.as_slice().iter().all(|v| *v == S::zero()) {
        return Err(Error::DegenerateCovariance);
    }
    let weights = trapezoid_weights(grid);
    let root_w: Vec<S> = weights.iter().map(|w| w.sqrt()).collect();

    // W^{1/2} C W^{1/2} is symmetric and shares the operator's spectrum.
    let mut sym = vec![S::zero(); m * m];
    for j in 0..m {
        for k in 0..m {
            sym[j * m + k] = root_w[j] * cov.get(j, k) * root_w[k];
        }
    }
    for j in 0..m {
        for k in (j + 1)..m {
            let avg = (sym[j * m + k] + sym[k * m + j]) * S::of(0.5);
            sym[j * m + k] = avg;
            sym[k * m + j] = avg;
        }
    }
    let eig = symmetric_eigen(&sym, m);
    let lead = eig.leading_index();
    let eigenvalue = eig.values[lead];
    if !(eigenvalue > S::zero()) {
        return Err(Error::DegenerateCovariance);
    }

    let mut values: Vec<S> = eig
        .vector(lead)
        .into_iter()
        .zip(&root_w)
        .map(|(u, rw)| u / *rw)
        .collect();
    let norm = values
        .iter()
        .zip(&weights)
        .map(|(v, w)| *w * *v * *v)
        .sum::<S>()
        .sqrt();
    values.iter_mut().for_each(|v| *v = *v / norm);

    let mut pivot = 0;
    for (j, v) in values.iter().enumerate() {
        if v.abs() > values[pivot].abs() {
            pivot = j;
        }
    }
    if values[pivot] < S::zero() {
        values.iter_mut().for_each(|v| *v = -*v);
    }

    Ok(Eigenfunction { values, eigenvalue })
}

/// Scores of the pooled-mean-centered curves on the leading eigenfunction.
pub fn fpc1_projection<S: Scalar>(series: &FunctionalSeries<S>) -> Result<ProjectedSeries<S>> {
    let cov = empirical_covariance(series);
    // Variation at the level of rounding noise in the mean counts as none.
    let scale = series.as_flat().iter().fold(S::zero(), |a, v| a.max(v.abs()));
    let floor = S::of(64.0) * S::epsilon() * scale;
    if (0..cov.dim()).all(|j| cov.get(j, j) <= floor * floor) {
        return Err(Error::DegenerateCovariance);
    }
    let phi = leading_eigenfunction(&cov, series.grid())?;
    let weights = trapezoid_weights(series.grid());
    let mean = pointwise_mean(series.as_flat(), series.m());
    let kernel: Vec<S> = phi.values.iter().zip(&weights).map(|(p, w)| *p * *w).collect();
    let values = series
        .rows()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&kernel)
                .map(|((v, mu), k)| (*v - *mu) * *k)
                .sum()
        })
        .collect();
    ProjectedSeries::new(values, Projection::Fpc1)
}

/// Both projections; the FPC1 slot carries the degenerate-covariance error
/// when the curves do not vary.
pub fn project<S: Scalar>(
    series: &FunctionalSeries<S>,
) -> (ProjectedSeries<S>, Result<ProjectedSeries<S>>) {
    (tvn_projection(series), fpc1_projection(series))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rows: Vec<Vec<f64>>) -> FunctionalSeries<f64> {
        FunctionalSeries::with_uniform_grid(rows).unwrap()
    }

    #[test]
    fn tvn_examples() {
        let s = series(vec![
            vec![5.0, 5.0, 5.0, 5.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.2, 0.7, 1.0],
        ]);
        let p = tvn_projection(&s);
        assert_eq!(p.source(), Projection::Tvn);
        assert_eq!(p.values()[0], 0.0);
        assert_eq!(p.values()[1], 3.0);
        assert!((p.values()[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_examples() {
        let same = series(vec![vec![1.0, 2.0]; 3]);
        assert!(empirical_covariance(&same).as_slice().iter().all(|v| *v == 0.0));

        let c = sample_covariance(&[0.0, 0.0, 2.0, 2.0], 2);
        assert_eq!(c.as_slice(), &[2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn diagonal_covariance_picks_first_axis() {
        let grid = crate::series::uniform_grid::<f64>(2);
        let cov = CovarianceMatrix::new(vec![2.0, 0.0, 0.0, 1.0], 2).unwrap();
        let phi = leading_eigenfunction(&cov, &grid).unwrap();
        assert!(phi.values[0] > 0.0);
        assert_eq!(phi.values[1], 0.0);
        let w = trapezoid_weights(&grid);
        assert!((phi.eigenvalue - 2.0 * w[0]).abs() < 1e-15);
    }

    #[test]
    fn rank_one_is_parallel() {
        let v = [1.0, -2.0, 0.5];
        let mut c = vec![0.0; 9];
        for j in 0..3 {
            for k in 0..3 {
                c[j * 3 + k] = v[j] * v[k];
            }
        }
        let grid = crate::series::uniform_grid::<f64>(3);
        let phi = leading_eigenfunction(&CovarianceMatrix::new(c, 3).unwrap(), &grid).unwrap();
        let w = trapezoid_weights(&grid);
        // Eigenfunction of C·W for rank one vvᵀ is v itself.
        let ratio = phi.values[1] / v[1];
        for (p, x) in phi.values.iter().zip(&v) {
            assert!((p - ratio * x).abs() < 1e-12);
        }
        assert!(phi.values[1] > 0.0, "largest-magnitude entry positive");
        let expected: f64 = v.iter().zip(&w).map(|(x, wi)| x * x * wi).sum();
        assert!((phi.eigenvalue - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_covariance_is_degenerate() {
        let cov = CovarianceMatrix::new(vec![0.0; 4], 2).unwrap();
        let grid = crate::series::uniform_grid::<f64>(2);
        assert!(matches!(
            leading_eigenfunction(&cov, &grid),
            Err(Error::DegenerateCovariance)
        ));
        let flat = series(vec![vec![1.0, 2.0, 3.0]; 4]);
        assert!(matches!(fpc1_projection(&flat), Err(Error::DegenerateCovariance)));
    }

    #[test]
    fn fpc1_antisymmetric_pair() {
        let s = series(vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![0.0, 0.0]]);
        let p = fpc1_projection(&s).unwrap();
        assert_eq!(p.source(), Projection::Fpc1);
        assert!((p.values()[0] + p.values()[1]).abs() < 1e-15);
        assert!(p.values()[0].abs() > 0.1);
        assert!(p.values()[2].abs() < 1e-15);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        assert!(CovarianceMatrix::new(vec![1.0, 0.5, 0.4, 1.0], 2).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = FunctionalSeries::<f32>::with_uniform_grid(vec![
            vec![0.0, 1.0, 0.5],
            vec![1.0, 2.0, 1.0],
            vec![-1.0, 0.0, 0.2],
            vec![0.3, 0.1, 0.9],
        ])
        .unwrap();
        let p = fpc1_projection(&s).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p.values().iter().sum::<f32>()).abs() < 1e-5);
    }
}
