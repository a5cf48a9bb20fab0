// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix. `vectors` is row-major with eigenvector
/// `k` stored in column `k`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<S> {
    pub values: Vec<S>,
    pub vectors: Vec<S>,
    pub dim: usize,
}

impl<S: Scalar> SymmetricEigen<S> {
    /// Index of the largest eigenvalue (smallest index on ties).
    pub fn leading_index(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }

    pub fn vector(&self, k: usize) -> Vec<S> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + k]).collect()
    }
}

/// Decomposes the `dim × dim` row-major symmetric matrix `a`.
///
/// Only symmetry of the input is assumed; the strict lower triangle is read
/// as given, so callers should pass an exactly symmetric buffer.
pub fn symmetric_eigen<S: Scalar>(a: &[S], dim: usize) -> SymmetricEigen<S> {
    assert_eq!(a.len(), dim * dim, "matrix buffer does not match dimension");
    let mut a = a.to_vec();
    let mut v = vec![S::zero(); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = S::one();
    }

    let frob2: S = a.iter().map(|x| *x * *x).sum();
    let threshold = frob2 * S::epsilon() * S::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut off = S::zero();
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off + a[p * dim + q] * a[p * dim + q];
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq == S::zero() {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (S::of(2.0) * apq);
                let t = if theta >= S::zero() {
                    S::one() / (theta + (theta * theta + S::one()).sqrt())
                } else {
                    -S::one() / (-theta + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;

                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                a[p * dim + q] = S::zero();
                a[q * dim + p] = S::zero();
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen {
        values: (0..dim).map(|i| a[i * dim + i]).collect(),
        vectors: v,
        dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_fixed_point() {
        let e = symmetric_eigen(&[3.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.leading_index(), 0);
    }

    #[test]
    fn two_by_two_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let e = symmetric_eigen(&[2.0f64, 1.0, 1.0, 2.0], 2);
        let k = e.leading_index();
        assert!((e.values[k] - 3.0).abs() < 1e-14);
        let v = e.vector(k);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((v[0] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let dim = 6;
        let mut a = vec![0.0f64; dim * dim];
        let mut x = 0.37f64;
        for i in 0..dim {
            for j in i..dim {
                x = (x * 7.13 + 0.11).fract();
                a[i * dim + j] = x - 0.5;
                a[j * dim + i] = x - 0.5;
            }
        }
        let e = symmetric_eigen(&a, dim);
        for i in 0..dim {
            for j in 0..dim {
                let rec: f64 = (0..dim)
                    .map(|k| e.vectors[i * dim + k] * e.values[k] * e.vectors[j * dim + k])
                    .sum();
                assert!((rec - a[i * dim + j]).abs() < 1e-12);
            }
        }
    }
}
