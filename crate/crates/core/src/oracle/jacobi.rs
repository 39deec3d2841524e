//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Plain O(d^3)-per-sweep rotations with no external dependencies; adequate
//! for the dense oracle's small matrices and converging quadratically once
//! the off-diagonal mass is small.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Eigendecomposition of a symmetric matrix.
///
/// `values[k]` pairs with the k-th column of `vectors` (stored row-major:
/// `vectors[r * dim + k]` is component r of eigenvector k).
pub struct SymmetricEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    /// Component r of eigenvector k.
    #[inline]
    pub fn vector_component(&self, r: usize, k: usize) -> f64 {
        self.vectors[r * self.dim + k]
    }
}

fn off_diagonal_norm(a: &[f64], dim: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..dim {
        for q in (p + 1)..dim {
            let x = a[p * dim + q];
            acc += 2.0 * x * x;
        }
    }
    acc.sqrt()
}

/// Diagonalize `matrix` (row-major, dim x dim, assumed symmetric).
pub fn symmetric_eigen(matrix: &[f64], dim: usize) -> Result<SymmetricEigen> {
    assert_eq!(matrix.len(), dim * dim);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; dim * dim];
    for k in 0..dim {
        v[k * dim + k] = 1.0;
    }
    if dim <= 1 {
        return Ok(SymmetricEigen {
            dim,
            values: a,
            vectors: v,
        });
    }

    let scale = {
        let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        fro.max(1.0)
    };
    let tol = OFF_DIAGONAL_TOL * scale;

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, dim) <= tol {
            let values = (0..dim).map(|k| a[k * dim + k]).collect();
            return Ok(SymmetricEigen {
                dim,
                values,
                vectors: v,
            });
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    // avoid overflow in theta^2; tan collapses to 1/(2 theta)
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // rows/columns p and q of A
                for k in 0..dim {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * dim + p] = new_kp;
                    a[p * dim + k] = new_kp;
                    a[k * dim + q] = new_kq;
                    a[q * dim + k] = new_kq;
                }
                a[p * dim + p] = app - t * apq;
                a[q * dim + q] = aqq + t * apq;
                a[p * dim + q] = 0.0;
                a[q * dim + p] = 0.0;

                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::EigenNonConvergence {
        sweeps: MAX_SWEEPS,
        off: off_diagonal_norm(&a, dim),
    })
}
