//! Symmetric eigendecomposition via cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Result of [`sym_eigen`]: eigenvalues sorted descending by value, with
/// `vectors` holding the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Maximum number of full sweeps before giving up. Jacobi converges
/// quadratically once it gets going; well-conditioned inputs finish in
/// under ten sweeps, so hitting this budget signals a genuinely broken
/// input.
const MAX_SWEEPS: usize = 100;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// the Frobenius norm of the (symmetrized) input.
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + A^T) / 2` before decomposing, so tiny
/// asymmetries from upstream arithmetic are harmless. Sweeps run until the
/// off-diagonal Frobenius norm drops below `1e-12 * ||A||_F` or the sweep
/// budget is exhausted (a numerical error).
pub fn sym_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::input(format!(
            "eigendecomposition needs a square matrix, got {rows}x{cols}"
        )));
    }
    if rows == 0 {
        return Err(Error::input("eigendecomposition of an empty matrix"));
    }
    let n = rows;

    // Work on the symmetrized copy.
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, 0.5 * (a.get(i, j) + a.get(j, i)));
        }
    }
    let norm = b.frobenius_norm();
    let tol = OFF_DIAGONAL_TOL * norm;

    let mut v = Matrix::identity(n);
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&b) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut b, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&b) > tol {
        return Err(Error::numerical(format!(
            "Jacobi eigendecomposition did not converge in {MAX_SWEEPS} sweeps \
             (off-diagonal norm {} vs tolerance {tol})",
            off_diagonal_norm(&b)
        )));
    }

    // Sort eigenpairs descending by eigenvalue; ties keep their original
    // order so the output is deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b.get(j, j).total_cmp(&b.get(i, i)));
    let values: Vec<f64> = order.iter().map(|&i| b.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, dst, v.get(r, src));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(b: &Matrix) -> f64 {
    let n = b.rows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let x = b.get(p, q);
            acc += 2.0 * x * x;
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing `b[p][q]`, applied to `b` symmetrically and
/// accumulated into the eigenvector matrix `v`.
fn rotate(b: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let bpq = b.get(p, q);
    if bpq == 0.0 {
        return;
    }
    let bpp = b.get(p, p);
    let bqq = b.get(q, q);

    // Stable tangent formula: t is the smaller root of t^2 + 2t*theta - 1.
    let theta = (bqq - bpp) / (2.0 * bpq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (theta - (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = b.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let bkp = b.get(k, p);
        let bkq = b.get(k, q);
        let new_kp = c * bkp - s * bkq;
        let new_kq = s * bkp + c * bkq;
        b.set(k, p, new_kp);
        b.set(p, k, new_kp);
        b.set(k, q, new_kq);
        b.set(q, k, new_kq);
    }
    b.set(p, p, bpp - t * bpq);
    b.set(q, q, bqq + t * bpq);
    b.set(p, q, 0.0);
    b.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = Rng::new(seed);
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.uniform_in(-2.0, 2.0);
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        a
    }

    fn reconstruct(eig: &SymmetricEigen) -> Matrix {
        let n = eig.values.len();
        let mut scaled = eig.vectors.clone();
        // scaled = V * diag(lambda)
        for i in 0..n {
            for j in 0..n {
                scaled.set(i, j, scaled.get(i, j) * eig.values[j]);
            }
        }
        scaled.matmul(&eig.vectors.transpose()).unwrap()
    }

    #[test]
    fn diagonal_matrix_sorted_descending() {
        let mut a = Matrix::zeros(3, 3);
        a.set(0, 0, 3.0);
        a.set(1, 1, 1.0);
        a.set(2, 2, 2.0);
        let eig = sym_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        // Eigenvectors are signed standard basis vectors.
        let expected_axes = [0usize, 2, 1];
        for (col, &axis) in expected_axes.iter().enumerate() {
            for r in 0..3 {
                let want = if r == axis { 1.0 } else { 0.0 };
                assert!((eig.vectors.get(r, col).abs() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two_analytic_pair() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors along
        // (1,1) and (1,-1).
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = sym_eigen(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = (eig.vectors.get(0, 0), eig.vectors.get(1, 0));
        assert!((v0.0.abs() - inv_sqrt2).abs() < 1e-12);
        assert!((v0.0 - v0.1).abs() < 1e-12, "first eigenvector is along (1,1)");
    }

    #[test]
    fn random_matrix_reconstructs_and_is_orthonormal() {
        for seed in [1u64, 2, 3] {
            let a = random_symmetric(10, seed);
            let norm = a.frobenius_norm();
            let eig = sym_eigen(&a).unwrap();

            // Eigen residual: A v = lambda v.
            for j in 0..10 {
                for i in 0..10 {
                    let av: f64 = (0..10).map(|k| a.get(i, k) * eig.vectors.get(k, j)).sum();
                    let lv = eig.values[j] * eig.vectors.get(i, j);
                    assert!((av - lv).abs() < 1e-8 * norm.max(1.0), "seed {seed}");
                }
            }

            // V^T V = I.
            let vtv = eig.vectors.transpose().matmul(&eig.vectors).unwrap();
            for i in 0..10 {
                for j in 0..10 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv.get(i, j) - want).abs() < 1e-10);
                }
            }

            // V diag(lambda) V^T = A.
            let back = reconstruct(&eig);
            for i in 0..10 {
                for j in 0..10 {
                    assert!((back.get(i, j) - a.get(i, j)).abs() < 1e-8 * norm.max(1.0));
                }
            }

            // Eigenvalue sum matches the trace.
            let trace: f64 = (0..10).map(|i| a.get(i, i)).sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() < 1e-8 * norm.max(1.0));
        }
    }

    #[test]
    fn asymmetric_input_is_symmetrized_first() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let sym = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let got = sym_eigen(&a).unwrap();
        let want = sym_eigen(&sym).unwrap();
        for (x, y) in got.values.iter().zip(&want.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hundred_dimensional_input_converges() {
        let a = random_symmetric(100, 77);
        let eig = sym_eigen(&a).unwrap();
        let trace: f64 = (0..100).map(|i| a.get(i, i)).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() < 1e-7 * a.frobenius_norm());
    }

    #[test]
    fn rejects_non_square_input() {
        assert!(matches!(sym_eigen(&Matrix::zeros(2, 3)), Err(Error::Input(_))));
    }
}
