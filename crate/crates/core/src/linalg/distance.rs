//! Euclidean pairwise distances and the validated distance-matrix type.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

/// Point count above which the expanded form (`|x|^2 + |y|^2 - 2<x,y>`,
/// one Gram matmul) replaces the direct subtraction form. The expanded
/// form trades a little accuracy on near-coincident points for a much
/// better memory access pattern at scale.
const EXPANDED_FORM_THRESHOLD: usize = 512;

/// Symmetric nonnegative matrix with a zero diagonal; the shared currency
/// between the topology, metric, and training modules. Construction
/// validates the invariants once so downstream code never re-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct DistanceMatrix(Matrix);

impl TryFrom<Matrix> for DistanceMatrix {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<DistanceMatrix> {
        DistanceMatrix::new(m)
    }
}

impl From<DistanceMatrix> for Matrix {
    fn from(d: DistanceMatrix) -> Matrix {
        d.0
    }
}

impl DistanceMatrix {
    /// Validates and wraps a raw matrix: square, at least 1x1, entries
    /// finite and nonnegative, diagonal exactly zero, and bitwise
    /// symmetric.
    pub fn new(m: Matrix) -> Result<DistanceMatrix> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::input(format!(
                "distance matrix must be square, got {rows}x{cols}"
            )));
        }
        if rows == 0 {
            return Err(Error::input("distance matrix must hold at least one point"));
        }
        for i in 0..rows {
            if m.get(i, i) != 0.0 {
                return Err(Error::input(format!(
                    "distance matrix diagonal entry ({i},{i}) is {}, expected 0",
                    m.get(i, i)
                )));
            }
            for j in (i + 1)..cols {
                let d = m.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::input(format!(
                        "distance matrix entry ({i},{j}) is {d}"
                    )));
                }
                if d != m.get(j, i) {
                    return Err(Error::input(format!(
                        "distance matrix is asymmetric at ({i},{j}): {d} vs {}",
                        m.get(j, i)
                    )));
                }
            }
        }
        Ok(DistanceMatrix(m))
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    /// Strict upper triangle flattened row by row: the canonical pair
    /// ordering used by correlation-style metrics.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Largest entry.
    pub fn max(&self) -> f64 {
        self.0.data().iter().fold(0.0_f64, |acc, &x| acc.max(x))
    }
}

/// All-pairs Euclidean distances between the rows of `points`.
///
/// Up to 512 points the direct subtraction form is used; above that the
/// expanded form with a single Gram matmul takes over, with negative
/// squared distances from cancellation clamped to zero. Both entries of
/// each symmetric pair are written from one computed value, so the result
/// is bitwise symmetric.
pub fn pairwise_distances(points: &Matrix) -> Result<DistanceMatrix> {
    if points.rows() == 0 {
        return Err(Error::input("pairwise distances need at least one point"));
    }
    let m = if points.rows() <= EXPANDED_FORM_THRESHOLD {
        pairwise_direct(points)
    } else {
        pairwise_expanded(points)?
    };
    DistanceMatrix::new(m)
}

pub(crate) fn pairwise_direct(points: &Matrix) -> Matrix {
    let n = points.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = points.row(i);
        for j in (i + 1)..n {
            let xj = points.row(j);
            let mut acc = 0.0;
            for (a, b) in xi.iter().zip(xj) {
                let d = a - b;
                acc += d * d;
            }
            let d = acc.sqrt();
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    out
}

pub(crate) fn pairwise_expanded(points: &Matrix) -> Result<Matrix> {
    let n = points.rows();
    let gram = points.matmul(&points.transpose())?;
    let sq_norms: Vec<f64> = (0..n).map(|i| gram.get(i, i)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let sq = sq_norms[i] + sq_norms[j] - 2.0 * gram.get(i, j);
            // Cancellation can push tiny true distances below zero.
            let d = sq.max(0.0).sqrt();
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    Ok(out)
}
