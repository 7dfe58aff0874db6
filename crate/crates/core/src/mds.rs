//! Classical (Torgerson) multidimensional scaling: recovering coordinates
//! from a distance matrix by eigendecomposing the double-centered squared
//! distances. Serves as the memory-bound global baseline that latent
//! distance matching is measured against.

use crate::error::{Error, Result};
use crate::linalg::{pairwise_distances, sym_eigen, DistanceMatrix, Matrix};

/// Output of [`classical_mds`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    /// The `n x d` embedding; column `c` is `sqrt(lambda_c) * v_c` for the
    /// c-th largest eigenvalue, or all zeros when that eigenvalue is not
    /// positive (see `zeroed_columns`).
    pub embedding: Matrix,
    /// Full spectrum of the centered Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// `sum |negative eigenvalues| / sum |eigenvalues|`: how far the input
    /// is from being Euclidean-realizable. 0 for realizable inputs.
    pub negative_mass: f64,
    /// Embedding columns that were zero-filled because their eigenvalue
    /// was <= 0.
    pub zeroed_columns: Vec<usize>,
}

/// Embeds `d` into `dim` dimensions via the double-centered Gram matrix
/// `B = -1/2 J D^2 J`. Negative eigenvalues are clamped to zero — their
/// columns are zero-filled and flagged, and their mass is reported —
/// never silently dropped. Requires `1 <= dim <= n - 1`.
pub fn classical_mds(d: &DistanceMatrix, dim: usize) -> Result<MdsResult> {
    let n = d.n();
    if dim < 1 || dim > n - 1 {
        return Err(Error::input(format!(
            "embedding dimension {dim} outside [1, {}]",
            n - 1
        )));
    }

    // b_ij = -1/2 (d_ij^2 - rowmean_i - rowmean_j + grandmean), the
    // entrywise form of the double centering.
    let mut sq = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            sq.set(i, j, v * v);
        }
    }
    let mut row_mean = vec![0.0; n];
    for (i, r) in row_mean.iter_mut().enumerate() {
        *r = sq.row(i).iter().sum::<f64>() / n as f64;
    }
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, -0.5 * (sq.get(i, j) - row_mean[i] - row_mean[j] + grand));
        }
    }

    let eig = sym_eigen(&b)?;
    let mut embedding = Matrix::zeros(n, dim);
    let mut zeroed_columns = Vec::new();
    for c in 0..dim {
        let lambda = eig.values[c];
        if lambda > 0.0 {
            let scale = lambda.sqrt();
            for i in 0..n {
                embedding.set(i, c, scale * eig.vectors.get(i, c));
            }
        } else {
            zeroed_columns.push(c);
        }
    }

    let total: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let negative: f64 = eig.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let negative_mass = if total == 0.0 { 0.0 } else { negative / total };

    Ok(MdsResult {
        embedding,
        eigenvalues: eig.values,
        negative_mass,
        zeroed_columns,
    })
}

/// Mean squared discrepancy between a target distance matrix and the
/// pairwise distances of an embedding: `(1/n^2) sum_ij (D_ij - D_Y_ij)^2`,
/// summed over the full matrix. This is the same functional form as the
/// distance-matching regularizer, so training quality and MDS quality are
/// directly comparable.
pub fn mds_stress(d: &DistanceMatrix, y: &Matrix) -> Result<f64> {
    let n = d.n();
    if y.rows() != n {
        return Err(Error::input(format!(
            "embedding has {} rows but the distance matrix has {n}",
            y.rows()
        )));
    }
    let d_y = pairwise_distances(y)?;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gap = d.get(i, j) - d_y.get(i, j);
            acc += gap * gap;
        }
    }
    Ok(acc / (n as f64 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    fn random_points(n: usize, dim: usize, seed: u64) -> Matrix {
        let mut rng = Rng::new(seed);
        let data: Vec<f64> = (0..n * dim).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        Matrix::new(n, dim, data).unwrap()
    }

    /// Isometric embedding of `points` into a higher ambient dimension:
    /// zero-padding followed by a random orthogonal rotation.
    fn embed_isometrically(points: &Matrix, ambient: usize, seed: u64) -> Matrix {
        let (n, d) = (points.rows(), points.cols());
        assert!(ambient >= d);
        let mut rng = Rng::new(seed);
        // Gram-Schmidt on random vectors gives an orthonormal basis.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(ambient);
        while basis.len() < ambient {
            let mut v: Vec<f64> = (0..ambient).map(|_| rng.standard_normal()).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for x in &mut v {
                    *x /= norm;
                }
                basis.push(v);
            }
        }
        let mut out = Matrix::zeros(n, ambient);
        for i in 0..n {
            for j in 0..ambient {
                let mut acc = 0.0;
                for c in 0..d {
                    acc += points.get(i, c) * basis[c][j];
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn two_points_land_at_plus_minus_half_the_distance() {
        let d = pairwise_distances(&Matrix::new(2, 1, vec![0.0, 4.0]).unwrap()).unwrap();
        let result = classical_mds(&d, 1).unwrap();
        let (a, b) = (result.embedding.get(0, 0), result.embedding.get(1, 0));
        assert!((a.abs() - 2.0).abs() < 1e-9);
        assert!((a + b).abs() < 1e-9);
        assert!(result.negative_mass < 1e-12);
    }

    #[test]
    fn realizable_distances_are_recovered_exactly() {
        let points = random_points(12, 3, 1);
        let lifted = embed_isometrically(&points, 10, 2);
        let d = pairwise_distances(&lifted).unwrap();
        let result = classical_mds(&d, 3).unwrap();
        let d_y = pairwise_distances(&result.embedding).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!((d.get(i, j) - d_y.get(i, j)).abs() < 1e-6);
            }
        }
        assert!(mds_stress(&d, &result.embedding).unwrap() < 1e-10);
        assert!(result.zeroed_columns.is_empty());
    }

    #[test]
    fn embedding_columns_are_centered() {
        let d = pairwise_distances(&random_points(15, 4, 3)).unwrap();
        let result = classical_mds(&d, 4).unwrap();
        for mean in result.embedding.column_means() {
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_sums_to_the_gram_trace() {
        let d = pairwise_distances(&random_points(10, 3, 4)).unwrap();
        let result = classical_mds(&d, 3).unwrap();
        // trace(B) = sum of squared distances to the centroid; equal to
        // the eigenvalue sum.
        let sum: f64 = result.eigenvalues.iter().sum();
        let y_full = classical_mds(&d, 9).unwrap().embedding;
        let trace: f64 = y_full.data().iter().map(|v| v * v).sum();
        assert!((sum - trace).abs() < 1e-8, "{sum} vs {trace}");
    }

    #[test]
    fn a_non_euclidean_metric_reports_negative_mass() {
        // Two pairs at distance 2 with all cross distances 1: both points
        // of each pair would have to sit at the same midpoint, which is
        // impossible, so the centered Gram matrix has spectrum {2,2,0,-1}.
        let mut m = Matrix::zeros(4, 4);
        for (i, j, v) in [(0, 1, 2.0), (2, 3, 2.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)]
        {
            m.set(i, j, v);
            m.set(j, i, v);
        }
        let d = DistanceMatrix::new(m).unwrap();
        let result = classical_mds(&d, 3).unwrap();
        assert!((result.negative_mass - 0.2).abs() < 1e-9);
        let expected = [2.0, 2.0, 0.0, -1.0];
        for (got, want) in result.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn non_positive_directions_are_zero_filled_and_flagged() {
        // Three mutually entangled pairs: distance 2 inside each pair,
        // 1 across. The centered Gram spectrum is {2, 2, 2, 0, -1, -1},
        // so asking for 5 columns forces a decisively negative direction
        // into the embedding.
        let mut m = Matrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    m.set(i, j, if j == i ^ 1 { 2.0 } else { 1.0 });
                }
            }
        }
        let d = DistanceMatrix::new(m).unwrap();
        let result = classical_mds(&d, 5).unwrap();
        let expected = [2.0, 2.0, 2.0, 0.0, -1.0, -1.0];
        for (got, want) in result.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!((result.negative_mass - 0.25).abs() < 1e-9);

        // Column 4 holds an eigenvalue of -1: flagged and all zeros.
        // (Column 3's eigenvalue is 0 up to rounding, so its flag state
        // depends on the sign of the residue; don't pin it down.)
        assert!(result.zeroed_columns.contains(&4));
        for &c in &result.zeroed_columns {
            assert!(result.eigenvalues[c] <= 0.0);
            for i in 0..6 {
                assert_eq!(result.embedding.get(i, c), 0.0);
            }
        }
        for c in 0..3 {
            assert!(!result.zeroed_columns.contains(&c));
        }
    }

    #[test]
    fn stress_of_the_zero_embedding_is_the_mean_squared_distance() {
        let d = pairwise_distances(&random_points(8, 3, 5)).unwrap();
        let zero = Matrix::zeros(8, 2);
        let got = mds_stress(&d, &zero).unwrap();
        let mut expected = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                expected += d.get(i, j) * d.get(i, j);
            }
        }
        expected /= 64.0;
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn stress_is_non_increasing_in_the_embedding_dimension() {
        let d = pairwise_distances(&random_points(20, 3, 6)).unwrap();
        let mut last = f64::INFINITY;
        for dim in 1..=4 {
            let result = classical_mds(&d, dim).unwrap();
            let stress = mds_stress(&d, &result.embedding).unwrap();
            assert!(stress <= last + 1e-12, "dim {dim}: {stress} > {last}");
            last = stress;
        }
    }

    #[test]
    fn dimension_bounds_are_enforced() {
        let d = pairwise_distances(&random_points(5, 2, 7)).unwrap();
        assert!(classical_mds(&d, 0).is_err());
        assert!(classical_mds(&d, 5).is_err());
        assert!(classical_mds(&d, 4).is_ok());
        let y = Matrix::zeros(4, 2);
        assert!(mds_stress(&d, &y).is_err());
    }
}
