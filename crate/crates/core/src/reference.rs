//! Reference embeddings: the fixed target geometries that training pulls
//! latent distances toward.
//!
//! A reference is fitted once on the training rows and frozen. During
//! training, minibatch reference distances are taken by slicing the
//! precomputed embedding rows by batch index; nothing is ever re-fitted
//! per batch.

use crate::datasets::{load_csv, PointCloud};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// How a reference embedding was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// The raw input coordinates themselves.
    Identity,
    /// A linear PCA projection fitted on the training rows.
    Pca,
    /// An arbitrary embedding loaded from CSV, aligned with the fitted
    /// rows by position. No out-of-sample mapping exists.
    External,
}

/// Out-of-sample map for references that have one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Map {
    Identity,
    /// `y = (x - mean) * components^T`, components orthonormal rows.
    Linear { mean: Vec<f64>, components: Matrix },
}

/// A fitted reference embedding: `n x k` coordinates aligned with the
/// training rows, plus (when the kind supports it) a projector for new
/// points and the explained-variance spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEmbedding {
    kind: ReferenceKind,
    e: Matrix,
    map: Option<Map>,
    explained_variance: Option<Vec<f64>>,
}

impl ReferenceEmbedding {
    /// The identity reference: the data's own coordinates.
    pub fn fit_identity(x: &PointCloud) -> Result<ReferenceEmbedding> {
        if x.dim() == 0 {
            return Err(Error::input("identity reference needs at least one feature"));
        }
        Ok(ReferenceEmbedding {
            kind: ReferenceKind::Identity,
            e: x.points.clone(),
            map: Some(Map::Identity),
            explained_variance: None,
        })
    }

    /// Fits a `k`-component PCA on the training rows. When features
    /// outnumber points the decomposition runs on the `n x n` Gram matrix
    /// instead of the `D x D` covariance; the two routes share their
    /// nonzero spectrum, so the explained variances agree. `k` must lie in
    /// `[1, min(n-1, D)]` and within the effective rank of the data.
    pub fn fit_pca(x: &PointCloud, k: usize) -> Result<ReferenceEmbedding> {
        let n = x.n();
        let d = x.dim();
        if n < 2 {
            return Err(Error::input("PCA needs at least two points"));
        }
        let k_max = (n - 1).min(d);
        if k == 0 || k > k_max {
            return Err(Error::input(format!(
                "PCA component count {k} outside [1, {k_max}]"
            )));
        }

        let means = x.points.column_means();
        let mut centered = x.points.clone();
        for i in 0..n {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&means) {
                *v -= m;
            }
        }
        let scale = 1.0 / (n as f64 - 1.0);

        let (spectrum, components) = if d <= n {
            // Covariance route: C = Xc^T Xc / (n-1), D x D.
            let cov = centered.transpose().matmul(&centered)?.map(|v| v * scale);
            let eig = sym_eigen(&cov)?;
            let spectrum: Vec<f64> = eig.values[..k_max].to_vec();
            let mut components = Matrix::zeros(k, d);
            for c in 0..k {
                for j in 0..d {
                    components.set(c, j, eig.vectors.get(j, c));
                }
            }
            (spectrum, components)
        } else {
            // Gram route: G = Xc Xc^T / (n-1), n x n; covariance
            // eigenvectors are recovered as Xc^T u / sqrt((n-1) lambda).
            let gram = centered.matmul(&centered.transpose())?.map(|v| v * scale);
            let eig = sym_eigen(&gram)?;
            let spectrum: Vec<f64> = eig.values[..k_max].to_vec();
            let lead = spectrum[0].max(1.0);
            let mut components = Matrix::zeros(k, d);
            for c in 0..k {
                let lambda = eig.values[c];
                if lambda <= 1e-12 * lead {
                    return Err(Error::input(format!(
                        "PCA component {c} lies beyond the data's effective rank"
                    )));
                }
                let denom = ((n as f64 - 1.0) * lambda).sqrt();
                for j in 0..d {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += centered.get(i, j) * eig.vectors.get(i, c);
                    }
                    components.set(c, j, acc / denom);
                }
            }
            (spectrum, components)
        };

        let e = centered.matmul(&components.transpose())?;
        Ok(ReferenceEmbedding {
            kind: ReferenceKind::Pca,
            e,
            map: Some(Map::Linear { mean: means, components }),
            explained_variance: Some(spectrum),
        })
    }

    /// Loads an external embedding whose row `i` corresponds to fitted row
    /// `i`. The row count must match exactly.
    pub fn fit_external(path: &Path, expected_rows: usize) -> Result<ReferenceEmbedding> {
        let cloud = load_csv(path, false)?;
        if cloud.n() != expected_rows {
            return Err(Error::input(format!(
                "external embedding {} has {} rows but the data has {expected_rows}",
                path.display(),
                cloud.n()
            )));
        }
        Ok(ReferenceEmbedding {
            kind: ReferenceKind::External,
            e: cloud.points,
            map: None,
            explained_variance: None,
        })
    }

    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    /// The full fitted embedding, rows aligned with the fitted data.
    pub fn embedding(&self) -> &Matrix {
        &self.e
    }

    /// Number of fitted rows.
    pub fn n(&self) -> usize {
        self.e.rows()
    }

    /// Embedding dimensionality.
    pub fn out_dim(&self) -> usize {
        self.e.cols()
    }

    /// PCA spectrum over all `min(n-1, D)` directions, descending.
    pub fn explained_variance(&self) -> Option<&[f64]> {
        self.explained_variance.as_deref()
    }

    /// Embedding rows for a minibatch, addressed by fitted-row index.
    /// Unknown indices are an input error.
    pub fn rows(&self, indices: &[usize]) -> Result<Matrix> {
        self.e.select_rows(indices)
    }

    /// Restriction of the reference to a subset of its fitted rows; the
    /// projector (when present) is carried along unchanged.
    pub fn restrict_rows(&self, indices: &[usize]) -> Result<ReferenceEmbedding> {
        Ok(ReferenceEmbedding {
            kind: self.kind,
            e: self.e.select_rows(indices)?,
            map: self.map.clone(),
            explained_variance: self.explained_variance.clone(),
        })
    }

    /// Maps new points through the fitted projector. External references
    /// have none, so asking is an input error.
    pub fn transform(&self, batch: &Matrix) -> Result<Matrix> {
        match &self.map {
            None => Err(Error::input(
                "external reference embeddings cannot map out-of-sample points",
            )),
            Some(Map::Identity) => {
                if batch.cols() != self.e.cols() {
                    return Err(Error::input(format!(
                        "batch has {} features, reference was fitted on {}",
                        batch.cols(),
                        self.e.cols()
                    )));
                }
                Ok(batch.clone())
            }
            Some(Map::Linear { mean, components }) => {
                if batch.cols() != mean.len() {
                    return Err(Error::input(format!(
                        "batch has {} features, reference was fitted on {}",
                        batch.cols(),
                        mean.len()
                    )));
                }
                let mut centered = batch.clone();
                for i in 0..centered.rows() {
                    for (v, m) in centered.row_mut(i).iter_mut().zip(mean) {
                        *v -= m;
                    }
                }
                centered.matmul(&components.transpose())
            }
        }
    }
}
