//! Dense row-major matrices and the handful of kernels everything else is
//! built on: matrix products, a cyclic Jacobi symmetric eigendecomposition,
//! pairwise Euclidean distances, and a counter-based RNG.
//!
//! All kernels are serial and evaluate in a fixed order, so every result is
//! bitwise reproducible across runs and platforms.

mod distance;
mod eigen;
mod matrix;
mod rng;

pub use distance::{pairwise_distances, DistanceMatrix};
pub use eigen::{sym_eigen, SymmetricEigen};
pub use matrix::Matrix;
pub use rng::Rng;
