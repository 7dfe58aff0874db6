//! Manifold-matching autoencoder engine.
//!
//! The crate trains autoencoders whose latent pairwise distances are pulled
//! toward the pairwise distances of a reference embedding, alongside the
//! usual baselines (plain reconstruction, scale-preserving and MST-based
//! regularizers), and evaluates embeddings with a distance- and
//! topology-aware metric suite.
//!
//! Everything is deterministic: a fixed counter-based RNG, serial inner
//! loops, and seedable entry points mean byte-identical reruns on any
//! platform.

pub mod autodiff;
pub mod datasets;
pub mod error;
pub mod fmt;
pub mod linalg;
pub mod mds;
pub mod metrics;
pub mod reference;
pub mod tda;
pub mod train;

pub use error::{Error, Result};
pub use linalg::{DistanceMatrix, Matrix, Rng};
