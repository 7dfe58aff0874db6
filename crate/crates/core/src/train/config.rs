//! Training configuration: architecture, regularizer selection, optimizer
//! hyperparameters, and the reference-embedding recipe.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which latent regularizer the total loss adds to reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    /// Pure reconstruction.
    None,
    /// Mean squared error between latent and reference distance matrices.
    Mm,
    /// Variance of log distance ratios.
    Spae,
    /// Squared discrepancies on spanning-tree edge pairs of both spaces.
    Topoae,
}

/// How the reference embedding is produced from the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum ReferenceSpec {
    /// The input coordinates themselves.
    #[default]
    Identity,
    /// PCA projection with the given component count.
    Pca { components: usize },
    /// A fixed embedding loaded from CSV, row-aligned with the data.
    External { path: String },
}

fn default_hidden_dims() -> Vec<usize> {
    vec![128, 64]
}

fn default_batchnorm() -> bool {
    true
}

/// Pairs whose reference distance falls below this are excluded from the
/// log-ratio variance (the ratio blows up as the denominator vanishes).
fn default_spae_eps_floor() -> f64 {
    1e-9
}

/// Everything that determines a training run apart from the data itself.
/// Together with the dataset and the seed this fully determines the
/// resulting parameters and history, bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Bottleneck width.
    pub latent_dim: usize,
    /// Encoder hidden widths, input side first; the decoder mirrors them.
    #[serde(default = "default_hidden_dims")]
    pub hidden_dims: Vec<usize>,
    /// Regularizer weight at epoch 0.
    pub lambda: f64,
    /// When set, the weight moves linearly from `lambda` to this value
    /// over the epochs; when absent the weight is constant.
    #[serde(default)]
    pub lambda_final: Option<f64>,
    pub regularizer: Regularizer,
    pub batch_size: usize,
    pub lr: f64,
    #[serde(default)]
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Batch normalization on the hidden layers.
    #[serde(default = "default_batchnorm")]
    pub batchnorm: bool,
    #[serde(default = "default_spae_eps_floor")]
    pub spae_eps_floor: f64,
    #[serde(default)]
    pub reference: ReferenceSpec,
}

impl TrainConfig {
    /// The smallest batch the configured regularizer can digest: pairwise
    /// terms need 2 points, a variance over pairs needs 3.
    pub fn min_batch_points(&self) -> usize {
        match self.regularizer {
            Regularizer::None => 1,
            Regularizer::Mm | Regularizer::Topoae => 2,
            Regularizer::Spae => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::input("latent_dim must be at least 1"));
        }
        if self.hidden_dims.iter().any(|&h| h == 0) {
            return Err(Error::input("hidden layer widths must be at least 1"));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::input(format!(
                "lambda {} must be finite and >= 0",
                self.lambda
            )));
        }
        if let Some(f) = self.lambda_final {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::input(format!(
                    "lambda_final {f} must be finite and >= 0"
                )));
            }
        }
        if self.batch_size < self.min_batch_points() {
            return Err(Error::input(format!(
                "batch_size {} is too small for the configured regularizer (needs >= {})",
                self.batch_size,
                self.min_batch_points()
            )));
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::input(format!("lr {} must be finite and > 0", self.lr)));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::input(format!(
                "weight_decay {} must be finite and >= 0",
                self.weight_decay
            )));
        }
        if !self.spae_eps_floor.is_finite() || self.spae_eps_floor <= 0.0 {
            return Err(Error::input(format!(
                "spae_eps_floor {} must be finite and > 0",
                self.spae_eps_floor
            )));
        }
        if let ReferenceSpec::Pca { components } = self.reference {
            if components == 0 {
                return Err(Error::input("PCA reference needs at least 1 component"));
            }
        }
        Ok(())
    }

    /// Regularizer weight for a given epoch under the optional linear
    /// schedule.
    pub fn lambda_at(&self, epoch: usize) -> f64 {
        match self.lambda_final {
            None => self.lambda,
            Some(f) => {
                if self.epochs <= 1 {
                    self.lambda
                } else {
                    let t = epoch as f64 / (self.epochs - 1) as f64;
                    self.lambda + (f - self.lambda) * t
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> TrainConfig {
        TrainConfig {
            latent_dim: 2,
            hidden_dims: vec![8, 4],
            lambda: 1.0,
            lambda_final: None,
            regularizer: Regularizer::Mm,
            batch_size: 16,
            lr: 1e-3,
            weight_decay: 0.0,
            epochs: 10,
            seed: 0,
            batchnorm: true,
            spae_eps_floor: 1e-9,
            reference: ReferenceSpec::Identity,
        }
    }

    #[test]
    fn minimal_json_fills_in_defaults() {
        let cfg: TrainConfig = serde_json::from_str(
            r#"{
                "latent_dim": 2,
                "lambda": 0.5,
                "regularizer": "mm",
                "batch_size": 32,
                "lr": 0.001,
                "epochs": 5,
                "seed": 7
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.hidden_dims, vec![128, 64]);
        assert_eq!(cfg.weight_decay, 0.0);
        assert_eq!(cfg.lambda_final, None);
        assert!(cfg.batchnorm);
        assert_eq!(cfg.spae_eps_floor, 1e-9);
        assert_eq!(cfg.reference, ReferenceSpec::Identity);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<TrainConfig, _> = serde_json::from_str(
            r#"{
                "latent_dim": 2,
                "lambda": 0.5,
                "regularizer": "mm",
                "batch_size": 32,
                "lr": 0.001,
                "epochs": 5,
                "seed": 7,
                "learning_rate": 0.01
            }"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn reference_spec_round_trips() {
        for spec in [
            ReferenceSpec::Identity,
            ReferenceSpec::Pca { components: 10 },
            ReferenceSpec::External { path: "embed.csv".into() },
        ] {
            let json = serde_json::to_string(&spec).unwrap();
            let back: ReferenceSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(spec, back);
        }
    }

    #[test]
    fn validation_enforces_the_invariants() {
        assert!(base_config().validate().is_ok());

        let mut cfg = base_config();
        cfg.lambda = -0.1;
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.lambda = f64::NAN;
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.latent_dim = 0;
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.hidden_dims = vec![8, 0];
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.lr = 0.0;
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.weight_decay = -1.0;
        assert!(cfg.validate().is_err());

        cfg = base_config();
        cfg.reference = ReferenceSpec::Pca { components: 0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn pairwise_regularizers_need_enough_points_per_batch() {
        let mut cfg = base_config();
        cfg.batch_size = 1;
        assert!(cfg.validate().is_err());
        cfg.regularizer = Regularizer::None;
        assert!(cfg.validate().is_ok());

        cfg = base_config();
        cfg.regularizer = Regularizer::Spae;
        cfg.batch_size = 2;
        assert!(cfg.validate().is_err());
        cfg.batch_size = 3;
        assert!(cfg.validate().is_ok());

        cfg = base_config();
        cfg.regularizer = Regularizer::Topoae;
        cfg.batch_size = 2;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn lambda_schedule_interpolates_linearly() {
        let mut cfg = base_config();
        assert_eq!(cfg.lambda_at(0), 1.0);
        assert_eq!(cfg.lambda_at(9), 1.0);

        cfg.lambda_final = Some(0.0);
        assert_eq!(cfg.lambda_at(0), 1.0);
        assert_eq!(cfg.lambda_at(9), 0.0);
        assert!((cfg.lambda_at(3) - (1.0 - 3.0 / 9.0)).abs() < 1e-15);

        cfg.epochs = 1;
        assert_eq!(cfg.lambda_at(0), 1.0);
    }
}
