//! Versioned training checkpoints: everything needed to continue a run
//! bitwise-identically — configuration echo, reference embedding, network
//! parameters, optimizer moments, generator state, and the loss history
//! so far.

use crate::error::{Error, Result};
use crate::reference::ReferenceEmbedding;
use crate::train::adam::AdamState;
use crate::train::config::TrainConfig;
use crate::train::fit::{EpochRecord, FitResult};
use crate::train::params::AutoencoderParams;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub reference: ReferenceEmbedding,
    pub params: AutoencoderParams,
    pub adam: AdamState,
    pub rng_state: u64,
    pub epochs_done: usize,
    pub history: Vec<EpochRecord>,
}

impl Checkpoint {
    /// Packages a finished (or partial) training result for disk. The
    /// `config` passed here is the one a later resume will run under; its
    /// epoch target may exceed what the result has done so far.
    pub fn new(
        config: TrainConfig,
        reference: ReferenceEmbedding,
        result: &FitResult,
    ) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config,
            reference,
            params: result.params.clone(),
            adam: result.adam.clone(),
            rng_state: result.rng_state,
            epochs_done: result.epochs_done,
            history: result.history.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| Error::parse(format!("serializing checkpoint: {e}")))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let checkpoint: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("checkpoint {}: {e}", path.display())))?;
        if checkpoint.version != CHECKPOINT_VERSION {
            return Err(Error::parse(format!(
                "checkpoint {} has version {} but this build reads version {}",
                path.display(),
                checkpoint.version,
                CHECKPOINT_VERSION
            )));
        }
        Ok(checkpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::PointCloud;
    use crate::linalg::{Matrix, Rng};
    use crate::train::config::{Regularizer, ReferenceSpec};
    use crate::train::fit::{fit, resume};

    fn cloud(rows: usize, cols: usize, seed: u64) -> PointCloud {
        let mut rng = Rng::new(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        PointCloud::new(Matrix::new(rows, cols, data).unwrap(), None).unwrap()
    }

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            latent_dim: 2,
            hidden_dims: vec![5],
            lambda: 0.5,
            lambda_final: None,
            regularizer: Regularizer::Mm,
            batch_size: 8,
            lr: 1e-3,
            weight_decay: 1e-4,
            epochs,
            seed: 11,
            batchnorm: true,
            spae_eps_floor: 1e-9,
            reference: ReferenceSpec::Identity,
        }
    }

    #[test]
    fn a_checkpoint_round_trips_through_disk() {
        let data = cloud(20, 4, 1);
        let reference = ReferenceEmbedding::fit_identity(&data).unwrap();
        let cfg = config(2);
        let result = fit(&cfg, &data, &reference).unwrap();
        let checkpoint = Checkpoint::new(cfg, reference, &result);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        checkpoint.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();

        assert_eq!(loaded.version, CHECKPOINT_VERSION);
        assert_eq!(loaded.params, checkpoint.params);
        assert_eq!(loaded.adam, checkpoint.adam);
        assert_eq!(loaded.history, checkpoint.history);
        assert_eq!(loaded.rng_state, checkpoint.rng_state);
        assert_eq!(loaded.epochs_done, 2);
        assert_eq!(
            loaded.reference.embedding(),
            checkpoint.reference.embedding()
        );
    }

    #[test]
    fn resuming_matches_uninterrupted_training_bitwise() {
        let data = cloud(24, 4, 2);
        let reference = ReferenceEmbedding::fit_identity(&data).unwrap();

        let full_cfg = config(4);
        let full = fit(&full_cfg, &data, &reference).unwrap();

        // Same run stopped after two epochs, checkpointed through disk
        // (so float round-tripping is on the line too), then continued
        // under the four-epoch configuration.
        let mut half_cfg = full_cfg.clone();
        half_cfg.epochs = 2;
        let half = fit(&half_cfg, &data, &reference).unwrap();
        let checkpoint = Checkpoint::new(full_cfg, reference, &half);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("halfway.json");
        checkpoint.save(&path).unwrap();
        let resumed = resume(Checkpoint::load(&path).unwrap(), &data).unwrap();

        assert_eq!(resumed.params, full.params);
        assert_eq!(resumed.adam, full.adam);
        assert_eq!(resumed.rng_state, full.rng_state);
        assert_eq!(resumed.history, full.history);
        assert_eq!(resumed.epochs_done, 4);
    }

    #[test]
    fn resuming_a_finished_run_is_a_no_op() {
        let data = cloud(16, 3, 3);
        let reference = ReferenceEmbedding::fit_identity(&data).unwrap();
        let cfg = config(2);
        let result = fit(&cfg, &data, &reference).unwrap();
        let checkpoint = Checkpoint::new(cfg, reference, &result);
        let resumed = resume(checkpoint, &data).unwrap();
        assert_eq!(resumed.params, result.params);
        assert_eq!(resumed.history, result.history);
        assert_eq!(resumed.epochs_done, 2);
    }

    #[test]
    fn version_mismatches_are_parse_errors() {
        let data = cloud(16, 3, 4);
        let reference = ReferenceEmbedding::fit_identity(&data).unwrap();
        let cfg = config(1);
        let result = fit(&cfg, &data, &reference).unwrap();
        let checkpoint = Checkpoint::new(cfg, reference, &result);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        checkpoint.save(&path).unwrap();
        let mut value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        value["version"] = serde_json::json!(99);
        fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn unreadable_checkpoints_are_clean_errors() {
        let dir = tempfile::tempdir().unwrap();
        let garbled = dir.path().join("garbled.json");
        fs::write(&garbled, "{ not json").unwrap();
        assert!(matches!(Checkpoint::load(&garbled), Err(Error::Parse(_))));
        let missing = dir.path().join("missing.json");
        assert!(matches!(Checkpoint::load(&missing), Err(Error::Io(_))));
    }
}
