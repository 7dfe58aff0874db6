//! JSON run documents: the training run configuration, the sweep
//! specification, and the reference-embedding constructor they share.

use mmae::datasets::PointCloud;
use mmae::reference::ReferenceEmbedding;
use mmae::train::{ReferenceSpec, Regularizer, TrainConfig};
use mmae::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

fn default_true() -> bool {
    true
}

fn default_test_fraction() -> f64 {
    0.2
}

/// Everything a `train` invocation needs: where the data lives, how to
/// split it, and the training section itself. Unknown keys are rejected
/// so that a typo cannot silently fall back to a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Input point-cloud CSV.
    pub data: String,
    /// Whether the CSV's last column is an integer label.
    #[serde(default = "default_true")]
    pub has_labels: bool,
    /// Held-out fraction, stratified by label when labels exist. Zero
    /// disables the split and trains on everything.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Seed for the split shuffle; defaults to the training seed.
    #[serde(default)]
    pub split_seed: Option<u64>,
    /// The training section proper.
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("run config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::input(format!(
                "test_fraction must lie in [0, 1), got {}",
                self.test_fraction
            )));
        }
        self.train.validate()
    }

    pub fn effective_split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(self.train.seed)
    }
}

/// Fits the reference embedding a config names on the given training rows.
pub fn build_reference(spec: &ReferenceSpec, train: &PointCloud) -> Result<ReferenceEmbedding> {
    match spec {
        ReferenceSpec::Identity => ReferenceEmbedding::fit_identity(train),
        ReferenceSpec::Pca { components } => ReferenceEmbedding::fit_pca(train, *components),
        ReferenceSpec::External { path } => {
            ReferenceEmbedding::fit_external(Path::new(path), train.n())
        }
    }
}

fn default_trials() -> usize {
    20
}

fn default_batch_range() -> [usize; 2] {
    [16, 256]
}

fn default_lr_range() -> [f64; 2] {
    [1e-4, 1e-2]
}

fn default_validation_fraction() -> f64 {
    0.2
}

/// Random-search specification: which knobs to draw and over what ranges.
/// The objective is fixed — kernel-density divergence at bandwidth 0.1 on
/// a held-out validation split, minimized. Batch and learning-rate ranges
/// must stay inside [16, 256] and [1e-4, 1e-2] respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Training data CSV; all trials share one validation split carved
    /// from it.
    pub data: String,
    /// Whether the CSV's last column is an integer label.
    #[serde(default = "default_true")]
    pub has_labels: bool,
    /// Number of random trials.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Seed for the validation split and the parameter draws.
    #[serde(default)]
    pub seed: u64,
    /// Template configuration; knobs without a range below pass through
    /// unchanged. Trial `t` trains with seed `base.seed + t` so trials
    /// are independent runs.
    pub base: TrainConfig,
    /// Batch sizes are drawn uniformly from this inclusive range.
    #[serde(default = "default_batch_range")]
    pub batch_range: [usize; 2],
    /// Learning rates are drawn log-uniformly from this range.
    #[serde(default = "default_lr_range")]
    pub lr_range: [f64; 2],
    /// Regularizer weights are drawn log-uniformly from this range;
    /// required when the base regularizer is active, forbidden when it is
    /// `none`. A drawn weight replaces any schedule: trials run at
    /// constant weight.
    #[serde(default)]
    pub lambda_range: Option<[f64; 2]>,
    /// Component counts for a PCA reference, drawn uniformly (inclusive).
    /// Only meaningful when the base reference is PCA; omitted there it
    /// defaults to the top fifth of the usable component count.
    #[serde(default)]
    pub pca_k_range: Option<[usize; 2]>,
    /// Fraction of the data held out as the shared validation split.
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<SweepSpec> {
        let text = fs::read_to_string(path)?;
        let spec: SweepSpec = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("sweep spec {}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::input("a sweep needs at least one trial"));
        }
        let [blo, bhi] = self.batch_range;
        if !(16 <= blo && blo <= bhi && bhi <= 256) {
            return Err(Error::input(format!(
                "batch_range must satisfy 16 <= lo <= hi <= 256, got [{blo}, {bhi}]"
            )));
        }
        let [llo, lhi] = self.lr_range;
        if !(1e-4 <= llo && llo <= lhi && lhi <= 1e-2) {
            return Err(Error::input(format!(
                "lr_range must satisfy 1e-4 <= lo <= hi <= 1e-2, got [{llo}, {lhi}]"
            )));
        }
        match (self.lambda_range, self.base.regularizer) {
            (None, Regularizer::None) => {}
            (Some(_), Regularizer::None) => {
                return Err(Error::input(
                    "lambda_range makes no sense without an active regularizer",
                ));
            }
            (None, _) => {
                return Err(Error::input(
                    "an active regularizer needs a lambda_range to search",
                ));
            }
            (Some([lo, hi]), _) => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
                    return Err(Error::input(format!(
                        "lambda_range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
        }
        if let Some([klo, khi]) = self.pca_k_range {
            if !matches!(self.base.reference, ReferenceSpec::Pca { .. }) {
                return Err(Error::input(
                    "pca_k_range makes no sense unless the base reference is pca",
                ));
            }
            if !(1 <= klo && klo <= khi) {
                return Err(Error::input(format!(
                    "pca_k_range must satisfy 1 <= lo <= hi, got [{klo}, {khi}]"
                )));
            }
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::input(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        self.base.validate()
    }
}
