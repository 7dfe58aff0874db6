//! Autoencoder training: network parameters, the distance-matching and
//! baseline regularizers, Adam with weight decay, and the deterministic
//! minibatch loop with bitwise-resumable checkpoints.

mod adam;
mod checkpoint;
mod config;
mod fit;
mod losses;
mod params;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use config::{Regularizer, ReferenceSpec, TrainConfig};
pub use fit::{
    fit, fit_with_callback, history_to_csv, resume, resume_with_callback, EpochRecord, FitResult,
};
pub use losses::{
    build_total_loss, check_total_loss_gradient, loss_mm, loss_recon, loss_spae, loss_topoae,
    LossGraph,
};
pub use params::{decode, encode, reconstruct, AutoencoderParams, BatchNormParams, LayerParams};
