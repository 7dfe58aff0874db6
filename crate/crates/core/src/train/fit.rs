//! Minibatch training loop: seeded shuffling, the batch-skip rule for
//! pairwise regularizers, batchnorm running-stat maintenance, and
//! per-epoch loss averages.

use crate::autodiff::Tape;
use crate::datasets::PointCloud;
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::linalg::{Matrix, Rng};
use crate::reference::ReferenceEmbedding;
use crate::train::adam::{adam_step, AdamState};
use crate::train::checkpoint::Checkpoint;
use crate::train::config::TrainConfig;
use crate::train::losses::build_total_loss;
use crate::train::params::AutoencoderParams;
use serde::{Deserialize, Serialize};

/// Unweighted means over the optimizer steps an epoch executed, plus the
/// regularizer coefficient that was in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub recon: f64,
    /// Unscaled regularizer mean; 0 when no regularizer subgraph was built.
    pub reg: f64,
    pub total: f64,
    pub lambda: f64,
    pub steps: usize,
}

/// Everything training produces, sufficient to checkpoint and continue.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: AutoencoderParams,
    pub adam: AdamState,
    pub rng_state: u64,
    pub epochs_done: usize,
    pub history: Vec<EpochRecord>,
}

fn check_shapes(config: &TrainConfig, train: &PointCloud, reference: &ReferenceEmbedding) -> Result<()> {
    if reference.n() != train.n() {
        return Err(Error::input(format!(
            "reference embedding covers {} rows but the training data has {}",
            reference.n(),
            train.n()
        )));
    }
    if train.n() < config.min_batch_points() {
        return Err(Error::input(format!(
            "{} points cannot fill even one usable batch (the selected regularizer needs {})",
            train.n(),
            config.min_batch_points()
        )));
    }
    Ok(())
}

/// Trains from a fresh initialization.
pub fn fit(
    config: &TrainConfig,
    train: &PointCloud,
    reference: &ReferenceEmbedding,
) -> Result<FitResult> {
    fit_with_callback(config, train, reference, |_| {})
}

/// [`fit`] with a per-epoch observer. The callback sees each record right
/// after its epoch completes and must not mutate training state.
pub fn fit_with_callback(
    config: &TrainConfig,
    train: &PointCloud,
    reference: &ReferenceEmbedding,
    callback: impl FnMut(&EpochRecord),
) -> Result<FitResult> {
    config.validate()?;
    check_shapes(config, train, reference)?;
    // One RNG stream drives initialization and every later shuffle, so a
    // checkpointed state word resumes the stream exactly.
    let mut rng = Rng::new(config.seed);
    let params = AutoencoderParams::init(config, train.dim(), &mut rng)?;
    let adam = AdamState::matching(&params.flatten());
    run_loop(config, train, reference, params, adam, rng, Vec::new(), 0, callback)
}

/// Continues training from a checkpoint; the result is bitwise identical
/// to never having stopped.
pub fn resume(checkpoint: Checkpoint, train: &PointCloud) -> Result<FitResult> {
    resume_with_callback(checkpoint, train, |_| {})
}

/// [`resume`] with a per-epoch observer.
pub fn resume_with_callback(
    checkpoint: Checkpoint,
    train: &PointCloud,
    callback: impl FnMut(&EpochRecord),
) -> Result<FitResult> {
    let Checkpoint {
        config,
        reference,
        params,
        adam,
        rng_state,
        epochs_done,
        history,
        ..
    } = checkpoint;
    config.validate()?;
    check_shapes(&config, train, &reference)?;
    if epochs_done > config.epochs {
        return Err(Error::input(format!(
            "checkpoint has {} epochs done but the configuration stops at {}",
            epochs_done, config.epochs
        )));
    }
    let rng = Rng::from_state(rng_state);
    run_loop(
        &config, train, &reference, params, adam, rng, history, epochs_done, callback,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_loop(
    config: &TrainConfig,
    train: &PointCloud,
    reference: &ReferenceEmbedding,
    mut params: AutoencoderParams,
    mut adam: AdamState,
    mut rng: Rng,
    mut history: Vec<EpochRecord>,
    start_epoch: usize,
    mut callback: impl FnMut(&EpochRecord),
) -> Result<FitResult> {
    let n = train.n();
    let min_points = config.min_batch_points();

    for epoch in start_epoch..config.epochs {
        let lambda_e = config.lambda_at(epoch);
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);

        let (mut recon_sum, mut reg_sum, mut total_sum) = (0.0, 0.0, 0.0);
        let mut steps = 0usize;
        for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
            if chunk.len() < min_points {
                // A short final batch cannot support the pairwise terms.
                continue;
            }
            let x = train.points.select_rows(chunk)?;
            let e_batch = reference.rows(chunk)?;

            let mut tape = Tape::new();
            let graph = build_total_loss(&mut tape, config, &params, &x, &e_batch, epoch)?;
            let total = tape.scalar(graph.loss);
            let recon = tape.scalar(graph.recon);
            let reg = graph.reg.map(|id| tape.scalar(id)).unwrap_or(0.0);
            if !total.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite loss at epoch {epoch}, batch {batch_idx}: \
                     total={total}, recon={recon}, reg={reg}"
                )));
            }
            let grads = tape.backward(graph.loss)?;

            // Fold this batch's normalization statistics into the running
            // estimates (0.9 old, 0.1 new) that eval-mode passes use.
            let stats: Vec<(Vec<f64>, Vec<f64>)> = graph
                .bn_ids
                .iter()
                .map(|&id| {
                    let (mean, var) = tape
                        .batchnorm_batch_stats(id)
                        .expect("recorded batchnorm node");
                    (mean.to_vec(), var.to_vec())
                })
                .collect();
            let bn_layers = params
                .encoder
                .iter_mut()
                .chain(params.decoder.iter_mut())
                .filter_map(|l| l.batchnorm.as_mut());
            for (bn, (mean, var)) in bn_layers.zip(&stats) {
                for (r, b) in bn.running_mean.iter_mut().zip(mean) {
                    *r = 0.9 * *r + 0.1 * b;
                }
                for (r, b) in bn.running_var.iter_mut().zip(var) {
                    *r = 0.9 * *r + 0.1 * b;
                }
            }

            let grad_refs: Vec<&Matrix> =
                graph.param_ids.iter().map(|&id| grads.wrt(id)).collect();
            adam_step(
                &mut params.flatten_mut(),
                &grad_refs,
                &mut adam,
                config.lr,
                config.weight_decay,
            )?;
            // A finite loss does not guarantee finite updates (overflowing
            // moments can poison parameters with NaN that relu then hides),
            // so the updated parameters are checked too.
            let poisoned = params
                .flatten()
                .iter()
                .any(|m| m.data().iter().any(|v| !v.is_finite()));
            if poisoned {
                return Err(Error::numerical(format!(
                    "non-finite parameter after the update at epoch {epoch}, batch {batch_idx}"
                )));
            }

            recon_sum += recon;
            reg_sum += reg;
            total_sum += total;
            steps += 1;
        }

        // check_shapes guarantees at least the first batch is usable.
        debug_assert!(steps > 0);
        let record = EpochRecord {
            epoch,
            recon: recon_sum / steps as f64,
            reg: reg_sum / steps as f64,
            total: total_sum / steps as f64,
            lambda: lambda_e,
            steps,
        };
        callback(&record);
        history.push(record);
    }

    Ok(FitResult {
        params,
        adam,
        rng_state: rng.state(),
        epochs_done: config.epochs,
        history,
    })
}

/// Renders a loss history as CSV with full-precision floats.
pub fn history_to_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,recon,reg,total,lambda\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch,
            g17(r.recon),
            g17(r.reg),
            g17(r.total),
            g17(r.lambda)
        ));
    }
    out
}
