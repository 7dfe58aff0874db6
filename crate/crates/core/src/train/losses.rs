//! Training losses: reconstruction plus three pairwise-distance
//! regularizers, each available as a plain scalar function and as a node
//! on the autodiff tape.
//!
//! The tape builders and the scalar functions share conventions exactly
//! (log clamping, normalization, pair selection) so that
//! `tape value == scalar value` holds to rounding error; tests pin that.

use crate::autodiff::{grad_check, GradCheckReport, NodeId, Tape, LOG_INPUT_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{pairwise_distances, DistanceMatrix, Matrix};
use crate::tda::minimum_spanning_tree;
use crate::train::config::{Regularizer, TrainConfig};
use crate::train::params::{forward_from_ids, forward_on_tape, AutoencoderParams};

/// Mean over the batch of squared Euclidean reconstruction error.
pub fn loss_recon(x: &Matrix, x_hat: &Matrix) -> Result<f64> {
    if x.shape() != x_hat.shape() {
        return Err(Error::input(format!(
            "reconstruction loss needs matching shapes, got {:?} vs {:?}",
            x.shape(),
            x_hat.shape()
        )));
    }
    let acc: f64 = x
        .data()
        .iter()
        .zip(x_hat.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(acc / x.rows() as f64)
}

/// Mean squared difference between the latent and reference distance
/// matrices, normalized by b² over all ordered pairs including the zero
/// diagonal. Column counts of `z` and `e_batch` are free to differ.
pub fn loss_mm(z: &Matrix, e_batch: &Matrix) -> Result<f64> {
    if z.rows() != e_batch.rows() {
        return Err(Error::input(format!(
            "distance-matching loss needs equal row counts, got {} vs {}",
            z.rows(),
            e_batch.rows()
        )));
    }
    if z.rows() < 2 {
        return Err(Error::input("distance-matching loss needs at least 2 points"));
    }
    let d_z = pairwise_distances(z)?;
    let d_e = pairwise_distances(e_batch)?;
    let b = z.rows();
    let mut acc = 0.0;
    for i in 0..b {
        for j in 0..b {
            let d = d_z.get(i, j) - d_e.get(i, j);
            acc += d * d;
        }
    }
    Ok(acc / (b * b) as f64)
}

/// Population variance of `log(d_Z / d_E)` over unordered pairs whose
/// reference distance clears `eps_floor`; pairs below the floor are
/// skipped because the ratio degenerates there. Distances inside the
/// logarithms are clamped at [`LOG_INPUT_FLOOR`], matching the tape's log
/// node bit for bit.
pub fn loss_spae(z: &Matrix, e_batch: &Matrix, eps_floor: f64) -> Result<f64> {
    if z.rows() != e_batch.rows() {
        return Err(Error::input(format!(
            "log-ratio loss needs equal row counts, got {} vs {}",
            z.rows(),
            e_batch.rows()
        )));
    }
    if z.rows() < 3 {
        return Err(Error::input(
            "log-ratio loss needs at least 3 points to form 2 pair ratios",
        ));
    }
    if !(eps_floor.is_finite() && eps_floor > 0.0) {
        return Err(Error::input("distance floor must be finite and positive"));
    }
    let d_z = pairwise_distances(z)?;
    let d_e = pairwise_distances(e_batch)?;
    let b = z.rows();
    let mut included = 0usize;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for i in 0..b {
        for j in (i + 1)..b {
            let e = d_e.get(i, j);
            if e < eps_floor {
                continue;
            }
            let t = d_z.get(i, j).max(LOG_INPUT_FLOOR).ln() - e.max(LOG_INPUT_FLOOR).ln();
            included += 1;
            sum += t;
            sum_sq += t * t;
        }
    }
    if included < 2 {
        return Err(Error::input(format!(
            "log-ratio loss needs at least 2 pairs above the distance floor, found {included}"
        )));
    }
    // Raw-moment form E[t²] − E[t]², the same arithmetic the tape builder
    // records, so the two stay in lockstep.
    let mean = sum / included as f64;
    Ok(sum_sq / included as f64 - mean * mean)
}

/// Squared discrepancies between two distance matrices over the union of
/// their minimum-spanning-tree edge sets, half-weighted per direction.
pub fn loss_topoae(d_x: &DistanceMatrix, d_z: &DistanceMatrix) -> Result<f64> {
    if d_x.n() != d_z.n() {
        return Err(Error::input(format!(
            "tree-matching loss needs equal sizes, got {} vs {}",
            d_x.n(),
            d_z.n()
        )));
    }
    if d_x.n() < 2 {
        return Err(Error::input("tree-matching loss needs at least 2 points"));
    }
    let mut acc = 0.0;
    for e in minimum_spanning_tree(d_x).edges() {
        let d = d_x.get(e.i, e.j) - d_z.get(e.i, e.j);
        acc += 0.5 * d * d;
    }
    for e in minimum_spanning_tree(d_z).edges() {
        let d = d_z.get(e.i, e.j) - d_x.get(e.i, e.j);
        acc += 0.5 * d * d;
    }
    Ok(acc)
}

/// Handles into a recorded total-loss graph.
pub struct LossGraph {
    /// The scalar objective: recon + λ·reg, or recon alone when the
    /// regularizer is off or its coefficient is zero.
    pub loss: NodeId,
    pub recon: NodeId,
    /// The unscaled regularizer node, absent when none was built.
    pub reg: Option<NodeId>,
    pub latent: NodeId,
    pub output: NodeId,
    /// Parameter leaves in canonical flatten order.
    pub param_ids: Vec<NodeId>,
    /// Batchnorm nodes in encounter order, for running-stat updates.
    pub bn_ids: Vec<NodeId>,
    /// For the log-ratio regularizer: how many pairs fell below the
    /// distance floor and were excluded this batch.
    pub excluded_pairs: Option<usize>,
}

/// Builds the regularizer-specific part of the graph on top of an
/// existing forward pass. Returns (loss, recon, reg, excluded pairs).
fn graph_from_forward(
    tape: &mut Tape,
    config: &TrainConfig,
    lambda_e: f64,
    input: NodeId,
    latent: NodeId,
    output: NodeId,
    e_batch: &Matrix,
) -> Result<(NodeId, NodeId, Option<NodeId>, Option<usize>)> {
    let b = tape.value(input).rows();
    if e_batch.rows() != b {
        return Err(Error::input(format!(
            "batch has {} rows but the reference slice has {}",
            b,
            e_batch.rows()
        )));
    }

    let diff = tape.sub(output, input);
    let sq = tape.square(diff);
    let total_sq = tape.sum(sq);
    let recon = tape.scale(total_sq, 1.0 / b as f64);

    let active = config.regularizer != Regularizer::None && lambda_e != 0.0;
    if !active {
        return Ok((recon, recon, None, None));
    }
    if b < config.min_batch_points() {
        return Err(Error::input(format!(
            "batch of {} rows is too small for the selected regularizer (needs {})",
            b,
            config.min_batch_points()
        )));
    }

    let d_e = pairwise_distances(e_batch)?;
    let z_sq = tape.pairwise_sq_dist(latent);
    let d_z = tape.sqrt(z_sq);
    let mut excluded = None;

    let reg = match config.regularizer {
        Regularizer::None => unreachable!("handled above"),
        Regularizer::Mm => {
            let d_e_node = tape.var(d_e.as_matrix().clone());
            let diff = tape.sub(d_z, d_e_node);
            let sq = tape.square(diff);
            let s = tape.sum(sq);
            tape.scale(s, 1.0 / (b * b) as f64)
        }
        Regularizer::Spae => {
            // Constant mask selecting included upper-triangle pairs and a
            // constant matrix of reference log-distances; the variance is
            // assembled from masked raw moments so only included entries
            // carry gradient.
            let mut mask = Matrix::zeros(b, b);
            let mut log_e = Matrix::zeros(b, b);
            let mut included = 0usize;
            for i in 0..b {
                for j in (i + 1)..b {
                    let e = d_e.get(i, j);
                    if e < config.spae_eps_floor {
                        continue;
                    }
                    mask.set(i, j, 1.0);
                    log_e.set(i, j, e.max(LOG_INPUT_FLOOR).ln());
                    included += 1;
                }
            }
            if included < 2 {
                return Err(Error::input(format!(
                    "log-ratio loss needs at least 2 pairs above the distance floor, found {included}"
                )));
            }
            excluded = Some(b * (b - 1) / 2 - included);
            let log_z = tape.log(d_z);
            let log_e_node = tape.var(log_e);
            let t = tape.sub(log_z, log_e_node);
            let mask_node = tape.var(mask);
            let t_masked = tape.mul(t, mask_node);
            let t_masked_sq = tape.square(t_masked);
            let s1 = tape.sum(t_masked);
            let mean = tape.scale(s1, 1.0 / included as f64);
            let s2 = tape.sum(t_masked_sq);
            let raw_second = tape.scale(s2, 1.0 / included as f64);
            let mean_sq = tape.square(mean);
            tape.sub(raw_second, mean_sq)
        }
        Regularizer::Topoae => {
            // Edge sets are recomputed from the current distances every
            // forward pass and enter the graph as a constant half-weight
            // mask; gradient flows only through the latent distances.
            let x_points = tape.value(input).clone();
            let d_x = pairwise_distances(&x_points)?;
            let d_z_now = DistanceMatrix::new(tape.value(d_z).clone())?;
            let mut mask = Matrix::zeros(b, b);
            for e in minimum_spanning_tree(&d_x).edges() {
                mask.set(e.i, e.j, mask.get(e.i, e.j) + 0.5);
            }
            for e in minimum_spanning_tree(&d_z_now).edges() {
                mask.set(e.i, e.j, mask.get(e.i, e.j) + 0.5);
            }
            let d_x_node = tape.var(d_x.as_matrix().clone());
            let diff = tape.sub(d_z, d_x_node);
            let sq = tape.square(diff);
            let mask_node = tape.var(mask);
            let masked = tape.mul(sq, mask_node);
            tape.sum(masked)
        }
    };

    let scaled = tape.scale(reg, lambda_e);
    let loss = tape.add(recon, scaled);
    Ok((loss, recon, Some(reg), excluded))
}

/// Records the full training objective for one batch on `tape`: forward
/// pass, reconstruction term, and the configured regularizer at the
/// coefficient the λ-schedule assigns to `epoch`. With the regularizer off
/// or its coefficient zero the recorded graph is exactly the
/// reconstruction-only one.
pub fn build_total_loss(
    tape: &mut Tape,
    config: &TrainConfig,
    params: &AutoencoderParams,
    x: &Matrix,
    e_batch: &Matrix,
    epoch: usize,
) -> Result<LossGraph> {
    let lambda_e = config.lambda_at(epoch);
    let fwd = forward_on_tape(tape, params, x)?;
    let (loss, recon, reg, excluded_pairs) = graph_from_forward(
        tape, config, lambda_e, fwd.input, fwd.latent, fwd.output, e_batch,
    )?;
    Ok(LossGraph {
        loss,
        recon,
        reg,
        latent: fwd.latent,
        output: fwd.output,
        param_ids: fwd.param_ids,
        bn_ids: fwd.bn_ids,
        excluded_pairs,
    })
}

/// Central finite-difference check of the full objective's gradient with
/// respect to every trainable parameter.
pub fn check_total_loss_gradient(
    config: &TrainConfig,
    params: &AutoencoderParams,
    x: &Matrix,
    e_batch: &Matrix,
    epoch: usize,
    step: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    // Surface input problems once, before the probe loop starts.
    {
        let mut tape = Tape::new();
        build_total_loss(&mut tape, config, params, x, e_batch, epoch)?;
    }
    let lambda_e = config.lambda_at(epoch);
    let flat: Vec<Matrix> = params.flatten().into_iter().cloned().collect();
    grad_check(
        &flat,
        |tape, ids| {
            let input = tape.var(x.clone());
            let (latent, output, _) = forward_from_ids(tape, params, ids, input);
            let (loss, ..) =
                graph_from_forward(tape, config, lambda_e, input, latent, output, e_batch)
                    .expect("inputs validated before probing");
            loss
        },
        step,
        tol,
    )
}
