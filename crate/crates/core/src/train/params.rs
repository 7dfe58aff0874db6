//! Autoencoder parameters and forward passes.
//!
//! The encoder maps `D -> hidden... -> d` and the decoder mirrors it
//! exactly. Hidden layers are linear + optional batch normalization +
//! ReLU; the bottleneck and output layers are purely linear. Two forward
//! passes exist: an eval-mode pass using batchnorm running statistics
//! (plain matrix math, no gradients) and a train-mode pass recorded on an
//! autodiff tape using batch statistics.

use crate::autodiff::{NodeId, Tape, BATCHNORM_EPS};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng};
use crate::train::config::TrainConfig;
use serde::{Deserialize, Serialize};

/// Learned affine rescaling plus running statistics for one hidden layer.
/// The running statistics are used only in eval mode and are updated by
/// the training loop outside the tape; they are never weight-decayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormParams {
    /// 1 x width multiplier (gamma).
    pub scale: Matrix,
    /// 1 x width offset (beta).
    pub shift: Matrix,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

/// One linear layer with optional batch normalization after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// `d_in x d_out`.
    pub weight: Matrix,
    /// `1 x d_out`, broadcast over the batch.
    pub bias: Matrix,
    pub batchnorm: Option<BatchNormParams>,
}

/// Encoder and symmetric decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderParams {
    pub encoder: Vec<LayerParams>,
    pub decoder: Vec<LayerParams>,
}

fn init_layer(rng: &mut Rng, d_in: usize, d_out: usize, with_bn: bool) -> LayerParams {
    // Uniform in +-sqrt(6/(fan_in+fan_out)); biases start at zero, scale
    // at one, so a freshly initialized network is close to linear.
    let limit = (6.0 / (d_in + d_out) as f64).sqrt();
    let data: Vec<f64> = (0..d_in * d_out)
        .map(|_| rng.uniform_in(-limit, limit))
        .collect();
    LayerParams {
        weight: Matrix::new(d_in, d_out, data).expect("init values are finite"),
        bias: Matrix::zeros(1, d_out),
        batchnorm: with_bn.then(|| BatchNormParams {
            scale: Matrix::new(1, d_out, vec![1.0; d_out]).unwrap(),
            shift: Matrix::zeros(1, d_out),
            running_mean: vec![0.0; d_out],
            running_var: vec![1.0; d_out],
        }),
    }
}

impl AutoencoderParams {
    /// Initializes from the architecture in `config` for `input_dim`-wide
    /// data. Weights are drawn encoder-first, layer by layer, in row-major
    /// entry order, so a given seed always produces the same network.
    pub fn init(config: &TrainConfig, input_dim: usize, rng: &mut Rng) -> Result<AutoencoderParams> {
        if input_dim == 0 {
            return Err(Error::input("input dimension must be at least 1"));
        }
        config.validate()?;
        let mut enc_dims = vec![input_dim];
        enc_dims.extend(&config.hidden_dims);
        enc_dims.push(config.latent_dim);
        let mut dec_dims: Vec<usize> = enc_dims.clone();
        dec_dims.reverse();

        let build = |dims: &[usize], rng: &mut Rng| -> Vec<LayerParams> {
            (0..dims.len() - 1)
                .map(|i| {
                    let hidden = i + 1 < dims.len() - 1;
                    init_layer(rng, dims[i], dims[i + 1], hidden && config.batchnorm)
                })
                .collect()
        };
        let encoder = build(&enc_dims, rng);
        let decoder = build(&dec_dims, rng);
        Ok(AutoencoderParams { encoder, decoder })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].weight.rows()
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.last().unwrap().weight.cols()
    }

    /// All trainable matrices in canonical order: for each layer (encoder
    /// first, then decoder) its weight, bias, and — when batchnorm is
    /// present — scale and shift. Running statistics are not trainable and
    /// are not included.
    pub fn flatten(&self) -> Vec<&Matrix> {
        let mut out = Vec::new();
        for layer in self.encoder.iter().chain(&self.decoder) {
            out.push(&layer.weight);
            out.push(&layer.bias);
            if let Some(bn) = &layer.batchnorm {
                out.push(&bn.scale);
                out.push(&bn.shift);
            }
        }
        out
    }

    /// Mutable view in the same canonical order as [`Self::flatten`].
    pub fn flatten_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            out.push(&mut layer.weight);
            out.push(&mut layer.bias);
            if let Some(bn) = &mut layer.batchnorm {
                out.push(&mut bn.scale);
                out.push(&mut bn.shift);
            }
        }
        out
    }
}

/// Eval-mode pass through one stack of layers.
fn forward_eval(layers: &[LayerParams], x: &Matrix, what: &str) -> Result<Matrix> {
    if x.cols() != layers[0].weight.rows() {
        return Err(Error::input(format!(
            "{what} expects {} features, batch has {}",
            layers[0].weight.rows(),
            x.cols()
        )));
    }
    let mut cur = x.clone();
    for (i, layer) in layers.iter().enumerate() {
        let hidden = i + 1 < layers.len();
        let mut y = cur.matmul(&layer.weight)?;
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(layer.bias.row(0)) {
                *v += b;
            }
        }
        if let Some(bn) = &layer.batchnorm {
            for r in 0..y.rows() {
                let row = y.row_mut(r);
                for c in 0..row.len() {
                    let normalized = (row[c] - bn.running_mean[c])
                        / (bn.running_var[c] + BATCHNORM_EPS).sqrt();
                    row[c] = normalized * bn.scale.get(0, c) + bn.shift.get(0, c);
                }
            }
        }
        if hidden {
            y = y.map(|v| v.max(0.0));
        }
        cur = y;
    }
    Ok(cur)
}

/// Encodes a batch to latent coordinates (eval mode: batchnorm uses
/// running statistics; fully deterministic).
pub fn encode(params: &AutoencoderParams, x: &Matrix) -> Result<Matrix> {
    forward_eval(&params.encoder, x, "encoder")
}

/// Decodes latent coordinates back to input space (eval mode).
pub fn decode(params: &AutoencoderParams, z: &Matrix) -> Result<Matrix> {
    forward_eval(&params.decoder, z, "decoder")
}

/// Full eval-mode round trip.
pub fn reconstruct(params: &AutoencoderParams, x: &Matrix) -> Result<Matrix> {
    decode(params, &encode(params, x)?)
}

/// Handles produced by [`forward_on_tape`]: the input leaf, parameter
/// leaves in canonical flatten order, batchnorm nodes in encounter order
/// (for running-stat updates), and the latent/output activations.
pub(crate) struct TapeForward {
    pub param_ids: Vec<NodeId>,
    pub bn_ids: Vec<NodeId>,
    pub input: NodeId,
    pub latent: NodeId,
    pub output: NodeId,
}

/// Wires the encoder/decoder graph using parameter leaves that are already
/// registered on the tape, in canonical flatten order. `template` supplies
/// only the layer structure (counts and batchnorm placement); values come
/// from the tape. Returns (latent, output, batchnorm node ids).
pub(crate) fn forward_from_ids(
    tape: &mut Tape,
    template: &AutoencoderParams,
    ids: &[NodeId],
    input: NodeId,
) -> (NodeId, NodeId, Vec<NodeId>) {
    let mut cursor = 0usize;
    let mut bn_ids = Vec::new();
    let mut cur = input;
    let mut latent = None;

    for (half, layers) in [&template.encoder, &template.decoder].into_iter().enumerate() {
        for (i, layer) in layers.iter().enumerate() {
            let hidden = i + 1 < layers.len();
            let (w, b) = (ids[cursor], ids[cursor + 1]);
            cursor += 2;
            cur = tape.matmul(cur, w);
            cur = tape.add_row_broadcast(cur, b);
            if layer.batchnorm.is_some() {
                let (scale, shift) = (ids[cursor], ids[cursor + 1]);
                cursor += 2;
                cur = tape.batchnorm(cur, scale, shift);
                bn_ids.push(cur);
            }
            if hidden {
                cur = tape.relu(cur);
            }
        }
        if half == 0 {
            latent = Some(cur);
        }
    }
    assert_eq!(cursor, ids.len(), "parameter leaf count mismatch");
    (latent.unwrap(), cur, bn_ids)
}

/// Train-mode forward pass recorded on a tape. Batchnorm layers normalize
/// by batch statistics; the layer structure otherwise matches
/// [`encode`]/[`decode`].
pub(crate) fn forward_on_tape(
    tape: &mut Tape,
    params: &AutoencoderParams,
    x: &Matrix,
) -> Result<TapeForward> {
    if x.cols() != params.input_dim() {
        return Err(Error::input(format!(
            "encoder expects {} features, batch has {}",
            params.input_dim(),
            x.cols()
        )));
    }
    let param_ids: Vec<NodeId> = params
        .flatten()
        .into_iter()
        .map(|m| tape.var(m.clone()))
        .collect();
    let input = tape.var(x.clone());
    let (latent, output, bn_ids) = forward_from_ids(tape, params, &param_ids, input);
    Ok(TapeForward {
        param_ids,
        bn_ids,
        input,
        latent,
        output,
    })
}
