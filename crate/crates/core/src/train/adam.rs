//! Adam optimizer with bias correction and L2 weight decay folded into
//! the gradient.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First/second moment estimates, one matrix per trainable tensor, plus
/// the step counter driving bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<Matrix>,
    pub v: Vec<Matrix>,
    pub step: u64,
}

impl AdamState {
    /// Fresh zeroed moments shaped like `tensors`.
    pub fn matching(tensors: &[&Matrix]) -> AdamState {
        let zeros = |t: &&Matrix| Matrix::zeros(t.rows(), t.cols());
        AdamState {
            m: tensors.iter().map(zeros).collect(),
            v: tensors.iter().map(zeros).collect(),
            step: 0,
        }
    }
}

/// One Adam update over a flat list of tensors.
///
/// Weight decay enters as `g ← g + wd·θ` before the moment updates, so it
/// shares the adaptive step scaling. Every tensor in the list is decayed;
/// callers decide what is trainable by what they pass in.
pub fn adam_step(
    tensors: &mut [&mut Matrix],
    grads: &[&Matrix],
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if tensors.len() != grads.len() || tensors.len() != state.m.len() {
        return Err(Error::input(format!(
            "optimizer saw {} tensors, {} gradients, {} moment slots",
            tensors.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let bias1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let bias2 = 1.0 - ADAM_BETA2.powi(state.step as i32);

    for k in 0..tensors.len() {
        let theta = &mut *tensors[k];
        if grads[k].shape() != theta.shape() || state.m[k].shape() != theta.shape() {
            return Err(Error::input(format!(
                "optimizer shape mismatch on tensor {k}: param {:?}, grad {:?}, moments {:?}",
                theta.shape(),
                grads[k].shape(),
                state.m[k].shape()
            )));
        }
        let g_raw = grads[k].data();
        let m = state.m[k].data_mut();
        let v = state.v[k].data_mut();
        for (c, t) in theta.data_mut().iter_mut().enumerate() {
            let g = g_raw[c] + weight_decay * *t;
            m[c] = ADAM_BETA1 * m[c] + (1.0 - ADAM_BETA1) * g;
            v[c] = ADAM_BETA2 * v[c] + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = m[c] / bias1;
            let v_hat = v[c] / bias2;
            *t -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
    Ok(())
}
