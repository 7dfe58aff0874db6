//! Central finite-difference verification of tape gradients.

use crate::autodiff::{NodeId, Tape};
use crate::error::Result;
use crate::linalg::Matrix;

/// Outcome of [`grad_check`]: worst relative error per parameter and
/// overall, plus whether any probe produced a non-finite loss.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Worst relative error per parameter matrix, aligned with the input.
    pub per_param_max: Vec<f64>,
    pub max_rel_error: f64,
    /// Coordinates whose relative error exceeded the tolerance.
    pub failures: usize,
    /// Set when a perturbed forward pass returned a non-finite loss; the
    /// check fails but still reports what it saw.
    pub non_finite: bool,
    pub passed: bool,
}

/// Compares tape gradients against central finite differences,
/// coordinate by coordinate.
///
/// `build` receives a fresh tape plus one registered variable per entry of
/// `params`, and returns the scalar loss node. Every parameter coordinate
/// is probed at `theta +- step`; the relative error uses a denominator of
/// `max(|analytic|, |fd|, 1e-6 * max(1, |loss|))` so coordinates whose
/// true gradient sits at the finite-difference noise floor are judged on
/// an absolute scale instead of drowning the report in false alarms.
pub fn grad_check<F>(params: &[Matrix], build: F, step: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[NodeId]) -> NodeId,
{
    let forward = |values: &[Matrix]| -> (f64, Option<(Tape, Vec<NodeId>, NodeId)>) {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = values.iter().map(|p| tape.var(p.clone())).collect();
        let loss = build(&mut tape, &ids);
        let value = tape.scalar(loss);
        (value, Some((tape, ids, loss)))
    };

    let (base_loss, recorded) = forward(params);
    let (tape, ids, loss) = recorded.unwrap();
    if !base_loss.is_finite() {
        return Ok(GradCheckReport {
            per_param_max: vec![f64::INFINITY; params.len()],
            max_rel_error: f64::INFINITY,
            failures: 0,
            non_finite: true,
            passed: false,
        });
    }
    let grads = tape.backward(loss)?;
    let analytic: Vec<Matrix> = ids.iter().map(|&id| grads.wrt(id).clone()).collect();

    let denom_floor = 1e-6 * base_loss.abs().max(1.0);
    let mut work: Vec<Matrix> = params.to_vec();
    let mut per_param_max = vec![0.0_f64; params.len()];
    let mut failures = 0usize;
    let mut non_finite = false;

    for p in 0..params.len() {
        for c in 0..params[p].data().len() {
            let original = params[p].data()[c];
            work[p].data_mut()[c] = original + step;
            let (loss_plus, _) = forward(&work);
            work[p].data_mut()[c] = original - step;
            let (loss_minus, _) = forward(&work);
            work[p].data_mut()[c] = original;

            if !loss_plus.is_finite() || !loss_minus.is_finite() {
                non_finite = true;
                continue;
            }
            let fd = (loss_plus - loss_minus) / (2.0 * step);
            let g = analytic[p].data()[c];
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(denom_floor);
            if rel > per_param_max[p] {
                per_param_max[p] = rel;
            }
            if rel > tol {
                failures += 1;
            }
        }
    }

    let max_rel_error = per_param_max.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(GradCheckReport {
        per_param_max,
        max_rel_error,
        failures,
        non_finite,
        passed: failures == 0 && !non_finite,
    })
}
