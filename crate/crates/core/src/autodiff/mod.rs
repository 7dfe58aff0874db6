//! Reverse-mode automatic differentiation on a define-by-run tape.
//!
//! A [`Tape`] records matrix-valued operations as they execute; values are
//! computed eagerly, and [`Tape::backward`] replays the record in reverse
//! to accumulate adjoints. Tapes are cheap, single-threaded, and rebuilt
//! from scratch for every minibatch rather than reused.

mod check;
mod tape;

pub use check::{grad_check, GradCheckReport};
pub use tape::{Gradients, NodeId, Tape, BATCHNORM_EPS, LOG_INPUT_FLOOR};
