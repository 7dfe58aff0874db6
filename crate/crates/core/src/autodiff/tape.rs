//! The tape itself: node storage, forward ops, and the backward sweep.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Handle to a node on a [`Tape`]. Only meaningful for the tape that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Floor applied to `sqrt` inputs when computing the derivative, so the
/// slope at zero stays finite. The forward value is exact.
const SQRT_DERIVATIVE_FLOOR: f64 = 1e-12;

/// Floor applied to `log` inputs in both the value and the derivative;
/// keeps collapsed distances from producing infinities.
/// Inputs to the log node are clamped at this floor (value and
/// derivative); scalar mirrors of tape losses must clamp the same way to
/// agree with the recorded graph.
pub const LOG_INPUT_FLOOR: f64 = 1e-12;

/// Variance stabilizer inside batch normalization; shared with eval-mode
/// forward passes so train and eval normalize identically.
pub const BATCHNORM_EPS: f64 = 1e-5;

struct Node {
    value: Matrix,
    op: Op,
}

enum Op {
    Leaf,
    MatMul { a: usize, b: usize },
    Add { a: usize, b: usize },
    AddRowBroadcast { a: usize, bias: usize },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Relu { a: usize },
    Square { a: usize },
    Sqrt { a: usize },
    Log { a: usize },
    Sum { a: usize },
    Mean { a: usize },
    Scale { a: usize, factor: f64 },
    PairwiseSqDist { a: usize },
    BatchNorm {
        a: usize,
        scale: usize,
        shift: usize,
        normalized: Matrix,
        inv_std: Vec<f64>,
        batch_mean: Vec<f64>,
        batch_var: Vec<f64>,
    },
}

/// Define-by-run tape of matrix operations.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints for every node of one backward sweep, addressed by [`NodeId`].
pub struct Gradients {
    grads: Vec<Matrix>,
}

impl Gradients {
    /// Gradient of the swept loss with respect to the given node.
    pub fn wrt(&self, id: NodeId) -> &Matrix {
        &self.grads[id.0]
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Registers a leaf holding the given value. Parameters and constants
    /// are both leaves; the caller simply never reads the adjoints of its
    /// constants.
    pub fn var(&mut self, value: Matrix) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, id: NodeId) -> &Matrix {
        &self.nodes[id.0].value
    }

    /// Value of a 1x1 node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = self.value(id);
        assert_eq!(v.shape(), (1, 1), "node is not a scalar");
        v.get(0, 0)
    }

    fn push(&mut self, value: Matrix, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).matmul(self.value(b)).expect("matmul shapes");
        self.push(value, Op::MatMul { a: a.0, b: b.0 })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "add shapes");
        let data: Vec<f64> =
            va.data().iter().zip(vb.data()).map(|(x, y)| x + y).collect();
        let value = Matrix::from_raw(va.rows(), va.cols(), data);
        self.push(value, Op::Add { a: a.0, b: b.0 })
    }

    /// `a + bias` where `bias` is `1 x n` and broadcast over the rows of
    /// the `m x n` input; the shape used for layer biases.
    pub fn add_row_broadcast(&mut self, a: NodeId, bias: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(bias));
        assert_eq!(vb.rows(), 1, "bias must be a single row");
        assert_eq!(va.cols(), vb.cols(), "bias width");
        let mut value = va.clone();
        for i in 0..value.rows() {
            for (x, b) in value.row_mut(i).iter_mut().zip(vb.row(0)) {
                *x += b;
            }
        }
        self.push(value, Op::AddRowBroadcast { a: a.0, bias: bias.0 })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "sub shapes");
        let data: Vec<f64> =
            va.data().iter().zip(vb.data()).map(|(x, y)| x - y).collect();
        let value = Matrix::from_raw(va.rows(), va.cols(), data);
        self.push(value, Op::Sub { a: a.0, b: b.0 })
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "mul shapes");
        let data: Vec<f64> =
            va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let value = Matrix::from_raw(va.rows(), va.cols(), data);
        self.push(value, Op::Mul { a: a.0, b: b.0 })
    }

    /// Rectifier. The subgradient at exactly zero is taken to be zero.
    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push(value, Op::Relu { a: a.0 })
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(|x| x * x);
        self.push(value, Op::Square { a: a.0 })
    }

    /// Elementwise square root. The forward value is exact; the derivative
    /// clamps its input at 1e-12 so the slope at zero is finite.
    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(f64::sqrt);
        self.push(value, Op::Sqrt { a: a.0 })
    }

    /// Elementwise natural log of `max(x, 1e-12)`, in both value and
    /// derivative.
    pub fn log(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(|x| x.max(LOG_INPUT_FLOOR).ln());
        self.push(value, Op::Log { a: a.0 })
    }

    /// Sum of all entries, as a 1x1 node.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).data().iter().sum();
        self.push(Matrix::from_raw(1, 1, vec![s]), Op::Sum { a: a.0 })
    }

    /// Mean of all entries, as a 1x1 node.
    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a);
        let s: f64 = v.data().iter().sum();
        let m = s / v.data().len() as f64;
        self.push(Matrix::from_raw(1, 1, vec![m]), Op::Mean { a: a.0 })
    }

    /// Multiplication by a compile-time constant.
    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        let value = self.value(a).map(|x| x * factor);
        self.push(value, Op::Scale { a: a.0, factor })
    }

    /// Squared Euclidean distances between rows: `n x d` in, `n x n` out,
    /// diagonal exactly zero.
    pub fn pairwise_sq_dist(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        let n = x.rows();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            let xi = x.row(i);
            for j in (i + 1)..n {
                let mut acc = 0.0;
                for (p, q) in xi.iter().zip(x.row(j)) {
                    let d = p - q;
                    acc += d * d;
                }
                out.set(i, j, acc);
                out.set(j, i, acc);
            }
        }
        self.push(out, Op::PairwiseSqDist { a: a.0 })
    }

    /// Train-mode batch normalization over rows, with learned per-column
    /// `scale` and `shift` (both `1 x d`). Batch statistics are part of the
    /// recorded computation; running statistics live outside the tape and
    /// can be read from [`Tape::batchnorm_batch_stats`] after the forward
    /// pass.
    pub fn batchnorm(&mut self, a: NodeId, scale: NodeId, shift: NodeId) -> NodeId {
        let x = self.value(a);
        let (m, d) = x.shape();
        assert!(m >= 1, "batchnorm needs at least one row");
        let gamma = self.value(scale);
        let beta = self.value(shift);
        assert_eq!(gamma.shape(), (1, d), "batchnorm scale shape");
        assert_eq!(beta.shape(), (1, d), "batchnorm shift shape");

        let mean = x.column_means();
        let mut var = vec![0.0; d];
        for i in 0..m {
            for (j, &xv) in x.row(i).iter().enumerate() {
                let c = xv - mean[j];
                var[j] += c * c;
            }
        }
        for v in &mut var {
            *v /= m as f64; // biased batch variance, the normalizing one
        }
        let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + BATCHNORM_EPS).sqrt()).collect();

        let mut normalized = Matrix::zeros(m, d);
        let mut out = Matrix::zeros(m, d);
        for i in 0..m {
            for j in 0..d {
                let xhat = (x.get(i, j) - mean[j]) * inv_std[j];
                normalized.set(i, j, xhat);
                out.set(i, j, gamma.get(0, j) * xhat + beta.get(0, j));
            }
        }
        self.push(
            out,
            Op::BatchNorm {
                a: a.0,
                scale: scale.0,
                shift: shift.0,
                normalized,
                inv_std,
                batch_mean: mean,
                batch_var: var,
            },
        )
    }

    /// Batch mean and (biased) variance recorded by a batchnorm node, for
    /// updating running statistics outside the tape.
    pub fn batchnorm_batch_stats(&self, id: NodeId) -> Option<(&[f64], &[f64])> {
        match &self.nodes[id.0].op {
            Op::BatchNorm { batch_mean, batch_var, .. } => Some((batch_mean, batch_var)),
            _ => None,
        }
    }

    /// Reverse sweep from a scalar loss node. Adjoints start from zero on
    /// every call, so a tape can be swept more than once.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let loss_value = self.value(loss);
        if loss_value.shape() != (1, 1) {
            return Err(Error::input(format!(
                "backward needs a scalar loss, got {}x{}",
                loss_value.rows(),
                loss_value.cols()
            )));
        }
        let mut grads: Vec<Matrix> = self
            .nodes
            .iter()
            .map(|n| Matrix::zeros(n.value.rows(), n.value.cols()))
            .collect();
        grads[loss.0].set(0, 0, 1.0);

        for idx in (0..=loss.0).rev() {
            let g = grads[idx].clone();
            match &self.nodes[idx].op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    // dA = G B^T, dB = A^T G
                    let da = g.matmul(&self.nodes[*b].value.transpose()).unwrap();
                    let db = self.nodes[*a].value.transpose().matmul(&g).unwrap();
                    accumulate(&mut grads[*a], &da);
                    accumulate(&mut grads[*b], &db);
                }
                Op::Add { a, b } => {
                    accumulate(&mut grads[*a], &g);
                    accumulate(&mut grads[*b], &g);
                }
                Op::AddRowBroadcast { a, bias } => {
                    accumulate(&mut grads[*a], &g);
                    // Bias gradient sums over the broadcast rows.
                    let cols = g.cols();
                    let mut db = Matrix::zeros(1, cols);
                    for i in 0..g.rows() {
                        for (acc, &x) in db.row_mut(0).iter_mut().zip(g.row(i)) {
                            *acc += x;
                        }
                    }
                    accumulate(&mut grads[*bias], &db);
                }
                Op::Sub { a, b } => {
                    accumulate(&mut grads[*a], &g);
                    let neg = g.map(|x| -x);
                    accumulate(&mut grads[*b], &neg);
                }
                Op::Mul { a, b } => {
                    let da = elementwise(&g, &self.nodes[*b].value, |x, y| x * y);
                    let db = elementwise(&g, &self.nodes[*a].value, |x, y| x * y);
                    accumulate(&mut grads[*a], &da);
                    accumulate(&mut grads[*b], &db);
                }
                Op::Relu { a } => {
                    let da = elementwise(&g, &self.nodes[*a].value, |x, input| {
                        if input > 0.0 {
                            x
                        } else {
                            0.0
                        }
                    });
                    accumulate(&mut grads[*a], &da);
                }
                Op::Square { a } => {
                    let da = elementwise(&g, &self.nodes[*a].value, |x, input| 2.0 * input * x);
                    accumulate(&mut grads[*a], &da);
                }
                Op::Sqrt { a } => {
                    let da = elementwise(&g, &self.nodes[*a].value, |x, input| {
                        0.5 / input.max(SQRT_DERIVATIVE_FLOOR).sqrt() * x
                    });
                    accumulate(&mut grads[*a], &da);
                }
                Op::Log { a } => {
                    let da = elementwise(&g, &self.nodes[*a].value, |x, input| {
                        x / input.max(LOG_INPUT_FLOOR)
                    });
                    accumulate(&mut grads[*a], &da);
                }
                Op::Sum { a } => {
                    let seed = g.get(0, 0);
                    let da = self.nodes[*a].value.map(|_| seed);
                    accumulate(&mut grads[*a], &da);
                }
                Op::Mean { a } => {
                    let len = self.nodes[*a].value.data().len() as f64;
                    let seed = g.get(0, 0) / len;
                    let da = self.nodes[*a].value.map(|_| seed);
                    accumulate(&mut grads[*a], &da);
                }
                Op::Scale { a, factor } => {
                    let da = g.map(|x| x * factor);
                    accumulate(&mut grads[*a], &da);
                }
                Op::PairwiseSqDist { a } => {
                    let da = pairwise_sq_dist_backward(&g, &self.nodes[*a].value);
                    accumulate(&mut grads[*a], &da);
                }
                Op::BatchNorm { a, scale, shift, normalized, inv_std, .. } => {
                    let gamma = &self.nodes[*scale].value;
                    let (m, d) = g.shape();

                    // d_beta_j = sum_i G_ij ; d_gamma_j = sum_i G_ij xhat_ij
                    let mut dbeta = Matrix::zeros(1, d);
                    let mut dgamma = Matrix::zeros(1, d);
                    for i in 0..m {
                        for j in 0..d {
                            dbeta.set(0, j, dbeta.get(0, j) + g.get(i, j));
                            dgamma.set(
                                0,
                                j,
                                dgamma.get(0, j) + g.get(i, j) * normalized.get(i, j),
                            );
                        }
                    }

                    // Through the normalization, with batch mean and
                    // variance as functions of x:
                    // dx = inv_std/m * (m*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
                    let mut dxhat_sum = vec![0.0; d];
                    let mut dxhat_dot = vec![0.0; d];
                    for i in 0..m {
                        for j in 0..d {
                            let dxhat = g.get(i, j) * gamma.get(0, j);
                            dxhat_sum[j] += dxhat;
                            dxhat_dot[j] += dxhat * normalized.get(i, j);
                        }
                    }
                    let mut da = Matrix::zeros(m, d);
                    let mf = m as f64;
                    for i in 0..m {
                        for j in 0..d {
                            let dxhat = g.get(i, j) * gamma.get(0, j);
                            let v = inv_std[j] / mf
                                * (mf * dxhat
                                    - dxhat_sum[j]
                                    - normalized.get(i, j) * dxhat_dot[j]);
                            da.set(i, j, v);
                        }
                    }
                    accumulate(&mut grads[*a], &da);
                    accumulate(&mut grads[*scale], &dgamma);
                    accumulate(&mut grads[*shift], &dbeta);
                }
            }
        }
        Ok(Gradients { grads })
    }
}

fn accumulate(into: &mut Matrix, delta: &Matrix) {
    debug_assert_eq!(into.shape(), delta.shape());
    for (a, b) in into.data_mut().iter_mut().zip(delta.data()) {
        *a += b;
    }
}

fn elementwise(g: &Matrix, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
    debug_assert_eq!(g.shape(), other.shape());
    let data: Vec<f64> =
        g.data().iter().zip(other.data()).map(|(&x, &y)| f(x, y)).collect();
    Matrix::from_raw(g.rows(), g.cols(), data)
}

/// Adjoint of the squared-distance matrix: with W = G + G^T,
/// dX_i = 2 * (rowsum(W)_i * x_i - (W X)_i).
fn pairwise_sq_dist_backward(g: &Matrix, x: &Matrix) -> Matrix {
    let n = x.rows();
    let d = x.cols();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w.set(i, j, g.get(i, j) + g.get(j, i));
        }
    }
    let row_sums: Vec<f64> = (0..n).map(|i| w.row(i).iter().sum()).collect();
    let wx = w.matmul(x).unwrap();
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            out.set(i, k, 2.0 * (row_sums[i] * x.get(i, k) - wx.get(i, k)));
        }
    }
    out
}
