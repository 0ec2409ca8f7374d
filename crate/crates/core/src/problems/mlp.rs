//! One-hidden-layer feed-forward network with hand-written backprop.
//!
//! Parameter layout (row-major, weights then bias per layer):
//!
//! ```text
//! [ W1 (hidden x input) | b1 (hidden) | W2 (output x hidden) | b2 (output) ]
//! ```
//!
//! so the parameter count is `hidden*(input+1) + output*(hidden+1)`. The
//! layout is fixed so that sparsity masks over the flat vector are
//! reproducible across runs.

use alloc::vec;
use alloc::vec::Vec;

use super::{Dataset, Problem};
use crate::error::CoreError;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    SoftmaxCrossEntropy,
    /// `0.5 * ||o - onehot(y)||^2`
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
    pub loss: LossKind,
}

impl MlpSpec {
    pub fn param_count(&self) -> usize {
        self.hidden_dim * (self.input_dim + 1) + self.output_dim * (self.hidden_dim + 1)
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let w1 = self.hidden_dim * self.input_dim;
        let b1 = w1 + self.hidden_dim;
        let w2 = b1 + self.output_dim * self.hidden_dim;
        (w1, b1, w2)
    }
}

fn activate(a: f64, kind: Activation) -> f64 {
    match kind {
        Activation::Tanh => math::tanh(a),
        Activation::Relu => a.max(0.0),
    }
}

/// Derivative w.r.t. the pre-activation; relu'(0) is taken as 0.
fn activate_grad(a: f64, h: f64, kind: Activation) -> f64 {
    match kind {
        Activation::Tanh => 1.0 - h * h,
        Activation::Relu => {
            if a > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

struct Forward {
    pre_hidden: Vec<f64>,
    hidden: Vec<f64>,
    output: Vec<f64>,
}

fn forward(spec: &MlpSpec, theta: &[f64], x: &[f64]) -> Forward {
    let (w1_end, b1_end, w2_end) = spec.offsets();
    let (w1, rest) = theta.split_at(w1_end);
    let b1 = &rest[..spec.hidden_dim];
    let w2 = &theta[b1_end..w2_end];
    let b2 = &theta[w2_end..];

    let mut pre_hidden = Vec::with_capacity(spec.hidden_dim);
    let mut hidden = Vec::with_capacity(spec.hidden_dim);
    for j in 0..spec.hidden_dim {
        let row = &w1[j * spec.input_dim..(j + 1) * spec.input_dim];
        let a = math::dot(row, x) + b1[j];
        pre_hidden.push(a);
        hidden.push(activate(a, spec.activation));
    }
    let mut output = Vec::with_capacity(spec.output_dim);
    for k in 0..spec.output_dim {
        let row = &w2[k * spec.hidden_dim..(k + 1) * spec.hidden_dim];
        output.push(math::dot(row, &hidden) + b2[k]);
    }
    Forward {
        pre_hidden,
        hidden,
        output,
    }
}

/// Loss of one sample plus the gradient of the output layer's input
/// (`d loss / d output`), written into `dout`.
fn loss_and_dout(spec: &MlpSpec, output: &[f64], label: usize, dout: &mut [f64]) -> f64 {
    match spec.loss {
        LossKind::SoftmaxCrossEntropy => {
            let max = output.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for &o in output {
                z += math::exp(o - max);
            }
            for (k, d) in dout.iter_mut().enumerate() {
                let p = math::exp(output[k] - max) / z;
                *d = p - if k == label { 1.0 } else { 0.0 };
            }
            max + math::ln(z) - output[label]
        }
        LossKind::Squared => {
            let mut loss = 0.0;
            for (k, d) in dout.iter_mut().enumerate() {
                let t = if k == label { 1.0 } else { 0.0 };
                *d = output[k] - t;
                loss += 0.5 * (output[k] - t) * (output[k] - t);
            }
            loss
        }
    }
}

/// Exact backprop gradient of the mean loss over `batch`.
pub fn mlp_gradient(spec: &MlpSpec, theta: &[f64], data: &Dataset, batch: &[usize]) -> Vec<f64> {
    assert_eq!(theta.len(), spec.param_count(), "theta length mismatch");
    assert_eq!(data.input_dim, spec.input_dim, "dataset dimension mismatch");
    assert!(!batch.is_empty(), "empty minibatch");

    let (w1_end, b1_end, w2_end) = spec.offsets();
    let w2 = &theta[b1_end..w2_end];

    let mut g = vec![0.0; theta.len()];
    let mut dout = vec![0.0; spec.output_dim];
    for &i in batch {
        let (x, label) = data.sample(i);
        let fwd = forward(spec, theta, x);
        loss_and_dout(spec, &fwd.output, label, &mut dout);

        // output layer
        for k in 0..spec.output_dim {
            let gw2 = &mut g[b1_end + k * spec.hidden_dim..b1_end + (k + 1) * spec.hidden_dim];
            for (gj, hj) in gw2.iter_mut().zip(&fwd.hidden) {
                *gj += dout[k] * hj;
            }
            g[w2_end + k] += dout[k];
        }

        // hidden layer
        for j in 0..spec.hidden_dim {
            let mut dh = 0.0;
            for k in 0..spec.output_dim {
                dh += dout[k] * w2[k * spec.hidden_dim + j];
            }
            let da = dh * activate_grad(fwd.pre_hidden[j], fwd.hidden[j], spec.activation);
            let gw1 = &mut g[j * spec.input_dim..(j + 1) * spec.input_dim];
            for (gj, xj) in gw1.iter_mut().zip(x) {
                *gj += da * xj;
            }
            g[w1_end + j] += da;
        }
    }

    let scale = 1.0 / batch.len() as f64;
    for v in g.iter_mut() {
        *v *= scale;
    }
    g
}

/// An [`MlpSpec`] bound to a dataset, usable as an optimization [`Problem`].
#[derive(Debug, Clone)]
pub struct MlpProblem {
    pub spec: MlpSpec,
    pub data: Dataset,
}

impl MlpProblem {
    pub fn new(spec: MlpSpec, data: Dataset) -> Result<Self, CoreError> {
        if data.input_dim != spec.input_dim {
            return Err(CoreError::config("dataset input_dim does not match spec"));
        }
        if data.is_empty() {
            return Err(CoreError::config("dataset must contain at least one sample"));
        }
        if data.classes() > spec.output_dim {
            return Err(CoreError::config("dataset has more classes than outputs"));
        }
        Ok(MlpProblem { spec, data })
    }

    /// Fraction of samples whose argmax output matches the label.
    pub fn accuracy(&self, theta: &[f64], data: &Dataset) -> f64 {
        let mut correct = 0usize;
        for i in 0..data.len() {
            let (x, label) = data.sample(i);
            let out = forward(&self.spec, theta, x).output;
            let pred = out
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap();
            correct += usize::from(pred == label);
        }
        correct as f64 / data.len() as f64
    }
}

impl Problem for MlpProblem {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn sample_count(&self) -> usize {
        self.data.len()
    }

    fn minibatch_gradient(&self, theta: &[f64], batch: &[usize]) -> Vec<f64> {
        mlp_gradient(&self.spec, theta, &self.data, batch)
    }

    fn loss(&self, theta: &[f64], batch: Option<&[usize]>) -> f64 {
        let mut dout = vec![0.0; self.spec.output_dim];
        let sum_over = |idx: &mut dyn Iterator<Item = usize>, dout: &mut Vec<f64>| {
            let mut total = 0.0;
            let mut count = 0usize;
            for i in idx {
                let (x, label) = self.data.sample(i);
                let fwd = forward(&self.spec, theta, x);
                total += loss_and_dout(&self.spec, &fwd.output, label, dout);
                count += 1;
            }
            assert!(count > 0, "empty minibatch");
            total / count as f64
        };
        match batch {
            Some(idx) => sum_over(&mut idx.iter().copied(), &mut dout),
            None => sum_over(&mut (0..self.data.len()), &mut dout),
        }
    }
}
