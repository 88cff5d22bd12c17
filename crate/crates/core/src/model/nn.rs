//! Fully connected ReLU network with a softmax output, trained by seeded
//! mini-batch gradient descent on mean cross-entropy.
//!
//! Parameters live in one flat vector. For each layer, in order, the weight
//! matrix (`out x in`, row-major) is followed by the bias vector, so the
//! analytic gradient can be compared with finite differences element by
//! element.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::error::{Error, Result};
use crate::record::ClassLabel;
use crate::scalar::Scalar;

pub const CLASSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    /// Layer widths: input, hidden..., output.
    pub sizes: Vec<usize>,
    pub params: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
struct LayerView {
    inputs: usize,
    outputs: usize,
    w: usize,
    b: usize,
}

impl<T: Scalar> Mlp<T> {
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn zeros(inputs: usize, hidden: &[usize]) -> Self {
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(CLASSES);
        let n = Self::param_count(&sizes);
        Mlp { sizes, params: vec![T::zero(); n] }
    }

    /// He-normal weights, zero biases.
    pub fn init(inputs: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut net = Self::zeros(inputs, hidden);
        for layer in net.layers() {
            let std = (2.0 / layer.inputs as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("finite std");
            for p in &mut net.params[layer.w..layer.b] {
                *p = T::lit(normal.sample(rng));
            }
        }
        net
    }

    pub fn from_params(sizes: Vec<usize>, params: Vec<T>) -> Self {
        assert_eq!(Self::param_count(&sizes), params.len(), "parameter length");
        Mlp { sizes, params }
    }

    fn layers(&self) -> Vec<LayerView> {
        let mut at = 0;
        self.sizes
            .windows(2)
            .map(|w| {
                let view = LayerView { inputs: w[0], outputs: w[1], w: at, b: at + w[0] * w[1] };
                at = view.b + w[1];
                view
            })
            .collect()
    }

    /// Pre-activations of every layer for one input row.
    pub fn forward_trace(&self, x: &[T]) -> Vec<Vec<T>> {
        let layers = self.layers();
        let mut pre = Vec::with_capacity(layers.len());
        let mut act: Vec<T> = x.to_vec();
        for (li, l) in layers.iter().enumerate() {
            let w = &self.params[l.w..l.b];
            let b = &self.params[l.b..l.b + l.outputs];
            let z: Vec<T> = (0..l.outputs)
                .map(|o| {
                    let row = &w[o * l.inputs..(o + 1) * l.inputs];
                    row.iter().zip(&act).fold(b[o], |s, (&wi, &ai)| s + wi * ai)
                })
                .collect();
            act = if li + 1 < layers.len() { z.iter().map(|&v| v.max(T::zero())).collect() } else { z.clone() };
            pre.push(z);
        }
        pre
    }

    pub fn logits(&self, x: &[T]) -> Vec<T> {
        self.forward_trace(x).pop().expect("at least one layer")
    }

    pub fn predict_row(&self, x: &[T]) -> ClassLabel {
        let z = self.logits(x);
        let mut best = 0;
        for c in 1..CLASSES {
            if z[c] > z[best] {
                best = c;
            }
        }
        ClassLabel::from_index(best)
    }

    /// Mean cross-entropy over the labeled rows of `batch`.
    pub fn loss(&self, batch: &FeatureMatrix<T>) -> T {
        let n = batch.rows();
        let total = (0..n).fold(T::zero(), |acc, i| {
            let z = self.logits(batch.row(i));
            acc + cross_entropy(&z, batch.labels[i].index())
        });
        total / T::lit(n.max(1) as f64)
    }

    /// Mean loss and its analytic gradient over `rows` of `data`.
    fn loss_and_grad(&self, data: &FeatureMatrix<T>, rows: &[usize], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let layers = self.layers();
        let depth = layers.len();
        let mut total = T::zero();
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(depth + 1);
        let mut pres: Vec<Vec<T>> = Vec::with_capacity(depth);

        for &i in rows {
            acts.clear();
            pres.clear();
            acts.push(data.row(i).to_vec());
            for (li, l) in layers.iter().enumerate() {
                let w = &self.params[l.w..l.b];
                let b = &self.params[l.b..l.b + l.outputs];
                let input = &acts[li];
                let z: Vec<T> = (0..l.outputs)
                    .map(|o| w[o * l.inputs..(o + 1) * l.inputs].iter().zip(input).fold(b[o], |s, (&wi, &ai)| s + wi * ai))
                    .collect();
                let a = if li + 1 < depth { z.iter().map(|&v| v.max(T::zero())).collect() } else { z.clone() };
                pres.push(z);
                acts.push(a);
            }
            let target = data.labels[i].index();
            let probs = softmax(&pres[depth - 1]);
            total += -probs[target].max(T::min_positive_value()).ln();

            let mut delta: Vec<T> = probs;
            delta[target] -= T::one();
            for li in (0..depth).rev() {
                let l = layers[li];
                let input = &acts[li];
                for o in 0..l.outputs {
                    let d = delta[o];
                    if d == T::zero() {
                        continue;
                    }
                    let gw = &mut grad[l.w + o * l.inputs..l.w + (o + 1) * l.inputs];
                    for (g, &a) in gw.iter_mut().zip(input) {
                        *g += d * a;
                    }
                    grad[l.b + o] += d;
                }
                if li > 0 {
                    let w = &self.params[l.w..l.b];
                    let below = &pres[li - 1];
                    let mut next = vec![T::zero(); l.inputs];
                    for o in 0..l.outputs {
                        let d = delta[o];
                        if d == T::zero() {
                            continue;
                        }
                        for (n, &wi) in next.iter_mut().zip(&w[o * l.inputs..(o + 1) * l.inputs]) {
                            *n += d * wi;
                        }
                    }
                    for (n, &z) in next.iter_mut().zip(below) {
                        if !(z > T::zero()) {
                            *n = T::zero();
                        }
                    }
                    delta = next;
                }
            }
        }
        let scale = T::one() / T::lit(rows.len().max(1) as f64);
        grad.iter_mut().for_each(|g| *g *= scale);
        total * scale
    }
}

fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s = e.iter().copied().fold(T::zero(), |a, v| a + v);
    e.into_iter().map(|v| v / s).collect()
}

fn cross_entropy<T: Scalar>(z: &[T], target: usize) -> T {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = z.iter().fold(T::zero(), |a, &v| a + (v - m).exp()).ln() + m;
    lse - z[target]
}

/// Gradient of the mean cross-entropy over every row of `batch` with
/// respect to all weights and biases, in the flat parameter layout.
pub fn nn_gradient<T: Scalar>(net: &Mlp<T>, batch: &FeatureMatrix<T>) -> Vec<T> {
    let rows: Vec<usize> = (0..batch.rows()).collect();
    let mut grad = vec![T::zero(); net.params.len()];
    net.loss_and_grad(batch, &rows, &mut grad);
    grad
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdOptions {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Upper bound on passes over the training data.
    pub max_iterations: usize,
    /// Passes without a validation-accuracy improvement before stopping.
    pub validation_patience: usize,
    /// Stop when the epoch loss changes by less than this.
    pub loss_tolerance: f64,
}

impl Default for SgdOptions {
    fn default() -> Self {
        SgdOptions { learning_rate: 0.01, batch_size: 128, max_iterations: 1000, validation_patience: 6, loss_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub iterations: usize,
    pub final_loss: f64,
    pub best_validation_accuracy: Option<f64>,
    pub stop_reason: String,
}

fn accuracy<T: Scalar>(net: &Mlp<T>, data: &FeatureMatrix<T>) -> f64 {
    let hits = (0..data.rows()).filter(|&i| net.predict_row(data.row(i)) == data.labels[i]).count();
    hits as f64 / data.rows().max(1) as f64
}

pub fn train_mlp<T: Scalar>(
    hidden: &[usize],
    train: &FeatureMatrix<T>,
    val: &FeatureMatrix<T>,
    seed: u64,
    opts: &SgdOptions,
) -> Result<(Mlp<T>, TrainLog)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Mlp::init(train.cols(), hidden, &mut rng);
    let mut grad = vec![T::zero(); net.params.len()];
    let mut order: Vec<usize> = (0..train.rows()).collect();
    let lr = T::lit(opts.learning_rate);
    let batch = opts.batch_size.max(1);

    let use_val = !val.is_empty();
    let mut best: Option<(f64, Vec<T>)> = None;
    let mut since_best = 0;
    let mut prev_loss: Option<f64> = None;
    let mut stop_reason = "iteration limit".to_string();
    let mut iterations = 0;
    let mut last_loss = f64::NAN;

    for epoch in 1..=opts.max_iterations {
        iterations = epoch;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let loss = net.loss_and_grad(train, chunk, &mut grad);
            epoch_loss += loss.as_f64() * chunk.len() as f64;
            for (p, &g) in net.params.iter_mut().zip(&grad) {
                *p -= lr * g;
            }
        }
        epoch_loss /= train.rows().max(1) as f64;
        if !epoch_loss.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss(epoch));
        }
        last_loss = epoch_loss;

        if use_val {
            let acc = accuracy(&net, val);
            if best.as_ref().map_or(true, |(b, _)| acc > *b) {
                best = Some((acc, net.params.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= opts.validation_patience {
                    stop_reason = "validation plateau".into();
                    break;
                }
            }
        }
        if let Some(prev) = prev_loss {
            if (prev - epoch_loss).abs() < opts.loss_tolerance {
                stop_reason = "loss tolerance".into();
                break;
            }
        }
        prev_loss = Some(epoch_loss);
    }

    let best_validation_accuracy = best.as_ref().map(|(a, _)| *a);
    if let Some((_, params)) = best {
        net.params = params;
    }
    Ok((net, TrainLog { iterations, final_loss: last_loss, best_validation_accuracy, stop_reason }))
}
