//! Two hidden layers of six rectified-linear units and a sigmoid output,
//! trained by full-batch backpropagation on binary cross-entropy.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate_rows, ModelError, Standardizer, TrainingConfig};
use crate::math::{bce_with_logit, probability, sigmoid};
use crate::Label;

pub const HIDDEN_WIDTHS: [usize; 2] = [6, 6];

/// Fully connected layer; `weights[i * fan_out + j]` connects input `i`
/// to unit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    /// Uniform in ±sqrt(6 / (fan_in + fan_out)), zero biases.
    fn init(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let r = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        let weights = (0..fan_in * fan_out).map(|_| rng.random_range(-r..=r)).collect();
        Self {
            fan_in,
            fan_out,
            weights,
            biases: alloc::vec![0.0; fan_out],
        }
    }

    fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut out = self.biases.clone();
        for (i, x) in input.iter().enumerate() {
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (o, w) in out.iter_mut().zip(row) {
                *o += x * w;
            }
        }
        out
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.fan_in, self.fan_out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// input→6, 6→6, 6→1.
    pub layers: Vec<DenseLayer>,
    pub standardizer: Option<Standardizer>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
}

fn relu(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Activations kept for the backward pass.
struct Trace {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn new_initialized(input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths = [input_dim, HIDDEN_WIDTHS[0], HIDDEN_WIDTHS[1], 1];
        let layers = widths
            .windows(2)
            .map(|w| DenseLayer::init(w[0], w[1], &mut rng))
            .collect();
        Self {
            layers,
            standardizer: None,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
        }
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&current);
            let mut a = z.clone();
            if idx + 1 < self.layers.len() {
                relu(&mut a);
            }
            pre.push(z);
            post.push(a.clone());
            current = a;
        }
        Trace {
            input: x.to_vec(),
            pre,
            post,
        }
    }

    /// Output logit for an already transformed input.
    fn logit(&self, x: &[f64]) -> f64 {
        self.trace(x).pre.last().expect("output layer")[0]
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let z = match &self.standardizer {
            Some(s) => self.logit(&s.transform(x)),
            None => self.logit(x),
        };
        probability(z)
    }

    /// All weights then biases, layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
    }

    /// Weighted mean cross-entropy over the rows (inputs as given, no
    /// standardization) and its gradient in [`Self::parameters`] order.
    pub fn loss_and_gradient(
        &self,
        features: &[Vec<f64>],
        labels: &[Label],
        sample_weights: &[f64],
    ) -> (f64, Vec<f64>) {
        let total_weight: f64 = sample_weights.iter().sum();
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (alloc::vec![0.0; l.weights.len()], alloc::vec![0.0; l.biases.len()]))
            .collect();
        let mut loss = 0.0;
        for ((x, y), w) in features.iter().zip(labels).zip(sample_weights) {
            let trace = self.trace(x);
            let logit = trace.pre.last().expect("output layer")[0];
            let t = y.target();
            loss += w * bce_with_logit(logit, t);

            let mut delta = alloc::vec![w * (sigmoid(logit) - t) / total_weight];
            for idx in (0..self.layers.len()).rev() {
                let layer = &self.layers[idx];
                let input = if idx == 0 { &trace.input } else { &trace.post[idx - 1] };
                let (gw, gb) = &mut grads[idx];
                for (i, a) in input.iter().enumerate() {
                    for (j, d) in delta.iter().enumerate() {
                        gw[i * layer.fan_out + j] += a * d;
                    }
                }
                for (g, d) in gb.iter_mut().zip(&delta) {
                    *g += d;
                }
                if idx == 0 {
                    break;
                }
                let below = &trace.pre[idx - 1];
                delta = (0..layer.fan_in)
                    .map(|i| {
                        if below[i] <= 0.0 {
                            return 0.0;
                        }
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        row.iter().zip(&delta).map(|(w, d)| w * d).sum()
                    })
                    .collect();
            }
        }
        let mut flat = Vec::new();
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        (loss / total_weight, flat)
    }
}

/// Full-batch gradient descent from a seeded uniform initialization.
pub fn train_mlp(features: &[Vec<f64>], labels: &[Label], config: &TrainingConfig) -> Result<MlpModel, ModelError> {
    config.validate()?;
    let dim = validate_rows(features, labels)?;
    let standardizer = config.standardize.then(|| Standardizer::fit(features));
    let transformed;
    let x = match &standardizer {
        Some(s) => {
            transformed = s.transform_all(features);
            &transformed
        }
        None => features,
    };

    let cfg = config.mlp;
    let mut model = MlpModel::new_initialized(dim, config.seed);
    let unit = alloc::vec![1.0; labels.len()];
    let mut params = model.parameters();
    for _ in 0..cfg.epochs {
        let (loss, grad) = model.loss_and_gradient(x, labels, &unit);
        if !loss.is_finite() {
            return Err(ModelError::Diverged {
                learning_rate: cfg.learning_rate,
            });
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        model.set_parameters(&params);
    }
    if !params.iter().all(|p| p.is_finite()) {
        return Err(ModelError::Diverged {
            learning_rate: cfg.learning_rate,
        });
    }
    model.standardizer = standardizer;
    Ok(model)
}
