//! A small multilayer perceptron with deterministic initialization,
//! softmax cross-entropy, analytic backprop, and finite differences.
//!
//! Hidden layers use ReLU (derivative 0 at exactly 0); the final layer is
//! linear and produces logits. The backward pass accepts an upstream scale
//! so loss wrappers can flip the descent direction by passing `-1.0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::{jitter_transform, LossWrapper};
use crate::rng::RngStream;
use crate::tensor::Tensor2D;

/// One dense layer: `output = input * weight + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `input_dim x output_dim`.
    pub weight: Tensor2D,
    /// `output_dim` entries.
    pub bias: Vec<f64>,
}

/// A fully connected ReLU network with a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
}

/// Cached activations from one forward pass.
///
/// `layer_inputs[l]` is the batch fed into layer `l`, so `layer_inputs[0]`
/// is the input batch itself and `layer_inputs[l]` for `l > 0` is the
/// post-ReLU activation of layer `l - 1`. The cache is exactly what the
/// backward pass needs: gradients contract against these inputs, and the
/// ReLU mask of layer `l - 1` is `layer_inputs[l] > 0`.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub layer_inputs: Vec<Tensor2D>,
    pub logits: Tensor2D,
}

/// Mean loss and per-row class probabilities.
#[derive(Debug, Clone)]
pub struct CrossEntropy {
    pub mean_loss: f64,
    pub probs: Tensor2D,
}

/// Per-layer gradients, congruent with a model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<DenseLayer>,
}

impl GradientSet {
    /// An all-zero gradient (or velocity) buffer shaped like `model`.
    pub fn zeros_like(model: &MlpModel) -> Self {
        GradientSet {
            layers: model
                .layers
                .iter()
                .map(|l| DenseLayer {
                    weight: Tensor2D::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }
}

impl MlpModel {
    /// Xavier-uniform initialization: weights drawn from
    /// `U(-sqrt(6/(fan_in+fan_out)), sqrt(6/(fan_in+fan_out)))` in layer
    /// order, row-major within a layer; biases start at zero. `sizes` lists
    /// every layer width including input and output.
    pub fn init(sizes: &[usize], rng: &mut RngStream) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidInput {
                context: "MlpModel::init",
                detail: format!("need at least input and output sizes, got {sizes:?}"),
            });
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidInput {
                context: "MlpModel::init",
                detail: format!("layer sizes must be positive, got {sizes:?}"),
            });
        }
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            let (din, dout) = (w[0], w[1]);
            let limit = libm::sqrt(6.0 / (din + dout) as f64);
            let mut values = Vec::with_capacity(din * dout);
            for _ in 0..din * dout {
                values.push(rng.uniform(-limit, limit));
            }
            layers.push(DenseLayer {
                weight: Tensor2D::new(din, dout, values)?,
                bias: vec![0.0; dout],
            });
        }
        Ok(MlpModel { layers })
    }

    /// Builds a model from explicit layers, validating that they chain.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput {
                context: "MlpModel::from_layers",
                detail: "need at least one layer".into(),
            });
        }
        for pair in layers.windows(2) {
            if pair[0].weight.cols() != pair[1].weight.rows() {
                return Err(Error::ShapeMismatch {
                    op: "MlpModel::from_layers",
                    detail: format!(
                        "layer output {} feeds layer input {}",
                        pair[0].weight.cols(),
                        pair[1].weight.rows()
                    ),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.weight.cols() {
                return Err(Error::ShapeMismatch {
                    op: "MlpModel::from_layers",
                    detail: format!(
                        "bias length {} vs {} outputs",
                        l.bias.len(),
                        l.weight.cols()
                    ),
                });
            }
        }
        Ok(MlpModel { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    /// Layer widths including input and output.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].weight.rows()];
        sizes.extend(self.layers.iter().map(|l| l.weight.cols()));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.cols()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.rows() * l.weight.cols() + l.bias.len())
            .sum()
    }

    /// Runs the batch through the network, caching per-layer inputs.
    pub fn forward(&self, x: &Tensor2D) -> Result<ForwardPass> {
        if x.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                op: "forward",
                detail: format!("input width {} vs model {}", x.cols(), self.input_dim()),
            });
        }
        if x.rows() == 0 {
            return Err(Error::InvalidInput {
                context: "forward",
                detail: "empty batch".into(),
            });
        }
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = h.matmul(&layer.weight)?;
            for r in 0..z.rows() {
                for c in 0..z.cols() {
                    z.set(r, c, z.get(r, c) + layer.bias[c]);
                }
            }
            let last = l + 1 == self.layers.len();
            layer_inputs.push(h);
            if last {
                return Ok(ForwardPass {
                    layer_inputs,
                    logits: z,
                });
            }
            for v in z.values_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            h = z;
        }
        unreachable!("from_layers and init guarantee at least one layer")
    }
}

/// Softmax cross-entropy, numerically stabilized by row-max subtraction.
/// Returns the batch-mean loss and the full probability matrix.
pub fn cross_entropy(logits: &Tensor2D, labels: &[usize]) -> Result<CrossEntropy> {
    if logits.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "cross_entropy",
            detail: format!("{} logit rows vs {} labels", logits.rows(), labels.len()),
        });
    }
    if logits.rows() == 0 {
        return Err(Error::InvalidInput {
            context: "cross_entropy",
            detail: "empty batch".into(),
        });
    }
    let classes = logits.cols();
    let mut probs = Tensor2D::zeros(logits.rows(), classes);
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: classes,
            });
        }
        let row = logits.row(r);
        let mut max = row[0];
        for &v in row {
            if v > max {
                max = v;
            }
        }
        let mut sum = 0.0;
        for (c, &v) in row.iter().enumerate() {
            let e = libm::exp(v - max);
            probs.set(r, c, e);
            sum += e;
        }
        for c in 0..classes {
            probs.set(r, c, probs.get(r, c) / sum);
        }
        total += libm::log(sum) - (row[label] - max);
    }
    Ok(CrossEntropy {
        mean_loss: total / logits.rows() as f64,
        probs,
    })
}

/// Analytic gradients of `upstream_scale * mean cross-entropy` with respect
/// to every parameter, using the cached forward pass.
pub fn backward(
    model: &MlpModel,
    pass: &ForwardPass,
    labels: &[usize],
    upstream_scale: f64,
) -> Result<GradientSet> {
    if pass.layer_inputs.len() != model.layers.len() {
        return Err(Error::InvalidInput {
            context: "backward",
            detail: format!(
                "cache has {} layer inputs, model has {} layers",
                pass.layer_inputs.len(),
                model.layers.len()
            ),
        });
    }
    let ce = cross_entropy(&pass.logits, labels)?;
    let n = pass.logits.rows();
    let scale = upstream_scale / n as f64;
    let mut delta = ce.probs;
    for (r, &label) in labels.iter().enumerate() {
        delta.set(r, label, delta.get(r, label) - 1.0);
    }
    for v in delta.values_mut() {
        *v *= scale;
    }

    let mut grads = GradientSet::zeros_like(model);
    for l in (0..model.layers.len()).rev() {
        let input = &pass.layer_inputs[l];
        if input.rows() != n {
            return Err(Error::ShapeMismatch {
                op: "backward",
                detail: format!("cache row count {} vs batch {n}", input.rows()),
            });
        }
        grads.layers[l].weight = input.transpose().matmul(&delta)?;
        for c in 0..delta.cols() {
            let mut sum = 0.0;
            for r in 0..n {
                sum += delta.get(r, c);
            }
            grads.layers[l].bias[c] = sum;
        }
        if l > 0 {
            let mut prev = delta.matmul(&model.layers[l].weight.transpose())?;
            let mask = &pass.layer_inputs[l];
            for r in 0..prev.rows() {
                for c in 0..prev.cols() {
                    if mask.get(r, c) <= 0.0 {
                        prev.set(r, c, 0.0);
                    }
                }
            }
            delta = prev;
        }
    }
    Ok(grads)
}

/// Central-difference gradients of the wrapped batch loss.
///
/// `alpha_fixed` pins the jitter level so both sides of each difference see
/// the same `alpha`; it is required for [`LossWrapper::Jitter`] and ignored
/// otherwise. Flooding uses its own fixed level and `Original` differences
/// the raw mean cross-entropy.
pub fn finite_diff_grad(
    model: &MlpModel,
    x: &Tensor2D,
    labels: &[usize],
    wrapper: &LossWrapper,
    alpha_fixed: Option<f64>,
    eps: f64,
) -> Result<GradientSet> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput {
            context: "finite_diff_grad",
            detail: format!("eps must be positive, got {eps}"),
        });
    }
    let level = match wrapper {
        LossWrapper::Original => None,
        LossWrapper::Flooding { level } => Some(*level),
        LossWrapper::Jitter { .. } => Some(alpha_fixed.ok_or(Error::InvalidInput {
            context: "finite_diff_grad",
            detail: "jitter wrapper needs alpha_fixed".into(),
        })?),
    };
    let mut probe = model.clone();
    let mut grads = GradientSet::zeros_like(model);
    let eval = |m: &MlpModel| -> Result<f64> {
        let raw = cross_entropy(&m.forward(x)?.logits, labels)?.mean_loss;
        Ok(match level {
            Some(a) => jitter_transform(raw, a),
            None => raw,
        })
    };
    for l in 0..model.layers.len() {
        let weight_len = model.layers[l].weight.values().len();
        for i in 0..weight_len {
            let orig = probe.layers[l].weight.values()[i];
            probe.layers[l].weight.values_mut()[i] = orig + eps;
            let plus = eval(&probe)?;
            probe.layers[l].weight.values_mut()[i] = orig - eps;
            let minus = eval(&probe)?;
            probe.layers[l].weight.values_mut()[i] = orig;
            grads.layers[l].weight.values_mut()[i] = (plus - minus) / (2.0 * eps);
        }
        for i in 0..model.layers[l].bias.len() {
            let orig = probe.layers[l].bias[i];
            probe.layers[l].bias[i] = orig + eps;
            let plus = eval(&probe)?;
            probe.layers[l].bias[i] = orig - eps;
            let minus = eval(&probe)?;
            probe.layers[l].bias[i] = orig;
            grads.layers[l].bias[i] = (plus - minus) / (2.0 * eps);
        }
    }
    Ok(grads)
}

/// Relative error used to compare analytic and numerical gradients.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = libm::fabs(a).max(libm::fabs(b)).max(1e-6);
    libm::fabs(a - b) / scale
}
