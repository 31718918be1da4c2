//! Mini-batch training: momentum SGD driving any loss wrapper.
//!
//! Each epoch reshuffles the training indices into disjoint mini-batches
//! (the last one may be short; it keeps equal weight in epoch means). Per
//! batch the raw mean cross-entropy is computed, the wrapper turns it into
//! a wrapped loss plus a gradient sign, and backprop scaled by that sign
//! feeds one SGD step. All randomness comes from two caller-provided
//! streams (shuffling and jitter draws), so a run is a pure function of its
//! spec: same spec, bit-identical record.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{self, LossWrapper};
use crate::nn::{backward, cross_entropy, GradientSet, MlpModel};
use crate::rng::{streams, RngStream};

/// SGD hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.001,
            momentum: 0.95,
            weight_decay: 0.0005,
            batch_size: 128,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput {
                context: "OptimizerConfig",
                detail: format!("learning_rate must be positive, got {}", self.learning_rate),
            });
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(Error::InvalidInput {
                context: "OptimizerConfig",
                detail: format!("momentum must be in [0, 1), got {}", self.momentum),
            });
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidInput {
                context: "OptimizerConfig",
                detail: format!(
                    "weight_decay must be nonnegative, got {}",
                    self.weight_decay
                ),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput {
                context: "OptimizerConfig",
                detail: "batch_size must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One mini-batch as seen by the wrapper: raw risk, level in effect, and
/// the sign the backward pass was scaled by.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchRisk {
    pub raw: f64,
    pub alpha: Option<f64>,
    pub grad_sign: f64,
}

/// Summary of the alpha draws of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Everything recorded about one epoch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Equal-weight mean of per-batch raw losses.
    pub raw_train_loss: f64,
    /// Equal-weight mean of per-batch wrapped losses.
    pub wrapped_train_loss: f64,
    pub per_batch_risks: Vec<BatchRisk>,
    pub test_loss: f64,
    pub test_accuracy: f64,
    /// `None` when the wrapper never produced a level (Original).
    pub alpha_stats: Option<AlphaStats>,
}

/// Full description of a run; the trainer derives everything from it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSpec {
    /// Hidden layer widths; input and output come from the dataset.
    pub hidden_layers: Vec<usize>,
    pub wrapper: LossWrapper,
    /// Short name used in logs and reports (e.g. a preset name).
    pub wrapper_label: String,
    pub optimizer: OptimizerConfig,
    pub epochs: usize,
    pub seed: u64,
    /// Identifies the dataset for config-consistency checks.
    pub dataset_summary: String,
}

/// Metrics of a finished run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub spec: RunSpec,
    /// Contiguous from epoch 0.
    pub metrics: Vec<EpochMetrics>,
    /// Filled by the caller that owns a clock; 0.0 from the core trainer.
    pub duration_seconds: f64,
}

/// A finished run plus the trained model.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub model: MlpModel,
}

/// The two random streams a run consumes during training.
#[derive(Debug, Clone)]
pub struct TrainStreams {
    pub shuffle: RngStream,
    pub jitter: RngStream,
}

impl TrainStreams {
    /// Streams for a given run seed, using the crate's fixed stream ids.
    pub fn for_seed(seed: u64) -> Self {
        TrainStreams {
            shuffle: RngStream::new(seed, streams::BATCH_SHUFFLE),
            jitter: RngStream::new(seed, streams::JITTER),
        }
    }
}

/// Test-set evaluation: unwrapped mean cross-entropy and argmax accuracy
/// (ties resolve to the lowest class index). No jittering is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub test_loss: f64,
    pub test_accuracy: f64,
}

/// Shuffles `0..n` and splits it into disjoint batches covering every index
/// exactly once; the final batch may be short.
pub fn make_batches(n: usize, batch_size: usize, rng: &mut RngStream) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 || n < batch_size {
        return Err(Error::InvalidInput {
            context: "make_batches",
            detail: format!("need n >= batch_size >= 1, got n={n}, batch_size={batch_size}"),
        });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut indices);
    Ok(indices.chunks(batch_size).map(|c| c.to_vec()).collect())
}

/// One momentum-SGD update with coupled weight decay:
/// `v <- momentum * v + grads + weight_decay * params`, then
/// `params <- params - learning_rate * v`.
pub fn sgd_step(
    model: &mut MlpModel,
    grads: &GradientSet,
    velocity: &mut GradientSet,
    opt: &OptimizerConfig,
) {
    debug_assert_eq!(model.layers().len(), grads.layers.len());
    debug_assert_eq!(model.layers().len(), velocity.layers.len());
    for l in 0..grads.layers.len() {
        let layer = &mut model.layers_mut()[l];
        let g = &grads.layers[l];
        let v = &mut velocity.layers[l];
        let w = layer.weight.values_mut();
        let gw = g.weight.values();
        let vw = v.weight.values_mut();
        for i in 0..w.len() {
            vw[i] = opt.momentum * vw[i] + gw[i] + opt.weight_decay * w[i];
            w[i] -= opt.learning_rate * vw[i];
        }
        for i in 0..layer.bias.len() {
            v.bias[i] = opt.momentum * v.bias[i] + g.bias[i] + opt.weight_decay * layer.bias[i];
            layer.bias[i] -= opt.learning_rate * v.bias[i];
        }
    }
}

/// Full-dataset evaluation on the raw objective.
pub fn evaluate(model: &MlpModel, dataset: &Dataset) -> Result<Evaluation> {
    let pass = model.forward(dataset.features())?;
    let ce = cross_entropy(&pass.logits, dataset.labels())?;
    let mut correct = 0usize;
    for r in 0..pass.logits.rows() {
        let row = pass.logits.row(r);
        let mut best = 0;
        for c in 1..row.len() {
            if row[c] > row[best] {
                best = c;
            }
        }
        if best == dataset.labels()[r] {
            correct += 1;
        }
    }
    Ok(Evaluation {
        test_loss: ce.mean_loss,
        test_accuracy: correct as f64 / dataset.len() as f64,
    })
}

fn as_batch_abort(err: Error, epoch: usize, batch: usize) -> Error {
    match err {
        Error::NonFinite { .. } => Error::NonFiniteLoss { epoch, batch },
        other => other,
    }
}

/// Trains one epoch in place and reports its metrics (including an
/// evaluation of the post-epoch model on `test`).
#[allow(clippy::too_many_arguments)]
pub fn train_epoch(
    model: &mut MlpModel,
    train: &Dataset,
    test: &Dataset,
    wrapper: &LossWrapper,
    opt: &OptimizerConfig,
    velocity: &mut GradientSet,
    epoch: usize,
    streams: &mut TrainStreams,
) -> Result<EpochMetrics> {
    let batches = make_batches(train.len(), opt.batch_size, &mut streams.shuffle)?;
    let mut risks = Vec::with_capacity(batches.len());
    let mut raw_sum = 0.0;
    let mut wrapped_sum = 0.0;
    for (bi, batch) in batches.iter().enumerate() {
        let x = train.features().gather_rows(batch)?;
        let labels: Vec<usize> = batch.iter().map(|&i| train.labels()[i]).collect();
        let pass = model
            .forward(&x)
            .map_err(|e| as_batch_abort(e, epoch, bi))?;
        let ce = cross_entropy(&pass.logits, &labels)?;
        let wrapped = loss::apply(wrapper, ce.mean_loss, &mut streams.jitter)
            .map_err(|e| as_batch_abort(e, epoch, bi))?;
        let grads = backward(model, &pass, &labels, wrapped.grad_sign)
            .map_err(|e| as_batch_abort(e, epoch, bi))?;
        sgd_step(model, &grads, velocity, opt);
        raw_sum += wrapped.raw;
        wrapped_sum += wrapped.wrapped;
        risks.push(BatchRisk {
            raw: wrapped.raw,
            alpha: wrapped.alpha,
            grad_sign: wrapped.grad_sign,
        });
    }
    let m = batches.len() as f64;
    let eval = evaluate(model, test)?;
    let alphas: Vec<f64> = risks.iter().filter_map(|r| r.alpha).collect();
    let alpha_stats = if alphas.is_empty() {
        None
    } else {
        let mut min = alphas[0];
        let mut max = alphas[0];
        let mut sum = 0.0;
        for &a in &alphas {
            if a < min {
                min = a;
            }
            if a > max {
                max = a;
            }
            sum += a;
        }
        Some(AlphaStats {
            mean: sum / alphas.len() as f64,
            min,
            max,
        })
    };
    Ok(EpochMetrics {
        epoch,
        raw_train_loss: raw_sum / m,
        wrapped_train_loss: wrapped_sum / m,
        per_batch_risks: risks,
        test_loss: eval.test_loss,
        test_accuracy: eval.test_accuracy,
        alpha_stats,
    })
}

/// Runs a full experiment: initializes the model from `spec.seed`, trains
/// for the configured epoch count, and calls `on_epoch` after each epoch
/// (the CLI uses this to flush CSV rows as they appear).
pub fn run_experiment(
    spec: &RunSpec,
    train: &Dataset,
    test: &Dataset,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<RunOutcome> {
    spec.optimizer.validate()?;
    if train.dim() != test.dim() || train.num_classes() != test.num_classes() {
        return Err(Error::ShapeMismatch {
            op: "run_experiment",
            detail: format!(
                "train {}d/{} classes vs test {}d/{} classes",
                train.dim(),
                train.num_classes(),
                test.dim(),
                test.num_classes()
            ),
        });
    }
    let mut sizes = Vec::with_capacity(spec.hidden_layers.len() + 2);
    sizes.push(train.dim());
    sizes.extend_from_slice(&spec.hidden_layers);
    sizes.push(train.num_classes());
    let mut init_rng = RngStream::new(spec.seed, streams::WEIGHT_INIT);
    let mut model = MlpModel::init(&sizes, &mut init_rng)?;
    let mut velocity = GradientSet::zeros_like(&model);
    let mut train_streams = TrainStreams::for_seed(spec.seed);
    let mut metrics = Vec::with_capacity(spec.epochs);
    for epoch in 0..spec.epochs {
        let em = train_epoch(
            &mut model,
            train,
            test,
            &spec.wrapper,
            &spec.optimizer,
            &mut velocity,
            epoch,
            &mut train_streams,
        )?;
        on_epoch(&em);
        metrics.push(em);
    }
    Ok(RunOutcome {
        record: RunRecord {
            spec: spec.clone(),
            metrics,
            duration_seconds: 0.0,
        },
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_blobs;
    use crate::sampler::jitter_preset;
    use crate::tensor::Tensor2D;
    use alloc::borrow::ToOwned;
    use alloc::vec;

    fn blobs(seed: u64, n: usize) -> Dataset {
        let mut rng = RngStream::new(seed, streams::DATA);
        synthetic_blobs(n, 6, 3, 2.0, 0.1, &mut rng).unwrap()
    }

    fn spec(wrapper: LossWrapper, epochs: usize) -> RunSpec {
        RunSpec {
            hidden_layers: vec![8],
            wrapper_label: wrapper.describe(),
            wrapper,
            optimizer: OptimizerConfig {
                batch_size: 30,
                ..OptimizerConfig::default()
            },
            epochs,
            seed: 0,
            dataset_summary: "unit-test blobs".to_owned(),
        }
    }

    #[test]
    fn optimizer_defaults_and_validation() {
        let d = OptimizerConfig::default();
        assert_eq!(
            (d.learning_rate, d.momentum, d.weight_decay, d.batch_size),
            (0.001, 0.95, 0.0005, 128)
        );
        assert!(d.validate().is_ok());
        assert!(OptimizerConfig {
            learning_rate: 0.0,
            ..d.clone()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            momentum: 1.0,
            ..d.clone()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            weight_decay: -0.1,
            ..d.clone()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig { batch_size: 0, ..d }.validate().is_err());
    }

    #[test]
    fn batches_partition_the_index_range() {
        let mut rng = RngStream::new(0, streams::BATCH_SHUFFLE);
        let batches = make_batches(4, 2, &mut rng).unwrap();
        assert_eq!(batches.len(), 2);
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);

        let batches = make_batches(5, 2, &mut rng).unwrap();
        let sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1]);
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        assert_eq!(all, (0..5).collect::<Vec<_>>());

        let batches = make_batches(128, 128, &mut rng).unwrap();
        assert_eq!(batches.len(), 1);
        let mut all = batches[0].clone();
        all.sort_unstable();
        assert_eq!(all, (0..128).collect::<Vec<_>>());
        assert!(make_batches(10, 11, &mut rng).is_err());
    }

    #[test]
    fn vanilla_sgd_subtracts_scaled_gradients() {
        let mut model = MlpModel::from_layers(vec![crate::nn::DenseLayer {
            weight: Tensor2D::new(1, 1, vec![1.0]).unwrap(),
            bias: vec![0.5],
        }])
        .unwrap();
        let mut grads = GradientSet::zeros_like(&model);
        grads.layers[0].weight.values_mut()[0] = 2.0;
        grads.layers[0].bias[0] = -4.0;
        let mut velocity = GradientSet::zeros_like(&model);
        let opt = OptimizerConfig {
            learning_rate: 0.1,
            momentum: 0.0,
            weight_decay: 0.0,
            batch_size: 1,
        };
        sgd_step(&mut model, &grads, &mut velocity, &opt);
        assert_eq!(model.layers()[0].weight.get(0, 0), 1.0 - 0.1 * 2.0);
        assert_eq!(model.layers()[0].bias[0], 0.5 + 0.1 * 4.0);
    }

    #[test]
    fn zero_gradients_are_a_fixed_point() {
        let mut model = MlpModel::from_layers(vec![crate::nn::DenseLayer {
            weight: Tensor2D::new(1, 1, vec![3.0]).unwrap(),
            bias: vec![-1.0],
        }])
        .unwrap();
        let before = model.clone();
        let grads = GradientSet::zeros_like(&model);
        let mut velocity = GradientSet::zeros_like(&model);
        let opt = OptimizerConfig {
            weight_decay: 0.0,
            ..OptimizerConfig::default()
        };
        sgd_step(&mut model, &grads, &mut velocity, &opt);
        assert_eq!(model, before);
    }

    #[test]
    fn momentum_matches_hand_unrolled_recurrence() {
        let mut model = MlpModel::from_layers(vec![crate::nn::DenseLayer {
            weight: Tensor2D::new(1, 1, vec![1.0]).unwrap(),
            bias: vec![0.0],
        }])
        .unwrap();
        let mut velocity = GradientSet::zeros_like(&model);
        let opt = OptimizerConfig {
            learning_rate: 0.01,
            momentum: 0.95,
            weight_decay: 0.002,
            batch_size: 1,
        };
        let gs = [0.3, -0.7];
        let mut w = 1.0f64;
        let mut v = 0.0f64;
        for &g in &gs {
            let mut grads = GradientSet::zeros_like(&model);
            grads.layers[0].weight.values_mut()[0] = g;
            sgd_step(&mut model, &grads, &mut velocity, &opt);
            v = 0.95 * v + g + 0.002 * w;
            w -= 0.01 * v;
        }
        assert!((model.layers()[0].weight.get(0, 0) - w).abs() < 1e-15);
        assert!((velocity.layers[0].weight.values()[0] - v).abs() < 1e-15);
    }

    #[test]
    fn uniform_predictor_evaluates_to_ln_c() {
        let ds = blobs(1, 90);
        let zero = MlpModel::from_layers(vec![crate::nn::DenseLayer {
            weight: Tensor2D::zeros(6, 3),
            bias: vec![0.0; 3],
        }])
        .unwrap();
        let eval = evaluate(&zero, &ds).unwrap();
        assert!((eval.test_loss - libm::log(3.0)).abs() < 1e-12);
        // Argmax ties resolve to class 0; round-robin labels put a third there.
        assert!((eval.test_accuracy - 1.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn evaluation_is_deterministic_and_wrapper_free() {
        let ds = blobs(2, 60);
        let outcome = run_experiment(&spec(LossWrapper::Original, 2), &ds, &ds, |_| {}).unwrap();
        let a = evaluate(&outcome.model, &ds).unwrap();
        let b = evaluate(&outcome.model, &ds).unwrap();
        assert_eq!(a.test_loss.to_bits(), b.test_loss.to_bits());
        assert_eq!(a.test_accuracy, b.test_accuracy);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let ds = blobs(3, 90);
        let mut init_rng = RngStream::new(5, streams::WEIGHT_INIT);
        let mut model = MlpModel::init(&[6, 8, 3], &mut init_rng).unwrap();
        let before = model.clone();
        let mut velocity = GradientSet::zeros_like(&model);
        let mut ts = TrainStreams::for_seed(5);
        let opt = OptimizerConfig {
            learning_rate: 1e-300,
            momentum: 0.0,
            weight_decay: 0.0,
            batch_size: 30,
        };
        let em = train_epoch(
            &mut model,
            &ds,
            &ds,
            &LossWrapper::Original,
            &opt,
            &mut velocity,
            0,
            &mut ts,
        )
        .unwrap();
        for (la, lb) in model.layers().iter().zip(before.layers()) {
            for (a, b) in la.weight.values().iter().zip(lb.weight.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // Equal-size batches: mean of batch means equals the full mean.
        assert!((em.raw_train_loss - em.test_loss).abs() < 1e-9);
        assert_eq!(em.alpha_stats, None);
        assert!(em.per_batch_risks.iter().all(|r| r.alpha.is_none()));
    }

    #[test]
    fn unreachable_flooding_level_forces_ascent() {
        let ds = blobs(4, 90);
        let wrapper = LossWrapper::flooding(10.0).unwrap();
        let outcome = run_experiment(&spec(wrapper, 2), &ds, &ds, |_| {}).unwrap();
        for em in &outcome.record.metrics {
            for r in &em.per_batch_risks {
                assert_eq!(r.grad_sign, -1.0);
                assert_eq!(r.alpha, Some(10.0));
            }
            assert!(em.wrapped_train_loss >= em.raw_train_loss);
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let ds = blobs(6, 90);
        let wrapper = LossWrapper::jitter(jitter_preset("jitter_3").unwrap());
        let s = spec(wrapper, 3);
        let a = run_experiment(&s, &ds, &ds, |_| {}).unwrap();
        let b = run_experiment(&s, &ds, &ds, |_| {}).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.model, b.model);
        assert_eq!(a.record.metrics.len(), 3);
        for (i, em) in a.record.metrics.iter().enumerate() {
            assert_eq!(em.epoch, i);
            assert!(em.wrapped_train_loss >= em.raw_train_loss);
            assert!((0.0..=1.0).contains(&em.test_accuracy));
            let stats = em.alpha_stats.unwrap();
            assert!(stats.min <= stats.mean && stats.mean <= stats.max);
            assert!((0.0..0.04).contains(&stats.min));
        }
    }

    #[test]
    fn zero_epochs_returns_the_initialization() {
        let ds = blobs(7, 60);
        let s = spec(LossWrapper::Original, 0);
        let outcome = run_experiment(&s, &ds, &ds, |_| {}).unwrap();
        assert!(outcome.record.metrics.is_empty());
        let mut init_rng = RngStream::new(0, streams::WEIGHT_INIT);
        let expected = MlpModel::init(&[6, 8, 3], &mut init_rng).unwrap();
        assert_eq!(outcome.model, expected);
    }

    #[test]
    fn epoch_callback_sees_every_epoch_in_order() {
        let ds = blobs(8, 60);
        let s = spec(LossWrapper::Original, 4);
        let mut seen = Vec::new();
        run_experiment(&s, &ds, &ds, |em| seen.push(em.epoch)).unwrap();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn mismatched_test_set_is_rejected() {
        let train = blobs(9, 60);
        let mut rng = RngStream::new(9, streams::DATA);
        let test = synthetic_blobs(40, 5, 3, 2.0, 0.0, &mut rng).unwrap();
        let s = spec(LossWrapper::Original, 1);
        assert!(run_experiment(&s, &train, &test, |_| {}).is_err());
    }
}
