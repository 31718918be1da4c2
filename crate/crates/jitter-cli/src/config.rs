//! Config file schema, validation, and deterministic run identity.
//!
//! Configs are JSON. The loader rejects unknown top-level fields and
//! resolves the wrapper field (a preset name or an inline spec object)
//! into a concrete [`LossWrapper`] before anything runs.

use std::fs;
use std::path::Path;

use jitter::loss::LossWrapper;
use jitter::sampler::{jitter_preset, JitterSpec, PRESET_NAMES};
use jitter::train::{OptimizerConfig, RunSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Level used when the wrapper is given as the bare string `"flooding"`.
pub const DEFAULT_FLOODING_LEVEL: f64 = 0.02;

/// One training run.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub wrapper: WrapperConfig,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    pub epochs: usize,
    pub seed: u64,
    pub output_dir: String,
}

/// A wrapper-by-seed grid sharing one dataset, model, and optimizer.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub wrappers: Vec<WrapperConfig>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    pub output_dir: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetConfig {
    /// Gaussian blobs generated from the run seed; the test split is
    /// generated without label noise.
    Synthetic {
        train_n: usize,
        test_n: usize,
        dim: usize,
        classes: usize,
        separation: f64,
        train_label_noise: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subset_n: Option<usize>,
    },
    /// IDX image/label file pairs (the MNIST container format).
    Idx {
        train_images: String,
        train_labels: String,
        test_images: String,
        test_labels: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subset_n: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden layer widths; input and output sizes come from the dataset.
    pub hidden: Vec<usize>,
}

/// Optimizer fields with per-field defaults matching [`OptimizerConfig`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        let core = OptimizerConfig::default();
        OptimizerSettings {
            learning_rate: core.learning_rate,
            momentum: core.momentum,
            weight_decay: core.weight_decay,
            batch_size: core.batch_size,
        }
    }
}

impl OptimizerSettings {
    pub fn to_core(&self) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
        }
    }
}

/// The wrapper field: a name (`"original"`, `"flooding"`, or a jitter
/// preset) or an inline object (`{"flooding": b}` / `{"jitter": spec}`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WrapperConfig {
    Name(String),
    Flooding(FloodingField),
    Jitter(JitterField),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloodingField {
    pub flooding: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterField {
    pub jitter: JitterSpec,
}

impl WrapperConfig {
    /// Resolves to a concrete wrapper plus a short label for logs and
    /// reports. Labels never contain commas (they lead CSV rows).
    pub fn resolve(&self) -> CliResult<(LossWrapper, String)> {
        match self {
            WrapperConfig::Name(name) => match name.as_str() {
                "original" => Ok((LossWrapper::Original, name.clone())),
                "flooding" => {
                    let wrapper =
                        LossWrapper::flooding(DEFAULT_FLOODING_LEVEL).map_err(CliError::config)?;
                    Ok((wrapper, name.clone()))
                }
                _ if PRESET_NAMES.contains(&name.as_str()) => {
                    let spec = jitter_preset(name).map_err(CliError::config)?;
                    Ok((LossWrapper::jitter(spec), name.clone()))
                }
                other => Err(CliError::Config(format!(
                    "unknown wrapper '{other}'; expected original, flooding, \
                     {}, or an inline object",
                    PRESET_NAMES.join(", ")
                ))),
            },
            WrapperConfig::Flooding(f) => {
                let wrapper = LossWrapper::flooding(f.flooding).map_err(CliError::config)?;
                let label = sanitize_label(&wrapper.describe());
                Ok((wrapper, label))
            }
            WrapperConfig::Jitter(j) => {
                let spec = JitterSpec::new(j.jitter.kind, j.jitter.correction)
                    .map_err(CliError::config)?;
                let wrapper = LossWrapper::jitter(spec);
                let label = sanitize_label(&wrapper.describe());
                Ok((wrapper, label))
            }
        }
    }
}

fn sanitize_label(label: &str) -> String {
    label.replace(',', ";")
}

/// A run config resolved into the trainer's vocabulary, with identity.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub run_id: String,
    pub spec: RunSpec,
    pub dataset: DatasetConfig,
    pub output_dir: String,
}

/// Semantic portion of a run config: everything that shapes the results.
/// `output_dir` is deliberately excluded, so moving output does not change
/// a run's identity.
#[derive(Serialize)]
struct CanonicalConfig<'a> {
    dataset: &'a DatasetConfig,
    model: &'a ModelConfig,
    wrapper: &'a LossWrapper,
    optimizer: &'a OptimizerConfig,
    epochs: usize,
    seed: u64,
}

pub fn resolve_run(config: &RunConfig) -> CliResult<ResolvedRun> {
    validate_dataset(&config.dataset)?;
    if config.model.hidden.contains(&0) {
        return Err(CliError::Config(
            "model.hidden sizes must all be at least 1".into(),
        ));
    }
    let (wrapper, wrapper_label) = config.wrapper.resolve()?;
    let optimizer = config.optimizer.to_core();
    optimizer.validate().map_err(CliError::config)?;

    let canonical = CanonicalConfig {
        dataset: &config.dataset,
        model: &config.model,
        wrapper: &wrapper,
        optimizer: &optimizer,
        epochs: config.epochs,
        seed: config.seed,
    };
    let canonical_json = serde_json::to_string(&canonical)
        .map_err(|e| CliError::runtime(format!("cannot canonicalize config: {e}")))?;
    let run_id = digest16(&canonical_json);

    let dataset_summary = serde_json::to_string(&config.dataset)
        .map_err(|e| CliError::runtime(format!("cannot summarize dataset: {e}")))?;
    Ok(ResolvedRun {
        run_id,
        spec: RunSpec {
            hidden_layers: config.model.hidden.clone(),
            wrapper,
            wrapper_label,
            optimizer,
            epochs: config.epochs,
            seed: config.seed,
            dataset_summary,
        },
        dataset: config.dataset.clone(),
        output_dir: config.output_dir.clone(),
    })
}

fn validate_dataset(dataset: &DatasetConfig) -> CliResult<()> {
    match dataset {
        DatasetConfig::Synthetic {
            train_n,
            test_n,
            dim,
            classes,
            separation,
            train_label_noise,
            subset_n,
        } => {
            if *classes == 0 || *train_n < *classes || *test_n < *classes {
                return Err(CliError::Config(format!(
                    "synthetic dataset needs train_n and test_n >= classes >= 1, \
                     got train_n={train_n}, test_n={test_n}, classes={classes}"
                )));
            }
            if *dim < *classes {
                return Err(CliError::Config(format!(
                    "synthetic dataset needs dim >= classes, got dim={dim}, classes={classes}"
                )));
            }
            if !separation.is_finite() || *separation < 0.0 {
                return Err(CliError::Config(format!(
                    "separation must be finite and nonnegative, got {separation}"
                )));
            }
            if !(0.0..1.0).contains(train_label_noise) {
                return Err(CliError::Config(format!(
                    "train_label_noise must lie in [0, 1), got {train_label_noise}"
                )));
            }
            if let Some(n) = subset_n {
                if *n == 0 || n > train_n {
                    return Err(CliError::Config(format!(
                        "subset_n must lie in 1..={train_n}, got {n}"
                    )));
                }
            }
            Ok(())
        }
        DatasetConfig::Idx { subset_n, .. } => {
            if subset_n == &Some(0) {
                return Err(CliError::Config("subset_n must be at least 1".into()));
            }
            Ok(())
        }
    }
}

fn digest16(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_run_config(path: &Path) -> CliResult<RunConfig> {
    load_json(path)
}

pub fn load_sweep_config(path: &Path) -> CliResult<SweepConfig> {
    load_json(path)
}

/// Expands a sweep into per-run configs, wrapper-major so reports list
/// wrappers in the order the sweep declares them.
pub fn expand_sweep(sweep: &SweepConfig) -> CliResult<Vec<RunConfig>> {
    if sweep.wrappers.is_empty() || sweep.seeds.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one wrapper and one seed".into(),
        ));
    }
    let mut runs = Vec::with_capacity(sweep.wrappers.len() * sweep.seeds.len());
    for wrapper in &sweep.wrappers {
        for &seed in &sweep.seeds {
            runs.push(RunConfig {
                dataset: sweep.dataset.clone(),
                model: sweep.model.clone(),
                wrapper: wrapper.clone(),
                optimizer: sweep.optimizer.clone(),
                epochs: sweep.epochs,
                seed,
                output_dir: sweep.output_dir.clone(),
            });
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_config(wrapper: &str) -> String {
        format!(
            r#"{{
                "dataset": {{"kind": "synthetic", "train_n": 100, "test_n": 50,
                             "dim": 5, "classes": 3, "separation": 2.0,
                             "train_label_noise": 0.1}},
                "model": {{"hidden": [8]}},
                "wrapper": {wrapper},
                "epochs": 2,
                "seed": 7,
                "output_dir": "out"
            }}"#
        )
    }

    #[test]
    fn parses_a_minimal_config_with_default_optimizer() {
        let config: RunConfig = serde_json::from_str(&blob_config("\"original\"")).unwrap();
        assert_eq!(config.optimizer.batch_size, 128);
        assert_eq!(config.optimizer.momentum, 0.95);
        let resolved = resolve_run(&config).unwrap();
        assert_eq!(resolved.spec.wrapper_label, "original");
        assert_eq!(resolved.spec.wrapper, LossWrapper::Original);
        assert_eq!(resolved.run_id.len(), 16);
    }

    #[test]
    fn rejects_unknown_top_level_fields() {
        let text = blob_config("\"original\"").replace("\"epochs\"", "\"epoch_count\"");
        assert!(serde_json::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn bare_flooding_name_uses_the_default_level() {
        let config: RunConfig = serde_json::from_str(&blob_config("\"flooding\"")).unwrap();
        let resolved = resolve_run(&config).unwrap();
        assert_eq!(resolved.spec.wrapper, LossWrapper::flooding(0.02).unwrap());
        assert_eq!(resolved.spec.wrapper_label, "flooding");
    }

    #[test]
    fn inline_flooding_object_and_bare_name_share_a_run_id() {
        let a: RunConfig = serde_json::from_str(&blob_config("\"flooding\"")).unwrap();
        let b: RunConfig = serde_json::from_str(&blob_config("{\"flooding\": 0.02}")).unwrap();
        assert_eq!(
            resolve_run(&a).unwrap().run_id,
            resolve_run(&b).unwrap().run_id
        );
    }

    #[test]
    fn output_dir_does_not_affect_the_run_id() {
        let a: RunConfig = serde_json::from_str(&blob_config("\"jitter_3\"")).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(
            resolve_run(&a).unwrap().run_id,
            resolve_run(&b).unwrap().run_id
        );
    }

    #[test]
    fn seed_changes_the_run_id() {
        let a: RunConfig = serde_json::from_str(&blob_config("\"jitter_1\"")).unwrap();
        let mut b = a.clone();
        b.seed = 8;
        assert_ne!(
            resolve_run(&a).unwrap().run_id,
            resolve_run(&b).unwrap().run_id
        );
    }

    #[test]
    fn preset_names_resolve_and_unknown_names_fail() {
        for name in PRESET_NAMES {
            let config: RunConfig =
                serde_json::from_str(&blob_config(&format!("\"{name}\""))).unwrap();
            let resolved = resolve_run(&config).unwrap();
            assert_eq!(resolved.spec.wrapper_label, name);
        }
        let config: RunConfig = serde_json::from_str(&blob_config("\"jitter_9\"")).unwrap();
        let err = resolve_run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("jitter_9"));
    }

    #[test]
    fn inline_jitter_spec_resolves_with_a_comma_free_label() {
        let inline =
            r#"{"jitter": {"kind": {"uniform": {"lo": 0.0, "hi": 0.1}}, "correction": 1.0}}"#;
        let config: RunConfig = serde_json::from_str(&blob_config(inline)).unwrap();
        let resolved = resolve_run(&config).unwrap();
        assert!(!resolved.spec.wrapper_label.contains(','));
        assert!(resolved.spec.wrapper_label.starts_with("jitter"));
    }

    #[test]
    fn invalid_inline_jitter_spec_is_a_config_error() {
        let inline =
            r#"{"jitter": {"kind": {"uniform": {"lo": 0.2, "hi": 0.1}}, "correction": 1.0}}"#;
        let config: RunConfig = serde_json::from_str(&blob_config(inline)).unwrap();
        assert_eq!(resolve_run(&config).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn dataset_validation_rejects_bad_shapes() {
        let text = blob_config("\"original\"").replace("\"dim\": 5", "\"dim\": 2");
        let config: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(resolve_run(&config).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_expansion_is_wrapper_major() {
        let sweep: SweepConfig = serde_json::from_str(
            r#"{
                "dataset": {"kind": "synthetic", "train_n": 100, "test_n": 50,
                            "dim": 5, "classes": 3, "separation": 2.0,
                            "train_label_noise": 0.1},
                "model": {"hidden": [8]},
                "wrappers": ["original", "flooding"],
                "epochs": 1,
                "seeds": [0, 1, 2],
                "output_dir": "out"
            }"#,
        )
        .unwrap();
        let runs = expand_sweep(&sweep).unwrap();
        assert_eq!(runs.len(), 6);
        let labels: Vec<String> = runs
            .iter()
            .map(|r| resolve_run(r).unwrap().spec.wrapper_label)
            .collect();
        assert_eq!(labels[..3], ["original", "original", "original"]);
        assert_eq!(labels[3..], ["flooding", "flooding", "flooding"]);
        assert_eq!(runs[1].seed, 1);
    }
}
