//! Materializes datasets from config and executes single runs: training,
//! CSV logging, and the JSON run-record echo.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use jitter::data::{subset, synthetic_blobs, Dataset};
use jitter::rng::{streams, RngStream};
use jitter::train::{run_experiment, RunRecord};

use crate::config::{DatasetConfig, ResolvedRun};
use crate::csv_log::RunCsv;
use crate::error::{CliError, CliResult};

/// Loads an IDX image/label file pair into a dataset.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> CliResult<Dataset> {
    let images = fs::read(images_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", images_path.display())))?;
    let labels = fs::read(labels_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", labels_path.display())))?;
    jitter::data::dataset_from_idx(&images, &labels).map_err(|e| {
        CliError::Config(format!(
            "{} / {}: {e}",
            images_path.display(),
            labels_path.display()
        ))
    })
}

/// Builds the train and test splits a resolved run describes. Synthetic
/// data flows from the run seed's data stream; the test split is generated
/// after the train split and without label noise.
pub fn materialize(dataset: &DatasetConfig, seed: u64) -> CliResult<(Dataset, Dataset)> {
    let mut rng = RngStream::new(seed, streams::DATA);
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
            let train = synthetic_blobs(
                *train_n,
                *dim,
                *classes,
                *separation,
                *train_label_noise,
                &mut rng,
            )
            .map_err(CliError::config)?;
            let test = synthetic_blobs(*test_n, *dim, *classes, *separation, 0.0, &mut rng)
                .map_err(CliError::config)?;
            let train = match subset_n {
                Some(n) => subset(&train, *n, &mut rng).map_err(CliError::config)?,
                None => train,
            };
            Ok((train, test))
        }
        DatasetConfig::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
            subset_n,
        } => {
            let train = load_idx(Path::new(train_images), Path::new(train_labels))?;
            let test = load_idx(Path::new(test_images), Path::new(test_labels))?;
            let classes = train.num_classes().max(test.num_classes());
            let train = widen_classes(train, classes)?;
            let test = widen_classes(test, classes)?;
            let train = match subset_n {
                Some(n) => subset(&train, *n, &mut rng).map_err(CliError::config)?,
                None => train,
            };
            Ok((train, test))
        }
    }
}

/// Rebuilds a dataset with a larger class count so train and test splits
/// agree even when one file happens to miss the top label.
fn widen_classes(dataset: Dataset, num_classes: usize) -> CliResult<Dataset> {
    if dataset.num_classes() == num_classes {
        return Ok(dataset);
    }
    Dataset::new(
        dataset.features().clone(),
        dataset.labels().to_vec(),
        num_classes,
    )
    .map_err(CliError::config)
}

/// Artifact paths for one run.
pub struct RunPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn run_paths(output_dir: &Path, run_id: &str) -> RunPaths {
    RunPaths {
        csv: output_dir.join(format!("{run_id}.csv")),
        json: output_dir.join(format!("{run_id}.json")),
    }
}

/// Trains one resolved run: writes `<output_dir>/<run_id>.csv` row by row
/// and a `<run_id>.json` run-record echo at the end, and returns the record
/// with the measured duration filled in.
pub fn execute(resolved: &ResolvedRun, output_dir: &Path) -> CliResult<RunRecord> {
    let (train, test) = materialize(&resolved.dataset, resolved.spec.seed)?;
    fs::create_dir_all(output_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", output_dir.display())))?;
    let paths = run_paths(output_dir, &resolved.run_id);
    let mut csv = RunCsv::create(&paths.csv, &resolved.run_id, resolved.spec.seed)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", paths.csv.display())))?;

    let started = Instant::now();
    let outcome = run_experiment(&resolved.spec, &train, &test, |m| csv.log_epoch(m))
        .map_err(CliError::runtime)?;
    let mut record = outcome.record;
    record.duration_seconds = started.elapsed().as_secs_f64();

    csv.finish()
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", paths.csv.display())))?;
    let echo = serde_json::to_string(&record)
        .map_err(|e| CliError::runtime(format!("cannot serialize run record: {e}")))?;
    fs::write(&paths.json, echo)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", paths.json.display())))?;
    Ok(record)
}
