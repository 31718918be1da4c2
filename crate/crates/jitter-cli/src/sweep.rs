//! Sweep execution: the cross product of wrappers and seeds, one isolated
//! run per worker, followed by report generation over the survivors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use jitter::train::RunRecord;

use crate::config::{expand_sweep, load_sweep_config, resolve_run, ResolvedRun};
use crate::error::{CliError, CliResult};
use crate::{report, runner};

/// Runs every resolved config, `workers` at a time, returning per-run
/// results in input order. Each run owns its streams and output files, so
/// scheduling cannot affect any run's bytes.
pub fn execute_all(
    resolved: &[ResolvedRun],
    output_dir: &Path,
    workers: usize,
) -> Vec<CliResult<RunRecord>> {
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<CliResult<RunRecord>>>> =
        resolved.iter().map(|_| Mutex::new(None)).collect();

    thread::scope(|scope| {
        for _ in 0..workers.max(1).min(resolved.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                let Some(run) = resolved.get(index) else {
                    break;
                };
                let result = runner::execute(run, output_dir);
                if let Ok(record) = &result {
                    println!(
                        "run {} ({}, seed {}) finished in {:.1}s",
                        run.run_id, run.spec.wrapper_label, run.spec.seed, record.duration_seconds
                    );
                }
                *results[index].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });

    results
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("worker exited without storing a result")
        })
        .collect()
}

pub fn run(config_path: &Path, out_override: Option<&Path>) -> CliResult<()> {
    let sweep = load_sweep_config(config_path)?;
    let configs = expand_sweep(&sweep)?;
    let resolved: Vec<ResolvedRun> = configs
        .iter()
        .map(resolve_run)
        .collect::<CliResult<Vec<_>>>()?;

    let mut seen = HashSet::new();
    for run in &resolved {
        if !seen.insert(run.run_id.clone()) {
            return Err(CliError::Config(format!(
                "duplicate run in sweep: wrapper '{}' seed {} appears twice",
                run.spec.wrapper_label, run.spec.seed
            )));
        }
    }

    let output_dir: PathBuf = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&sweep.output_dir));
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    println!(
        "sweep: {} runs ({} wrappers x {} seeds), up to {} at a time",
        resolved.len(),
        sweep.wrappers.len(),
        sweep.seeds.len(),
        workers.min(resolved.len())
    );

    let results = execute_all(&resolved, &output_dir, workers);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (run, result) in resolved.iter().zip(results) {
        match result {
            Ok(record) => records.push(record),
            Err(e) => failures.push(format!(
                "wrapper={} seed={}: {e}",
                run.spec.wrapper_label, run.spec.seed
            )),
        }
    }

    let (csv, txt) = report::render(&records, &failures)?;
    report::write_report(&output_dir, &csv, &txt)?;
    print!("{txt}");

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} of {} runs failed",
            failures.len(),
            resolved.len()
        )))
    }
}
