//! Cross-run comparison reports: reads run-record echoes, aggregates them
//! per wrapper, audits the mini-batch upper bound over every logged epoch,
//! and writes the report as CSV and aligned text.

use std::fs;
use std::path::Path;

use jitter::analysis::{compare_runs, jensen_check, jensen_pairs};
use jitter::train::RunRecord;

use crate::error::{CliError, CliResult};

pub const JENSEN_TOL: f64 = 1e-12;

/// Epochs checked and violations found across all records.
pub struct JensenAudit {
    pub epochs: usize,
    pub violations: usize,
}

pub fn jensen_audit(records: &[RunRecord]) -> JensenAudit {
    let mut epochs = 0;
    let mut violations = 0;
    for record in records {
        for metrics in &record.metrics {
            let pairs = jensen_pairs(metrics);
            if pairs.is_empty() {
                continue;
            }
            epochs += 1;
            match jensen_check(&pairs, JENSEN_TOL) {
                Ok(check) if check.pass => {}
                _ => violations += 1,
            }
        }
    }
    JensenAudit { epochs, violations }
}

fn audit_line(audit: &JensenAudit, runs: usize) -> String {
    format!(
        "batch-mean upper bound: {} epochs across {} runs, {} violations (tol {JENSEN_TOL:e})",
        audit.epochs, runs, audit.violations
    )
}

/// Renders `(report_csv, report_txt)`. Failure notes are appended to the
/// text report so partial sweeps still say what is missing.
pub fn render(records: &[RunRecord], failures: &[String]) -> CliResult<(String, String)> {
    let mut txt = String::new();
    let csv = if records.is_empty() {
        txt.push_str("no completed runs\n");
        String::new()
    } else {
        let table = compare_runs(records).map_err(CliError::config)?;
        txt.push_str(&table.to_text());
        txt.push('\n');
        txt.push_str(&audit_line(&jensen_audit(records), records.len()));
        txt.push('\n');
        table.to_csv()
    };
    for failure in failures {
        txt.push_str(&format!("failed: {failure}\n"));
    }
    Ok((csv, txt))
}

pub fn write_report(dir: &Path, csv: &str, txt: &str) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    fs::write(dir.join("report.csv"), csv)
        .map_err(|e| CliError::runtime(format!("cannot write report.csv: {e}")))?;
    fs::write(dir.join("report.txt"), txt)
        .map_err(|e| CliError::runtime(format!("cannot write report.txt: {e}")))?;
    Ok(())
}

/// Sorts wrappers into the conventional presentation order; unknown labels
/// come last, alphabetically.
fn label_rank(label: &str) -> (u8, String) {
    let rank = match label {
        "original" => 0,
        "flooding" => 1,
        "jitter_1" => 2,
        "jitter_2" => 3,
        "jitter_3" => 4,
        "jitter_4" => 5,
        "jitter_5" => 6,
        "jitter_s" => 7,
        _ => 8,
    };
    (rank, label.to_string())
}

/// Loads every `*.json` run record in a directory, ordered by wrapper then
/// seed so reports come out in a stable, conventional order.
pub fn read_records(dir: &Path) -> CliResult<Vec<RunRecord>> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut records = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let record: RunRecord = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        records.push(record);
    }
    records.sort_by(|a, b| {
        label_rank(&a.spec.wrapper_label)
            .cmp(&label_rank(&b.spec.wrapper_label))
            .then(a.spec.seed.cmp(&b.spec.seed))
    });
    Ok(records)
}

/// The `report` subcommand: aggregate a directory of run records.
pub fn run(dir: &Path, out: Option<&Path>) -> CliResult<()> {
    let records = read_records(dir)?;
    if records.is_empty() {
        return Err(CliError::Config(format!(
            "no run records (*.json) found in {}",
            dir.display()
        )));
    }
    let (csv, txt) = render(&records, &[])?;
    write_report(out.unwrap_or(dir), &csv, &txt)?;
    print!("{txt}");
    Ok(())
}
