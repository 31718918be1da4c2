//! Per-run CSV log: one row per epoch, flushed as soon as it is written so
//! interrupted runs still leave a valid file.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use jitter::analysis::format_float;
use jitter::train::EpochMetrics;

pub const RUN_CSV_HEADER: &str = "run_id,seed,epoch,raw_train_loss,wrapped_train_loss,\
test_loss,test_accuracy,alpha_mean,alpha_min,alpha_max";

pub struct RunCsv {
    out: BufWriter<File>,
    run_id: String,
    seed: u64,
    error: Option<io::Error>,
}

impl RunCsv {
    pub fn create(path: &Path, run_id: &str, seed: u64) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{RUN_CSV_HEADER}")?;
        out.flush()?;
        Ok(RunCsv {
            out,
            run_id: run_id.to_string(),
            seed,
            error: None,
        })
    }

    /// Appends one epoch row. I/O failures are remembered (first one wins)
    /// instead of panicking inside the training callback.
    pub fn log_epoch(&mut self, m: &EpochMetrics) {
        if self.error.is_some() {
            return;
        }
        let row = epoch_row(&self.run_id, self.seed, m);
        let result = writeln!(self.out, "{row}").and_then(|()| self.out.flush());
        if let Err(e) = result {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()
    }
}

fn epoch_row(run_id: &str, seed: u64, m: &EpochMetrics) -> String {
    let (alpha_mean, alpha_min, alpha_max) = match &m.alpha_stats {
        Some(stats) => (
            format_float(stats.mean),
            format_float(stats.min),
            format_float(stats.max),
        ),
        None => (String::new(), String::new(), String::new()),
    };
    format!(
        "{run_id},{seed},{epoch},{raw},{wrapped},{test_loss},{test_acc},{alpha_mean},{alpha_min},{alpha_max}",
        epoch = m.epoch,
        raw = format_float(m.raw_train_loss),
        wrapped = format_float(m.wrapped_train_loss),
        test_loss = format_float(m.test_loss),
        test_acc = format_float(m.test_accuracy),
    )
}
