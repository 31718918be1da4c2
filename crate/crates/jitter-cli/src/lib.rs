//! Library behind the `jitter` binary: config loading and run identity,
//! dataset materialization, run execution with CSV logging, verification
//! suites, landscape analysis, sweeps, and report generation.
//!
//! Everything here is deterministic given the configs: all randomness flows
//! from config seeds through fixed stream ids, and no code path consults
//! the clock or OS entropy for anything except the reported wall-clock
//! durations.

pub mod config;
pub mod csv_log;
pub mod error;
pub mod landscape;
pub mod report;
pub mod runner;
pub mod sweep;
pub mod verify;
