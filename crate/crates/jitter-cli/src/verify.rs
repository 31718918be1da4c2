//! Verification suites: Monte Carlo checks of the effective flooding value,
//! the wrapped-loss dominance and estimator-error properties, and the
//! mini-batch upper bound. Each check prints one line; a suite passes only
//! if every line does.

use std::thread;

use jitter::analysis::{effective_flooding_closed_form, jensen_check, mse_experiment};
use jitter::loss::{grad_sign, jitter_transform};
use jitter::rng::{streams, RngStream};
use jitter::sampler::{effective_flooding_mc, jitter_preset, JitterSpec, PRESET_NAMES};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Theorem1,
    Theorem2,
    Jensen,
    All,
}

/// Fixed shard count so estimates depend only on the seed, never on the
/// machine's parallelism.
pub const MC_SHARDS: usize = 8;

/// Per-preset tolerance at n = 10^6, about four to five standard errors of
/// the positive-part estimator; scaled by sqrt(10^6 / n) for other n.
const THEOREM1_TOLERANCES: [(&str, f64); 6] = [
    ("jitter_1", 6e-5),
    ("jitter_2", 3e-5),
    ("jitter_3", 4.5e-5),
    ("jitter_4", 2.5e-5),
    ("jitter_5", 2e-4),
    ("jitter_s", 2e-3),
];

pub fn theorem1_tolerance(preset: &str, n: usize) -> Option<f64> {
    let base = THEOREM1_TOLERANCES
        .iter()
        .find(|(name, _)| *name == preset)
        .map(|(_, tol)| *tol)?;
    Some(base * (1_000_000.0 / n as f64).sqrt())
}

/// Monte Carlo estimate of E[max(alpha, 0)] sharded over a fixed number of
/// worker streams and combined by exact sample-count weighting.
pub fn sharded_effective_flooding(spec: &JitterSpec, n: usize, seed: u64) -> CliResult<f64> {
    if n < MC_SHARDS {
        return Err(CliError::Config(format!("need n >= {MC_SHARDS}, got {n}")));
    }
    let base = n / MC_SHARDS;
    let mut counts = [base; MC_SHARDS];
    counts[MC_SHARDS - 1] += n % MC_SHARDS;

    let means = thread::scope(|scope| {
        let handles: Vec<_> = counts
            .iter()
            .enumerate()
            .map(|(i, &count)| {
                scope.spawn(move || {
                    let mut rng = RngStream::new(seed, streams::MC_BASE + i as u64);
                    effective_flooding_mc(spec, count, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("monte carlo shard panicked"))
            .collect::<Result<Vec<f64>, _>>()
    })
    .map_err(CliError::runtime)?;

    let total: f64 = means
        .iter()
        .zip(counts)
        .map(|(mean, count)| mean * count as f64)
        .sum();
    Ok(total / n as f64)
}

fn check_line(suite: &str, name: &str, detail: &str, pass: bool) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{suite} {name}: {detail} {verdict}");
    pass
}

/// Theorem-style check of the effective flooding value for every preset.
pub fn run_theorem1(n: usize, seed: u64) -> CliResult<bool> {
    if n < 10_000 {
        return Err(CliError::Config(format!(
            "theorem1 needs n >= 10000, got {n}"
        )));
    }
    let mut all = true;
    for name in PRESET_NAMES {
        let spec = jitter_preset(name).map_err(CliError::config)?;
        let closed = effective_flooding_closed_form(&spec).map_err(CliError::runtime)?;
        let estimate = sharded_effective_flooding(&spec, n, seed)?;
        let tol = theorem1_tolerance(name, n).expect("preset has a pinned tolerance");
        let pass = (estimate - closed).abs() < tol;
        all &= check_line(
            "theorem1",
            name,
            &format!("estimate {estimate:.6e} closed {closed:.6e} tol {tol:.1e}"),
            pass,
        );
    }
    Ok(all)
}

/// Dominance, the negative-level no-op, and the estimator-error comparison.
pub fn run_theorem2(n: usize, seed: u64) -> CliResult<bool> {
    let mut all = true;
    let mut rng = RngStream::new(seed, streams::MC_BASE);

    let mut counterexamples = 0usize;
    for _ in 0..100_000 {
        let loss = rng.uniform(0.0, 10.0);
        let alpha = rng.uniform(-5.0, 5.0);
        let wrapped = jitter_transform(loss, alpha);
        let dominated = wrapped >= loss;
        let equality_ok = (wrapped == loss) == (loss >= alpha);
        if !(dominated && equality_ok) {
            counterexamples += 1;
        }
    }
    all &= check_line(
        "theorem2",
        "dominance",
        &format!("100000 pairs, {counterexamples} counterexamples"),
        counterexamples == 0,
    );

    let mut bit_mismatches = 0usize;
    for _ in 0..10_000 {
        let loss = rng.uniform(0.0, 10.0);
        let alpha = -rng.uniform(0.0, 5.0);
        if jitter_transform(loss, alpha).to_bits() != loss.to_bits() {
            bit_mismatches += 1;
        }
        if grad_sign(loss, alpha) != 1.0 {
            bit_mismatches += 1;
        }
    }
    all &= check_line(
        "theorem2",
        "negative-level no-op",
        &format!("10000 pairs, {bit_mismatches} bit mismatches"),
        bit_mismatches == 0,
    );

    let mut mse_rng = RngStream::new(seed, streams::MC_BASE + 1);
    let report =
        mse_experiment(0.5, 0.2, 0.3, n.max(100_000), &mut mse_rng).map_err(CliError::config)?;
    let shrink_pass = match (report.mse_wrapped_a, report.mse_raw_a) {
        (Some(wrapped), Some(raw)) => wrapped < raw,
        _ => false,
    };
    all &= check_line(
        "theorem2",
        "estimator error shrinks",
        &format!(
            "condition-a n {} mse wrapped {} raw {}",
            report.n_condition_a,
            option_sci(report.mse_wrapped_a),
            option_sci(report.mse_raw_a)
        ),
        shrink_pass,
    );
    let diff_pass = report.max_abs_diff_b == Some(0.0);
    all &= check_line(
        "theorem2",
        "error preserved at or above the level",
        &format!(
            "condition-b n {} max |difference| {}",
            report.n_condition_b,
            option_sci(report.max_abs_diff_b)
        ),
        diff_pass,
    );
    Ok(all)
}

fn option_sci(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.3e}"),
        None => "none".into(),
    }
}

/// The mini-batch upper bound on fixed fixtures and a seeded random battery.
pub fn run_jensen(seed: u64) -> CliResult<bool> {
    const TOL: f64 = 1e-12;
    let mut all = true;

    let fixtures: [(&str, Vec<(f64, f64)>); 4] = [
        ("two batches", vec![(0.01, 0.02), (0.03, 0.02)]),
        ("single batch", vec![(0.7, 0.3)]),
        ("equal batches", vec![(0.5, 0.1); 4]),
        (
            "mixed signs",
            vec![(0.4, -0.2), (0.9, 0.5), (0.05, 0.0), (0.2, 0.21)],
        ),
    ];
    for (name, pairs) in &fixtures {
        let check = jensen_check(pairs, TOL).map_err(CliError::runtime)?;
        all &= check_line(
            "jensen",
            name,
            &format!("lhs {:.6e} rhs {:.6e}", check.lhs, check.rhs),
            check.pass,
        );
    }

    let mut rng = RngStream::new(seed, streams::MC_BASE);
    let mut failures = 0usize;
    for _ in 0..1_000 {
        let m = 1 + rng.u64_below(40) as usize;
        let pairs: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.uniform(0.0, 3.0), rng.uniform(-1.0, 1.0)))
            .collect();
        let check = jensen_check(&pairs, TOL).map_err(CliError::runtime)?;
        if !check.pass {
            failures += 1;
        }
    }
    all &= check_line(
        "jensen",
        "random batch lists",
        &format!("1000 lists, {failures} violations"),
        failures == 0,
    );
    Ok(all)
}

/// Runs the requested suite(s); `Ok(())` only when every check passed.
pub fn run_suite(suite: Suite, n: usize, seed: u64) -> CliResult<()> {
    let pass = match suite {
        Suite::Theorem1 => run_theorem1(n, seed)?,
        Suite::Theorem2 => run_theorem2(n, seed)?,
        Suite::Jensen => run_jensen(seed)?,
        Suite::All => {
            let t1 = run_theorem1(n, seed)?;
            let t2 = run_theorem2(n, seed)?;
            let j = run_jensen(seed)?;
            t1 && t2 && j
        }
    };
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("one or more checks failed".into()))
    }
}
