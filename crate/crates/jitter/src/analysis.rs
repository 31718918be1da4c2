//! Executable checks of the wrapper mathematics and landscape claims,
//! plus cross-run comparison reports.
//!
//! The checks here are numerical, not symbolic: Monte Carlo estimates are
//! compared against closed forms, per-realization inequalities are asserted
//! over large draws, and curve-level claims (interval flipping, local
//! minima, double descent) run on sampled 1-D curves.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::jitter_transform;
use crate::rng::RngStream;
use crate::sampler::{effective_flooding_mc, JitterSpec, SpecKind};
use crate::train::{EpochMetrics, RunRecord};

/// A sampled 1-D curve on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl CurveSamples {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::ShapeMismatch {
                op: "CurveSamples::new",
                detail: format!("{} xs vs {} ys", xs.len(), ys.len()),
            });
        }
        if xs.is_empty() {
            return Err(Error::InvalidInput {
                context: "CurveSamples::new",
                detail: "empty curve".into(),
            });
        }
        if !xs.iter().all(|v| v.is_finite()) || !ys.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "CurveSamples::new",
            });
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput {
                context: "CurveSamples::new",
                detail: "xs must be strictly increasing".into(),
            });
        }
        Ok(CurveSamples { xs, ys })
    }

    /// Samples `f` on `n` evenly spaced points over `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput {
                context: "CurveSamples::from_fn",
                detail: format!("need n >= 2 and lo < hi, got n={n}, [{lo}, {hi}]"),
            });
        }
        let step = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        CurveSamples::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Outcome of a Theorem-style Monte Carlo check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Check {
    pub estimate: f64,
    pub closed_form: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Both sides of the mini-batch upper-bound inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Conditional MSE comparison between a raw risk estimator and its wrapped
/// version. Condition a collects realizations with `est < alpha < true`
/// (where wrapping provably helps); condition b collects `alpha <= est`
/// (where wrapping is a no-op). `None` fields mean the condition was empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub n_total: usize,
    pub n_condition_a: usize,
    pub n_condition_b: usize,
    pub mse_raw_a: Option<f64>,
    pub mse_wrapped_a: Option<f64>,
    pub max_abs_diff_b: Option<f64>,
}

/// Direction of one monotone phase of a smoothed series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Down,
    Up,
}

/// Smoothed series decomposition used for double-descent detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentPhases {
    pub smoothed: Vec<f64>,
    /// Extremum index ending each phase (one fewer than the phase count).
    pub turning_points: Vec<usize>,
    /// Alternating phase directions, in order.
    pub phase_signs: Vec<Phase>,
    /// True iff the phase pattern contains down-up-down.
    pub double_descent: bool,
}

/// One row of the cross-run report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub wrapper: String,
    pub seeds: usize,
    pub best_acc: f64,
    pub mean_acc: f64,
    /// Mean over seeds of the final-epoch raw training loss.
    pub final_raw_train_loss: f64,
}

/// The full report, serializable as CSV or aligned text.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

/// Default smoothing window for [`detect_double_descent`].
pub const DEFAULT_DESCENT_WINDOW: usize = 5;

/// Default turning-point amplitude: 2% of the series range.
pub fn default_min_drop(series: &[f64]) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in series {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    if min > max {
        0.0
    } else {
        0.02 * (max - min)
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * core::f64::consts::PI)
}

/// Closed-form effective flooding level `E[max(alpha, 0)]` of a spec.
///
/// For `Normal(mu, sigma)` scaled by `c` this is `m*Phi(m/s) + s*phi(m/s)`
/// with `m = c*mu`, `s = c*sigma` (so `c/sqrt(2 pi)` for a scaled standard
/// normal); specs with wholly nonnegative support reduce to their plain
/// mean.
pub fn effective_flooding_closed_form(spec: &JitterSpec) -> Result<f64> {
    let spec = JitterSpec::new(spec.kind, spec.correction)?;
    let c = spec.correction;
    Ok(match spec.kind {
        SpecKind::Normal { mu, sigma } => {
            let m = c * mu;
            let s = c * sigma;
            m * normal_cdf(m / s) + s * normal_pdf(m / s)
        }
        SpecKind::Uniform { lo, hi } => {
            let (lo, hi) = (c * lo, c * hi);
            if lo >= 0.0 {
                0.5 * (lo + hi)
            } else if hi <= 0.0 {
                0.0
            } else {
                hi * hi / (2.0 * (hi - lo))
            }
        }
        SpecKind::TruncGaussian { mu, sigma, lo, hi } => {
            if hi <= 0.0 {
                0.0
            } else {
                let a = (lo - mu) / sigma;
                let b = (hi - mu) / sigma;
                let cut = (lo.max(0.0) - mu) / sigma;
                let z = normal_cdf(b) - normal_cdf(a);
                c * (mu * (normal_cdf(b) - normal_cdf(cut))
                    + sigma * (normal_pdf(cut) - normal_pdf(b)))
                    / z
            }
        }
    })
}

/// Monte Carlo check that the sampled effective flooding level matches the
/// closed form within `tol`.
pub fn verify_theorem1(
    spec: &JitterSpec,
    n: usize,
    tol: f64,
    rng: &mut RngStream,
) -> Result<Theorem1Check> {
    if n < 10_000 {
        return Err(Error::InvalidInput {
            context: "verify_theorem1",
            detail: format!("need n >= 10000, got {n}"),
        });
    }
    let estimate = effective_flooding_mc(spec, n, rng)?;
    let closed_form = effective_flooding_closed_form(spec)?;
    Ok(Theorem1Check {
        estimate,
        closed_form,
        tol,
        pass: libm::fabs(estimate - closed_form) < tol,
    })
}

/// Checks the mini-batch upper bound: with `R` the mean of the per-batch
/// risks and `A` the mean of the levels, `|R - A| + A` must not exceed the
/// mean of the per-batch wrapped values `|R_m - a_m| + a_m` (plus `tol` for
/// rounding).
pub fn jensen_check(per_batch: &[(f64, f64)], tol: f64) -> Result<JensenCheck> {
    if per_batch.is_empty() {
        return Err(Error::InvalidInput {
            context: "jensen_check",
            detail: "need at least one batch".into(),
        });
    }
    let m = per_batch.len() as f64;
    let mean_r = per_batch.iter().map(|&(r, _)| r).sum::<f64>() / m;
    let mean_a = per_batch.iter().map(|&(_, a)| a).sum::<f64>() / m;
    let lhs = jitter_transform(mean_r, mean_a);
    let rhs = per_batch
        .iter()
        .map(|&(r, a)| jitter_transform(r, a))
        .sum::<f64>()
        / m;
    Ok(JensenCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + tol,
    })
}

/// The `(R_m, alpha_m)` pairs of one epoch, with absent levels read as 0
/// (which makes the wrap a no-op on nonnegative risks).
pub fn jensen_pairs(metrics: &EpochMetrics) -> Vec<(f64, f64)> {
    metrics
        .per_batch_risks
        .iter()
        .map(|r| (r.raw, r.alpha.unwrap_or(0.0)))
        .collect()
}

/// Draws `n` realizations of a Gaussian risk estimator around `true_risk`
/// (clipped at 0), wraps each at `alpha`, and reports squared errors on the
/// two provable regimes: strictly smaller wrapped MSE on condition a,
/// exactly zero error difference on condition b.
pub fn mse_experiment(
    true_risk: f64,
    estimator_std: f64,
    alpha: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<MseReport> {
    if !(true_risk.is_finite() && true_risk > 0.0) {
        return Err(Error::InvalidInput {
            context: "mse_experiment",
            detail: format!("true_risk must be positive, got {true_risk}"),
        });
    }
    if !(estimator_std.is_finite() && estimator_std > 0.0) {
        return Err(Error::InvalidInput {
            context: "mse_experiment",
            detail: format!("estimator_std must be positive, got {estimator_std}"),
        });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput {
            context: "mse_experiment",
            detail: "alpha must be finite".into(),
        });
    }
    if n < 100_000 {
        return Err(Error::InvalidInput {
            context: "mse_experiment",
            detail: format!("need n >= 100000, got {n}"),
        });
    }
    let mut n_a = 0usize;
    let mut n_b = 0usize;
    let mut sq_raw_a = 0.0;
    let mut sq_wrapped_a = 0.0;
    let mut max_diff_b: Option<f64> = None;
    for _ in 0..n {
        let mut est = rng.normal(true_risk, estimator_std);
        if est < 0.0 {
            est = 0.0;
        }
        let wrapped = jitter_transform(est, alpha);
        if est < alpha && alpha < true_risk {
            n_a += 1;
            sq_raw_a += (est - true_risk) * (est - true_risk);
            sq_wrapped_a += (wrapped - true_risk) * (wrapped - true_risk);
        } else if alpha <= est {
            n_b += 1;
            let diff = libm::fabs(libm::fabs(wrapped - true_risk) - libm::fabs(est - true_risk));
            max_diff_b = Some(match max_diff_b {
                Some(m) if m >= diff => m,
                _ => diff,
            });
        }
    }
    Ok(MseReport {
        n_total: n,
        n_condition_a: n_a,
        n_condition_b: n_b,
        mse_raw_a: (n_a > 0).then(|| sq_raw_a / n_a as f64),
        mse_wrapped_a: (n_a > 0).then(|| sq_wrapped_a / n_a as f64),
        max_abs_diff_b: max_diff_b,
    })
}

/// Applies the wrapper fold `|y - level| + level` to every sample.
pub fn flip_curve(curve: &CurveSamples, level: f64) -> CurveSamples {
    debug_assert!(level.is_finite());
    CurveSamples {
        xs: curve.xs.clone(),
        ys: curve
            .ys
            .iter()
            .map(|&y| jitter_transform(y, level))
            .collect(),
    }
}

fn plateau_runs(ys: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..ys.len() {
        if libm::fabs(ys[i] - ys[i - 1]) > tol {
            runs.push((start, i - 1));
            start = i;
        }
    }
    runs.push((start, ys.len() - 1));
    runs
}

/// Indices of local minima (one representative per plateau): a maximal run
/// of equal-within-`tol` values counts when every existing neighbour is
/// higher and the run touches at least one interior index. The
/// representative is the smallest value in the run (first on ties).
pub fn local_minima(curve: &CurveSamples, tol: f64) -> Result<Vec<usize>> {
    if curve.len() < 3 {
        return Err(Error::InvalidInput {
            context: "local_minima",
            detail: format!("need at least 3 samples, got {}", curve.len()),
        });
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidInput {
            context: "local_minima",
            detail: format!("tol must be nonnegative, got {tol}"),
        });
    }
    let ys = curve.ys();
    let n = ys.len();
    let mut minima = Vec::new();
    for (s, e) in plateau_runs(ys, tol) {
        let left_higher = s == 0 || ys[s - 1] > ys[s] + tol;
        let right_higher = e == n - 1 || ys[e + 1] > ys[e] + tol;
        let touches_interior = e >= 1 && s <= n - 2;
        if left_higher && right_higher && touches_interior {
            let mut best = s;
            for i in s..=e {
                if ys[i] < ys[best] {
                    best = i;
                }
            }
            minima.push(best);
        }
    }
    Ok(minima)
}

/// Number of local minima after plateau merging; see [`local_minima`].
pub fn count_local_minima(curve: &CurveSamples, tol: f64) -> Result<usize> {
    Ok(local_minima(curve, tol)?.len())
}

/// Smooths `test_losses` with a centered moving average (window truncated
/// at the edges), then splits the smoothed series into monotone phases
/// whose amplitude reaches `min_drop`. The double-descent flag is raised
/// iff the phases contain a down-up-down pattern.
pub fn detect_double_descent(
    test_losses: &[f64],
    window: usize,
    min_drop: f64,
) -> Result<DescentPhases> {
    if window == 0 {
        return Err(Error::InvalidInput {
            context: "detect_double_descent",
            detail: "window must be at least 1".into(),
        });
    }
    if test_losses.len() < 3 * window {
        return Err(Error::InvalidInput {
            context: "detect_double_descent",
            detail: format!(
                "need at least {} samples for window {window}, got {}",
                3 * window,
                test_losses.len()
            ),
        });
    }
    if !(min_drop.is_finite() && min_drop >= 0.0) {
        return Err(Error::InvalidInput {
            context: "detect_double_descent",
            detail: format!("min_drop must be nonnegative, got {min_drop}"),
        });
    }
    if !test_losses.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "detect_double_descent",
        });
    }

    let n = test_losses.len();
    let half = window / 2;
    let mut smoothed = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let sum: f64 = test_losses[lo..=hi].iter().sum();
        smoothed.push(sum / (hi - lo + 1) as f64);
    }

    let mut turning_points = Vec::new();
    let mut phase_signs = Vec::new();
    let mut dir: Option<Phase> = None;
    // While the direction is unknown, track both running extremes; an
    // actual move of at least min_drop away from one commits the first
    // phase. Strict movement is required so min_drop = 0 still ignores
    // perfectly flat stretches.
    let mut run_min = smoothed[0];
    let mut run_max = smoothed[0];
    let (mut ext, mut ext_i) = (smoothed[0], 0usize);
    for (i, &v) in smoothed.iter().enumerate().skip(1) {
        match dir {
            None => {
                if v > run_max {
                    run_max = v;
                }
                if v < run_min {
                    run_min = v;
                }
                if v < run_max && run_max - v >= min_drop {
                    dir = Some(Phase::Down);
                    ext = v;
                    ext_i = i;
                } else if v > run_min && v - run_min >= min_drop {
                    dir = Some(Phase::Up);
                    ext = v;
                    ext_i = i;
                }
            }
            Some(Phase::Down) => {
                if v < ext {
                    ext = v;
                    ext_i = i;
                } else if v > ext && v - ext >= min_drop {
                    turning_points.push(ext_i);
                    phase_signs.push(Phase::Down);
                    dir = Some(Phase::Up);
                    ext = v;
                    ext_i = i;
                }
            }
            Some(Phase::Up) => {
                if v > ext {
                    ext = v;
                    ext_i = i;
                } else if v < ext && ext - v >= min_drop {
                    turning_points.push(ext_i);
                    phase_signs.push(Phase::Up);
                    dir = Some(Phase::Down);
                    ext = v;
                    ext_i = i;
                }
            }
        }
    }
    if let Some(d) = dir {
        phase_signs.push(d);
    }
    let double_descent = phase_signs
        .windows(3)
        .any(|w| w == [Phase::Down, Phase::Up, Phase::Down]);
    Ok(DescentPhases {
        smoothed,
        turning_points,
        phase_signs,
        double_descent,
    })
}

/// Nine-significant-digit float formatting shared by reports and run logs.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

impl ReportTable {
    /// CSV with header `wrapper,seeds,best_acc,mean_acc,final_raw_train_loss`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wrapper,seeds,best_acc,mean_acc,final_raw_train_loss\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.wrapper,
                row.seeds,
                format_float(row.best_acc),
                format_float(row.mean_acc),
                format_float(row.final_raw_train_loss)
            ));
        }
        out
    }

    /// Aligned plain-text rendering of the same table.
    pub fn to_text(&self) -> String {
        let mut name_width = "wrapper".len();
        for row in &self.rows {
            name_width = name_width.max(row.wrapper.len());
        }
        let mut out = format!(
            "{:<name_width$}  {:>5}  {:>15}  {:>15}  {:>20}\n",
            "wrapper", "seeds", "best_acc", "mean_acc", "final_raw_train_loss"
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{:<name_width$}  {:>5}  {:>15}  {:>15}  {:>20}\n",
                row.wrapper,
                row.seeds,
                format_float(row.best_acc),
                format_float(row.mean_acc),
                format_float(row.final_raw_train_loss)
            ));
        }
        out
    }
}

/// Aggregates finished runs into a per-wrapper table: best and mean
/// final-epoch test accuracy across seeds, plus the mean final-epoch raw
/// training loss. All records must share the non-wrapper configuration.
pub fn compare_runs(records: &[RunRecord]) -> Result<ReportTable> {
    if records.is_empty() {
        return Err(Error::InvalidInput {
            context: "compare_runs",
            detail: "no records".into(),
        });
    }
    let first = &records[0].spec;
    for r in records {
        if r.metrics.is_empty() {
            return Err(Error::InvalidInput {
                context: "compare_runs",
                detail: format!("run '{}' has no epochs", r.spec.wrapper_label),
            });
        }
        let s = &r.spec;
        if s.hidden_layers != first.hidden_layers
            || s.optimizer != first.optimizer
            || s.epochs != first.epochs
            || s.dataset_summary != first.dataset_summary
        {
            return Err(Error::InconsistentConfigs {
                detail: format!(
                    "'{}' differs from '{}' outside the wrapper/seed",
                    s.wrapper_label, first.wrapper_label
                ),
            });
        }
    }
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.spec.wrapper_label.as_str()) {
            order.push(&r.spec.wrapper_label);
        }
    }
    let mut rows = Vec::with_capacity(order.len());
    for label in order {
        let group: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.spec.wrapper_label == label)
            .collect();
        let finals: Vec<&EpochMetrics> = group.iter().map(|r| r.metrics.last().unwrap()).collect();
        let mut best = f64::NEG_INFINITY;
        let mut acc_sum = 0.0;
        let mut loss_sum = 0.0;
        for em in &finals {
            if em.test_accuracy > best {
                best = em.test_accuracy;
            }
            acc_sum += em.test_accuracy;
            loss_sum += em.raw_train_loss;
        }
        rows.push(ReportRow {
            wrapper: String::from(label),
            seeds: group.len(),
            best_acc: best,
            mean_acc: acc_sum / group.len() as f64,
            final_raw_train_loss: loss_sum / group.len() as f64,
        });
    }
    Ok(ReportTable { rows })
}
