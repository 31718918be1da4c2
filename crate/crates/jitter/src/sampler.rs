//! Jitter distributions and Monte Carlo estimates of their behaviour.
//!
//! A [`JitterSpec`] pairs a base distribution with a positive `correction`
//! factor; a draw is `correction * x` with `x` from the base distribution.
//! Six named presets cover the configurations used throughout the project:
//!
//! | name       | base distribution                          | correction |
//! |------------|--------------------------------------------|------------|
//! | `jitter_1` | Uniform(0, 0.04)                           | 1.0        |
//! | `jitter_2` | Uniform(0.01, 0.03)                        | 1.0        |
//! | `jitter_3` | Normal(0.02, 0.01) truncated to [0, 0.04]  | 1.0        |
//! | `jitter_4` | Normal(0.02, 0.005) truncated to [0.01, 0.03] | 1.0     |
//! | `jitter_5` | Normal(0, 1)                               | 0.1        |
//! | `jitter_s` | Normal(0, 1)                               | 1.0        |
//!
//! The "effective flooding level" of a spec is `E[max(alpha, 0)]`, the fixed
//! flooding constant whose long-run pull matches the jittered objective;
//! [`effective_flooding_mc`] estimates it by simple Monte Carlo.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Base distribution of a jitter draw.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpecKind {
    /// Uniform on `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// Normal with mean `mu` and deviation `sigma`, rejection-truncated to
    /// `[lo, hi]`.
    TruncGaussian {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
    },
    /// Normal with mean `mu` and deviation `sigma`.
    Normal { mu: f64, sigma: f64 },
}

/// A jitter distribution: a base kind scaled by a positive correction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JitterSpec {
    pub kind: SpecKind,
    pub correction: f64,
}

/// First and second moment summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Population standard deviation (divisor `n`).
    pub std: f64,
}

/// The published preset names, in order.
pub const PRESET_NAMES: [&str; 6] = [
    "jitter_1", "jitter_2", "jitter_3", "jitter_4", "jitter_5", "jitter_s",
];

/// Attempts allowed per truncated-Gaussian draw before giving up.
const TRUNCATION_ATTEMPT_CAP: usize = 10_000;

impl JitterSpec {
    /// Validates and wraps a kind with the given correction factor.
    pub fn new(kind: SpecKind, correction: f64) -> Result<Self> {
        if !(correction.is_finite() && correction > 0.0) {
            return Err(Error::InvalidInput {
                context: "JitterSpec::new",
                detail: format!("correction must be finite and positive, got {correction}"),
            });
        }
        match kind {
            SpecKind::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidInput {
                        context: "JitterSpec::new",
                        detail: format!("uniform needs finite lo < hi, got [{lo}, {hi})"),
                    });
                }
            }
            SpecKind::TruncGaussian { mu, sigma, lo, hi } => {
                if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidInput {
                        context: "JitterSpec::new",
                        detail: format!("truncated Gaussian needs sigma > 0, got {sigma}"),
                    });
                }
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidInput {
                        context: "JitterSpec::new",
                        detail: format!("truncation needs finite lo < hi, got [{lo}, {hi}]"),
                    });
                }
            }
            SpecKind::Normal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidInput {
                        context: "JitterSpec::new",
                        detail: format!("normal needs sigma > 0, got {sigma}"),
                    });
                }
            }
        }
        Ok(JitterSpec { kind, correction })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        JitterSpec::new(SpecKind::Uniform { lo, hi }, 1.0)
    }

    pub fn trunc_gaussian(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        JitterSpec::new(SpecKind::TruncGaussian { mu, sigma, lo, hi }, 1.0)
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        JitterSpec::new(SpecKind::Normal { mu, sigma }, 1.0)
    }

    /// Replaces the correction factor, revalidating.
    pub fn with_correction(self, correction: f64) -> Result<Self> {
        JitterSpec::new(self.kind, correction)
    }

    /// A short human-readable description, e.g. for run labels.
    pub fn describe(&self) -> String {
        let base = match self.kind {
            SpecKind::Uniform { lo, hi } => format!("uniform[{lo},{hi})"),
            SpecKind::TruncGaussian { mu, sigma, lo, hi } => {
                format!("trunc_gaussian({mu},{sigma})[{lo},{hi}]")
            }
            SpecKind::Normal { mu, sigma } => format!("normal({mu},{sigma})"),
        };
        if self.correction == 1.0 {
            base
        } else {
            format!("{base}*{}", self.correction)
        }
    }
}

/// Looks up one of the named presets.
pub fn jitter_preset(name: &str) -> Result<JitterSpec> {
    match name {
        "jitter_1" => JitterSpec::uniform(0.0, 0.04),
        "jitter_2" => JitterSpec::uniform(0.01, 0.03),
        "jitter_3" => JitterSpec::trunc_gaussian(0.02, 0.01, 0.0, 0.04),
        "jitter_4" => JitterSpec::trunc_gaussian(0.02, 0.005, 0.01, 0.03),
        "jitter_5" => JitterSpec::normal(0.0, 1.0)?.with_correction(0.1),
        "jitter_s" => JitterSpec::normal(0.0, 1.0),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Draws one jitter value: a base-distribution sample times the correction.
pub fn sample(spec: &JitterSpec, rng: &mut RngStream) -> Result<f64> {
    let spec = JitterSpec::new(spec.kind, spec.correction)?;
    let base = match spec.kind {
        SpecKind::Uniform { lo, hi } => rng.uniform(lo, hi),
        SpecKind::Normal { mu, sigma } => rng.normal(mu, sigma),
        SpecKind::TruncGaussian { mu, sigma, lo, hi } => {
            let mut accepted = None;
            for _ in 0..TRUNCATION_ATTEMPT_CAP {
                let x = rng.normal(mu, sigma);
                if x >= lo && x <= hi {
                    accepted = Some(x);
                    break;
                }
            }
            accepted.ok_or(Error::DegenerateTruncation)?
        }
    };
    Ok(spec.correction * base)
}

/// Monte Carlo estimate of the effective flooding level `E[max(alpha, 0)]`.
pub fn effective_flooding_mc(spec: &JitterSpec, n: usize, rng: &mut RngStream) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput {
            context: "effective_flooding_mc",
            detail: "n must be positive".into(),
        });
    }
    let mut sum = 0.0;
    for _ in 0..n {
        let a = sample(spec, rng)?;
        if a > 0.0 {
            sum += a;
        }
    }
    Ok(sum / n as f64)
}

/// Monte Carlo estimate of the mean and population standard deviation of
/// the jitter distribution itself (no positive-part clamp).
pub fn moments_mc(spec: &JitterSpec, n: usize, rng: &mut RngStream) -> Result<Moments> {
    if n == 0 {
        return Err(Error::InvalidInput {
            context: "moments_mc",
            detail: "n must be positive".into(),
        });
    }
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        draws.push(sample(spec, rng)?);
    }
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    Ok(Moments {
        mean,
        std: libm::sqrt(var),
    })
}
