//! Loss wrappers: flooding and its randomized generalization.
//!
//! Both wrappers apply the same fold to a raw objective value `L`:
//!
//! ```text
//! wrapped = |L - alpha| + alpha
//! ```
//!
//! with `alpha` a fixed level for flooding and a fresh draw per application
//! for jitter. The fold is implemented branch-wise rather than through
//! `abs`, so when `L >= alpha` the wrapped value is the raw value *bit for
//! bit* (computing `(L - alpha) + alpha` would round): the wrapper is a
//! strict no-op above the level and an exact reflection `2*alpha - L` below
//! it. Gradients follow the same branch: scale by `+1` when `L >= alpha`
//! (ties ascend the raw objective) and `-1` below, which is gradient ascent
//! on the raw loss whenever it undershoots the level.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::{self, JitterSpec};

/// Objective transform applied to each mini-batch loss.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossWrapper {
    /// Train on the raw loss.
    Original,
    /// Fixed flooding level `b > 0`.
    Flooding { level: f64 },
    /// A fresh `alpha` drawn from `spec` per application.
    Jitter { spec: JitterSpec },
}

/// Result of wrapping one raw loss value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WrappedLoss {
    pub raw: f64,
    pub wrapped: f64,
    /// The level in effect: `None` for [`LossWrapper::Original`], the fixed
    /// level for flooding, the drawn value for jitter.
    pub alpha: Option<f64>,
    /// Factor for the backward pass: `+1.0` when `raw >= alpha`, else `-1.0`.
    pub grad_sign: f64,
}

/// `|loss - level| + level`, branch-wise (exact no-op when `loss >= level`).
pub fn flooding_transform(loss: f64, level: f64) -> f64 {
    jitter_transform(loss, level)
}

/// `|loss - alpha| + alpha`, branch-wise (exact no-op when `loss >= alpha`).
pub fn jitter_transform(loss: f64, alpha: f64) -> f64 {
    if loss >= alpha {
        loss
    } else {
        2.0 * alpha - loss
    }
}

/// Backward-pass sign of the wrapped objective: `+1.0` iff `loss >= alpha`.
pub fn grad_sign(loss: f64, alpha: f64) -> f64 {
    if loss >= alpha {
        1.0
    } else {
        -1.0
    }
}

fn validated_level(level: f64) -> Result<f64> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::InvalidInput {
            context: "flooding level",
            detail: format!("must be finite and positive, got {level}"),
        });
    }
    Ok(level)
}

impl LossWrapper {
    /// Flooding with a validated positive level.
    pub fn flooding(level: f64) -> Result<Self> {
        Ok(LossWrapper::Flooding {
            level: validated_level(level)?,
        })
    }

    /// Jitter driven by the given distribution.
    pub fn jitter(spec: JitterSpec) -> Self {
        LossWrapper::Jitter { spec }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            LossWrapper::Original => String::from("original"),
            LossWrapper::Flooding { level } => format!("flooding(b={level})"),
            LossWrapper::Jitter { spec } => format!("jitter({})", spec.describe()),
        }
    }
}

/// Applies a wrapper to one raw loss value. Only the jitter variant draws
/// from `rng`; the other wrappers leave it untouched.
pub fn apply(wrapper: &LossWrapper, raw_loss: f64, rng: &mut RngStream) -> Result<WrappedLoss> {
    if !raw_loss.is_finite() {
        return Err(Error::NonFinite {
            context: "loss wrapper input",
        });
    }
    match wrapper {
        LossWrapper::Original => Ok(WrappedLoss {
            raw: raw_loss,
            wrapped: raw_loss,
            alpha: None,
            grad_sign: 1.0,
        }),
        LossWrapper::Flooding { level } => {
            let level = validated_level(*level)?;
            Ok(WrappedLoss {
                raw: raw_loss,
                wrapped: flooding_transform(raw_loss, level),
                alpha: Some(level),
                grad_sign: grad_sign(raw_loss, level),
            })
        }
        LossWrapper::Jitter { spec } => {
            let alpha = sampler::sample(spec, rng)?;
            Ok(WrappedLoss {
                raw: raw_loss,
                wrapped: jitter_transform(raw_loss, alpha),
                alpha: Some(alpha),
                grad_sign: grad_sign(raw_loss, alpha),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::streams;
    use crate::sampler::jitter_preset;

    #[test]
    fn transform_is_identity_at_and_above_the_level() {
        let values = [0.02, 0.020000000000000004, 0.5, 1e-300, 3.7, 1e12];
        for &loss in &values {
            if loss >= 0.02 {
                assert_eq!(jitter_transform(loss, 0.02).to_bits(), loss.to_bits());
            }
        }
        // The naive (loss - alpha) + alpha form would fail this bit check.
        let loss = 0.1 + 1e-17;
        assert_eq!(jitter_transform(loss, 0.02).to_bits(), loss.to_bits());
    }

    #[test]
    fn transform_reflects_below_the_level() {
        assert_eq!(jitter_transform(0.01, 0.02), 0.03);
        assert_eq!(jitter_transform(0.0, 0.02), 0.04);
        assert_eq!(jitter_transform(-0.5, 0.25), 1.0);
    }

    #[test]
    fn nonpositive_alpha_never_modifies_a_nonnegative_loss() {
        let mut rng = RngStream::new(8, streams::MC_BASE);
        for _ in 0..10_000 {
            let loss = rng.uniform(0.0, 5.0);
            let alpha = -rng.uniform(0.0, 3.0);
            assert_eq!(jitter_transform(loss, alpha).to_bits(), loss.to_bits());
            assert_eq!(grad_sign(loss, alpha), 1.0);
        }
    }

    #[test]
    fn transform_dominates_raw_loss() {
        let mut rng = RngStream::new(9, streams::MC_BASE);
        for _ in 0..10_000 {
            let loss = rng.uniform(-2.0, 2.0);
            let alpha = rng.uniform(-1.0, 1.0);
            let wrapped = jitter_transform(loss, alpha);
            assert!(wrapped >= loss);
            assert_eq!(wrapped == loss, loss >= alpha);
        }
    }

    #[test]
    fn flooding_is_idempotent_and_floored() {
        let mut rng = RngStream::new(10, streams::MC_BASE);
        for _ in 0..10_000 {
            let loss = rng.uniform(-1.0, 1.0);
            let once = flooding_transform(loss, 0.02);
            assert!(once >= 0.02);
            assert_eq!(flooding_transform(once, 0.02).to_bits(), once.to_bits());
        }
    }

    #[test]
    fn grad_sign_breaks_ties_upward() {
        assert_eq!(grad_sign(0.02, 0.02), 1.0);
        assert_eq!(grad_sign(0.03, 0.02), 1.0);
        assert_eq!(grad_sign(0.01, 0.02), -1.0);
    }

    #[test]
    fn original_passes_through_without_touching_rng() {
        let mut rng = RngStream::new(4, streams::JITTER);
        let before = rng.clone();
        let w = apply(&LossWrapper::Original, 0.37, &mut rng).unwrap();
        assert_eq!(w.raw, 0.37);
        assert_eq!(w.wrapped.to_bits(), 0.37f64.to_bits());
        assert_eq!(w.alpha, None);
        assert_eq!(w.grad_sign, 1.0);
        assert_eq!(rng, before);
    }

    #[test]
    fn flooding_records_its_level_without_touching_rng() {
        let mut rng = RngStream::new(4, streams::JITTER);
        let before = rng.clone();
        let wrapper = LossWrapper::flooding(0.02).unwrap();
        let w = apply(&wrapper, 0.01, &mut rng).unwrap();
        assert_eq!(w.wrapped, 0.03);
        assert_eq!(w.alpha, Some(0.02));
        assert_eq!(w.grad_sign, -1.0);
        assert_eq!(rng, before);
    }

    #[test]
    fn jitter_draws_exactly_one_alpha() {
        let spec = jitter_preset("jitter_1").unwrap();
        let mut rng = RngStream::new(4, streams::JITTER);
        let mut mirror = rng.clone();
        let wrapper = LossWrapper::jitter(spec);
        let w = apply(&wrapper, 0.5, &mut rng).unwrap();
        let expected = crate::sampler::sample(&spec, &mut mirror).unwrap();
        assert_eq!(w.alpha, Some(expected));
        assert_eq!(rng, mirror);
        assert!(w.wrapped >= w.raw);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let mut rng = RngStream::new(0, streams::JITTER);
        assert!(LossWrapper::flooding(0.0).is_err());
        assert!(LossWrapper::flooding(-0.1).is_err());
        assert!(LossWrapper::flooding(f64::NAN).is_err());
        assert!(apply(&LossWrapper::Original, f64::NAN, &mut rng).is_err());
        assert!(apply(&LossWrapper::Flooding { level: -1.0 }, 0.5, &mut rng).is_err());
    }
}
