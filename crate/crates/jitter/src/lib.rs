//! Loss-wrapper training toolkit.
//!
//! The crate implements a family of objective transforms built around the
//! identity `wrapped = |loss - alpha| + alpha`. With a fixed `alpha` this is
//! the flooding objective; drawing a fresh `alpha` per mini-batch from a
//! configured distribution gives the randomized ("jitter") variant. Around
//! that core live the pieces needed to study the transforms end to end:
//!
//! * [`rng`]: a self-contained, cross-platform deterministic generator with
//!   named independent streams,
//! * [`sampler`]: jitter distributions, the six named presets, and Monte
//!   Carlo estimates of their effective flooding level,
//! * [`loss`]: the wrapper transforms and their gradient sign contract,
//! * [`tensor`] and [`nn`]: a row-major matrix type and a ReLU MLP with
//!   softmax cross-entropy, analytic backprop, and finite differences,
//! * [`data`]: synthetic Gaussian blob classification sets and an IDX codec,
//! * [`train`]: mini-batch SGD with momentum driving any wrapper,
//! * [`analysis`]: landscape flipping, local-minima counting, double-descent
//!   detection, estimator MSE experiments, and run comparison tables.
//!
//! Everything here is `no_std` (with `alloc`); file IO, configuration, and
//! the command-line front end live in the companion `jitter-cli` crate.
//!
//! Determinism is a contract, not an accident: all randomness flows through
//! [`rng::RngStream`], floating-point reductions fix their summation order,
//! and transcendental functions come from `libm`, so a `(seed, stream)` pair
//! reproduces bit-identical results across platforms and runs.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod data;
pub mod error;
pub mod loss;
pub mod nn;
pub mod rng;
pub mod sampler;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
