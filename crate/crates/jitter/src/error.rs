//! Error type shared by the whole crate.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// All failure modes of the library surface.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands (or an operand and a model) disagree on dimensions.
    ShapeMismatch { op: &'static str, detail: String },
    /// A tensor construction or arithmetic result contained NaN or infinity.
    NonFinite { context: &'static str },
    /// A class label was not below the declared class count.
    LabelOutOfRange { label: usize, num_classes: usize },
    /// An argument violated a documented precondition.
    InvalidInput {
        context: &'static str,
        detail: String,
    },
    /// A preset name was not one of the published jitter presets.
    UnknownPreset(String),
    /// Truncated Gaussian rejection sampling exhausted its iteration budget,
    /// meaning the truncation window carries essentially no probability mass.
    DegenerateTruncation,
    /// An IDX payload began with the wrong magic number.
    IdxBadMagic { expected: u32, found: u32 },
    /// An IDX payload ended before its header-declared contents.
    IdxTruncated { expected: usize, found: usize },
    /// An IDX image/label pair disagreed on the number of items.
    IdxCountMismatch { images: usize, labels: usize },
    /// Training observed a non-finite loss and aborted.
    NonFiniteLoss { epoch: usize, batch: usize },
    /// Run records with different configurations were aggregated together.
    InconsistentConfigs { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, detail } => {
                write!(f, "shape mismatch in {op}: {detail}")
            }
            Error::NonFinite { context } => {
                write!(f, "non-finite value in {context}")
            }
            Error::LabelOutOfRange { label, num_classes } => {
                write!(f, "label {label} out of range for {num_classes} classes")
            }
            Error::InvalidInput { context, detail } => {
                write!(f, "invalid input to {context}: {detail}")
            }
            Error::UnknownPreset(name) => {
                write!(f, "unknown jitter preset {name:?}")
            }
            Error::DegenerateTruncation => {
                write!(
                    f,
                    "truncated Gaussian rejection sampling exceeded its iteration cap"
                )
            }
            Error::IdxBadMagic { expected, found } => {
                write!(
                    f,
                    "bad IDX magic number: expected {expected}, found {found}"
                )
            }
            Error::IdxTruncated { expected, found } => {
                write!(
                    f,
                    "truncated IDX payload: expected {expected} bytes, found {found}"
                )
            }
            Error::IdxCountMismatch { images, labels } => {
                write!(
                    f,
                    "IDX item count mismatch: {images} images vs {labels} labels"
                )
            }
            Error::NonFiniteLoss { epoch, batch } => {
                write!(f, "non-finite loss at epoch {epoch}, batch {batch}")
            }
            Error::InconsistentConfigs { detail } => {
                write!(f, "runs have inconsistent configurations: {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}
