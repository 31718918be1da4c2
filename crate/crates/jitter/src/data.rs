//! Datasets: synthetic Gaussian blobs and the IDX byte codec.
//!
//! The IDX container is parsed bit-exactly: a 4-byte big-endian magic
//! (0x00000803 for images, 0x00000801 for labels), one big-endian 32-bit
//! size per dimension (3 for images: count, rows, cols; 1 for labels), then
//! an unsigned-byte payload in row-major order. Pixels are scaled to
//! `[0, 1]` by division by 255. Reading files from disk lives in the
//! companion CLI crate; this module works on byte slices so the codec stays
//! available without a filesystem.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tensor::Tensor2D;

/// IDX magic number for unsigned-byte image files (3 dimensions).
pub const IDX_IMAGES_MAGIC: u32 = 2051;
/// IDX magic number for unsigned-byte label files (1 dimension).
pub const IDX_LABELS_MAGIC: u32 = 2049;

/// A labeled classification dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Tensor2D,
    labels: Vec<usize>,
    num_classes: usize,
}

/// Parsed IDX preamble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<u32>,
}

impl Dataset {
    /// Validates and assembles a dataset.
    pub fn new(features: Tensor2D, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::InvalidInput {
                context: "Dataset::new",
                detail: "need at least one sample".into(),
            });
        }
        if labels.len() != features.rows() {
            return Err(Error::ShapeMismatch {
                op: "Dataset::new",
                detail: format!("{} rows vs {} labels", features.rows(), labels.len()),
            });
        }
        for &label in &labels {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange { label, num_classes });
            }
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> &Tensor2D {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature dimensionality.
    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

/// Generates a Gaussian-blob classification set. Class `c` is centered at
/// `class_separation` along coordinate axis `c` (so `num_classes <= d` is
/// required); features are the center plus unit Gaussian noise. Clean
/// labels are assigned round-robin (`i % num_classes`, giving exactly
/// balanced classes), then each label is independently reassigned to a
/// uniformly chosen *different* class with probability `label_noise_rate`.
/// The label noise makes memorization-driven overfitting observable, which
/// is the regime the loss wrappers target.
pub fn synthetic_blobs(
    n: usize,
    d: usize,
    num_classes: usize,
    class_separation: f64,
    label_noise_rate: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if num_classes == 0 || n < num_classes {
        return Err(Error::InvalidInput {
            context: "synthetic_blobs",
            detail: format!("need n >= num_classes >= 1, got n={n}, classes={num_classes}"),
        });
    }
    if d < num_classes {
        return Err(Error::InvalidInput {
            context: "synthetic_blobs",
            detail: format!(
                "centers sit on coordinate axes, so d ({d}) must be >= classes ({num_classes})"
            ),
        });
    }
    if !(0.0..1.0).contains(&label_noise_rate) {
        return Err(Error::InvalidInput {
            context: "synthetic_blobs",
            detail: format!("label_noise_rate must be in [0, 1), got {label_noise_rate}"),
        });
    }
    if !(class_separation.is_finite() && class_separation >= 0.0) {
        return Err(Error::InvalidInput {
            context: "synthetic_blobs",
            detail: format!(
                "class_separation must be finite and nonnegative, got {class_separation}"
            ),
        });
    }

    let mut labels: Vec<usize> = (0..n).map(|i| i % num_classes).collect();
    let mut values = Vec::with_capacity(n * d);
    for &label in &labels {
        for c in 0..d {
            let mut v = rng.standard_normal();
            if c == label {
                v += class_separation;
            }
            values.push(v);
        }
    }
    if label_noise_rate > 0.0 {
        for label in &mut labels {
            if rng.uniform01() < label_noise_rate {
                let shift = 1 + rng.u64_below(num_classes as u64 - 1) as usize;
                *label = (*label + shift) % num_classes;
            }
        }
    }
    Dataset::new(Tensor2D::new(n, d, values)?, labels, num_classes)
}

/// Seeded sample of `n` rows without replacement (partial Fisher-Yates).
/// Keeps the parent's `num_classes`.
pub fn subset(dataset: &Dataset, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    let total = dataset.len();
    if n == 0 || n > total {
        return Err(Error::InvalidInput {
            context: "subset",
            detail: format!("need 1 <= n <= {total}, got {n}"),
        });
    }
    let mut indices: Vec<usize> = (0..total).collect();
    for i in 0..n {
        let j = i + rng.u64_below((total - i) as u64) as usize;
        indices.swap(i, j);
    }
    indices.truncate(n);
    let features = dataset.features.gather_rows(&indices)?;
    let labels = indices.iter().map(|&i| dataset.labels[i]).collect();
    Dataset::new(features, labels, dataset.num_classes)
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::IdxTruncated {
            expected: end,
            found: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

fn parse_idx(bytes: &[u8], expected_magic: u32, ndims: usize) -> Result<(IdxHeader, &[u8])> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != expected_magic {
        return Err(Error::IdxBadMagic {
            expected: expected_magic,
            found: magic,
        });
    }
    let mut dims = Vec::with_capacity(ndims);
    for i in 0..ndims {
        dims.push(read_u32_be(bytes, 4 + 4 * i)?);
    }
    let header_len = 4 + 4 * ndims;
    let payload_len: usize = dims.iter().map(|&d| d as usize).product();
    let expected = header_len + payload_len;
    if bytes.len() < expected {
        return Err(Error::IdxTruncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok((
        IdxHeader { magic, dims },
        &bytes[header_len..header_len + payload_len],
    ))
}

/// Parses an IDX image file: magic 2051, dims (count, rows, cols).
pub fn parse_idx_images(bytes: &[u8]) -> Result<(IdxHeader, &[u8])> {
    parse_idx(bytes, IDX_IMAGES_MAGIC, 3)
}

/// Parses an IDX label file: magic 2049, dims (count,).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<(IdxHeader, &[u8])> {
    parse_idx(bytes, IDX_LABELS_MAGIC, 1)
}

/// Assembles a dataset from raw IDX image and label bytes. Pixels land in
/// `[0, 1]` (divided by 255); images flatten row-major to `rows * cols`
/// features; `num_classes` is one past the largest label present.
pub fn dataset_from_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<Dataset> {
    let (img_header, pixels) = parse_idx_images(image_bytes)?;
    let (lbl_header, raw_labels) = parse_idx_labels(label_bytes)?;
    let count = img_header.dims[0] as usize;
    if count != lbl_header.dims[0] as usize {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: lbl_header.dims[0] as usize,
        });
    }
    let d = img_header.dims[1] as usize * img_header.dims[2] as usize;
    let values = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&l| l as usize).collect();
    let num_classes = labels.iter().max().map_or(1, |&m| m + 1);
    Dataset::new(Tensor2D::new(count, d, values)?, labels, num_classes)
}

/// Encodes IDX image bytes (fixture writer).
pub fn encode_idx_images(rows: u32, cols: u32, images: &[u8]) -> Result<Vec<u8>> {
    let per_image = rows as usize * cols as usize;
    if per_image == 0 || !images.len().is_multiple_of(per_image) {
        return Err(Error::InvalidInput {
            context: "encode_idx_images",
            detail: format!("{} bytes is not a multiple of {rows}x{cols}", images.len()),
        });
    }
    let count = (images.len() / per_image) as u32;
    let mut out = Vec::with_capacity(16 + images.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&count.to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    out.extend_from_slice(images);
    Ok(out)
}

/// Encodes IDX label bytes (fixture writer).
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
