//! Big-endian IDX files (the MNIST distribution format).

use std::path::{Path, PathBuf};

use thiserror::Error;

use super::LabeledDataset;
use crate::scalar::Real;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic number in {field}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        field: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("truncated {field}: expected {expected} bytes, found {actual}")]
    Truncated {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("count mismatch: image file holds {images} items, label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("image dimensions must be positive, got {rows}x{cols}")]
    EmptyImage { rows: usize, cols: usize },
}

fn read_u32(bytes: &[u8], offset: usize, field: &'static str) -> Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated {
            field,
            expected: offset + 4,
            actual: bytes.len(),
        })
}

/// Decodes an image file and a label file. Pixels are scaled to `[0, 1]`;
/// the class count is `max label + 1`.
pub fn parse_idx<T: Real>(images: &[u8], labels: &[u8]) -> Result<LabeledDataset<T>, IdxError> {
    let magic = read_u32(images, 0, "image header")?;
    if magic != IMAGE_MAGIC {
        return Err(IdxError::BadMagic {
            field: "image magic",
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let n_images = read_u32(images, 4, "image header")? as usize;
    let rows = read_u32(images, 8, "image header")? as usize;
    let cols = read_u32(images, 12, "image header")? as usize;
    if rows == 0 || cols == 0 {
        return Err(IdxError::EmptyImage { rows, cols });
    }

    let magic = read_u32(labels, 0, "label header")?;
    if magic != LABEL_MAGIC {
        return Err(IdxError::BadMagic {
            field: "label magic",
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let n_labels = read_u32(labels, 4, "label header")? as usize;
    if n_images != n_labels {
        return Err(IdxError::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }

    let dim = rows * cols;
    let pixels = &images[16..];
    if pixels.len() < n_images * dim {
        return Err(IdxError::Truncated {
            field: "image pixels",
            expected: n_images * dim,
            actual: pixels.len(),
        });
    }
    let label_bytes = &labels[8..];
    if label_bytes.len() < n_labels {
        return Err(IdxError::Truncated {
            field: "label values",
            expected: n_labels,
            actual: label_bytes.len(),
        });
    }

    let scale = T::lit(1.0 / 255.0);
    let features = pixels[..n_images * dim]
        .iter()
        .map(|&p| T::lit(p as f64) * scale)
        .collect();
    let labels: Vec<usize> = label_bytes[..n_labels]
        .iter()
        .map(|&l| l as usize)
        .collect();
    let num_classes = labels.iter().max().map_or(1, |m| m + 1);
    Ok(LabeledDataset::new(features, dim, labels, num_classes)
        .expect("decoded IDX data is consistent by construction"))
}

pub fn load_idx_dataset<T: Real>(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<LabeledDataset<T>, IdxError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| IdxError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let images = read(images_path.as_ref())?;
    let labels = read(labels_path.as_ref())?;
    parse_idx(&images, &labels)
}
