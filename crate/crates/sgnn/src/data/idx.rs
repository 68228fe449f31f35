//! Big-endian IDX image/label files (the MNIST distribution format).

use std::fs;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};

use super::{DataError, Dataset};

/// Magic number of an IDX file holding unsigned-byte images (3 dimensions).
pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
/// Magic number of an IDX file holding unsigned-byte labels (1 dimension).
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32(cur: &mut &[u8]) -> Result<u32, DataError> {
    cur.read_u32::<BigEndian>()
        .map_err(|_| DataError::Truncated { expected: 4 })
}

/// Parses an image file: header `(magic, count, rows, cols)` then
/// `count*rows*cols` pixel bytes. Pixels are scaled to `[0, 1]`.
///
/// Returns the flattened row-major features and `(count, rows*cols)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(Vec<f64>, usize, usize), DataError> {
    let mut cur = bytes;
    let magic = read_u32(&mut cur)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            expected: IDX_IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut cur)? as usize;
    let rows = read_u32(&mut cur)? as usize;
    let cols = read_u32(&mut cur)? as usize;
    let dim = rows
        .checked_mul(cols)
        .ok_or(DataError::Truncated { expected: usize::MAX })?;
    let total = count
        .checked_mul(dim)
        .ok_or(DataError::Truncated { expected: usize::MAX })?;
    if cur.len() < total {
        return Err(DataError::Truncated {
            expected: total - cur.len(),
        });
    }
    let features = cur[..total].iter().map(|&b| b as f64 / 255.0).collect();
    Ok((features, count, dim))
}

/// Parses a label file: header `(magic, count)` then `count` label bytes.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let mut cur = bytes;
    let magic = read_u32(&mut cur)?;
    if magic != IDX_LABEL_MAGIC {
        return Err(DataError::BadMagic {
            expected: IDX_LABEL_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut cur)? as usize;
    if cur.len() < count {
        return Err(DataError::Truncated {
            expected: count - cur.len(),
        });
    }
    Ok(cur[..count].to_vec())
}

/// Loads a paired image/label IDX file set into a labeled dataset.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    let (features, count, dim) = parse_idx_images(&fs::read(images_path)?)?;
    let raw_labels = parse_idx_labels(&fs::read(labels_path)?)?;
    if raw_labels.len() != count {
        return Err(DataError::CountMismatch {
            images: count,
            labels: raw_labels.len(),
        });
    }
    if count == 0 {
        return Err(DataError::Empty);
    }
    // dense ids ranked by byte value; names sort the same way for 0..=9
    let mut distinct: Vec<u8> = raw_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let classes: Vec<String> = distinct.iter().map(|b| b.to_string()).collect();
    let labels = raw_labels
        .iter()
        .map(|b| distinct.binary_search(b).unwrap() as u32)
        .collect();
    Dataset::new(features, dim, Some(labels), classes)
}
