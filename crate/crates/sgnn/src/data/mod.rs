//! Dataset ingestion, synthetic generation, and deterministic splitting.

mod csv_io;
mod idx;
mod synth;

pub use csv_io::{load_csv, parse_dataset_csv, save_csv, write_csv};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC};
pub use synth::make_gaussian_clusters;

use std::io;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset has no rows")]
    Empty,
    #[error("feature buffer of {len} values is not a multiple of dimension {dim}")]
    RaggedBuffer { len: usize, dim: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a finite number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("non-finite feature at row {row}")]
    NonFiniteFeature { row: usize },
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("{count} labels for {rows} rows")]
    LabelCountMismatch { count: usize, rows: usize },
    #[error("label id {id} out of range for {classes} classes")]
    LabelOutOfRange { id: u32, classes: usize },
    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("file truncated: expected {expected} more bytes")]
    Truncated { expected: usize },
    #[error("{side} split is empty (train_fraction {fraction})")]
    DegenerateSplit { side: &'static str, fraction: f64 },
    #[error("fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A labeled (or unlabeled) set of equal-dimension vectors.
///
/// Rows are stored contiguously; row `i` occupies
/// `features[i*dim .. (i+1)*dim]`. Labels, when present, are dense class ids
/// indexing into `classes`, which is sorted so that id order coincides with
/// lexicographic order of the class names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Option<Vec<u32>>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        dim: usize,
        labels: Option<Vec<u32>>,
        classes: Vec<String>,
    ) -> Result<Self, DataError> {
        if dim == 0 {
            return Err(DataError::ZeroDimension);
        }
        if !features.len().is_multiple_of(dim) {
            return Err(DataError::RaggedBuffer {
                len: features.len(),
                dim,
            });
        }
        let rows = features.len() / dim;
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteFeature { row: pos / dim });
        }
        if let Some(ref l) = labels {
            if l.len() != rows {
                return Err(DataError::LabelCountMismatch {
                    count: l.len(),
                    rows,
                });
            }
            if let Some(&id) = l.iter().find(|&&id| id as usize >= classes.len()) {
                return Err(DataError::LabelOutOfRange {
                    id,
                    classes: classes.len(),
                });
            }
        }
        Ok(Self {
            features,
            dim,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<u32> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_name(&self, id: u32) -> &str {
        &self.classes[id as usize]
    }

    /// New dataset holding the given rows, in order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Dataset {
            features,
            dim: self.dim,
            labels,
            classes: self.classes.clone(),
        }
    }
}

/// How to carve a dataset into train and test sides.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of rows assigned to the train side.
    pub train_fraction: f64,
    /// Fraction of the train side actually kept (the training-size axis of
    /// benchmark curves). The test side is never subsampled.
    pub subset_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, subset_fraction: f64, seed: u64) -> Result<Self, DataError> {
        for f in [train_fraction, subset_fraction] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(DataError::BadFraction(f));
            }
        }
        Ok(Self {
            train_fraction,
            subset_fraction,
            seed,
        })
    }
}

/// Seeded shuffle followed by a prefix split.
///
/// The shuffle partitions rows exactly into a full train side and the test
/// side; `subset_fraction` then keeps a prefix of the train side. Both sides
/// must end up non-empty.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), DataError> {
    SplitSpec::new(spec.train_fraction, spec.subset_fraction, spec.seed)?;
    let n = dataset.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);

    let n_train = (spec.train_fraction * n as f64).round() as usize;
    if n_train == 0 {
        return Err(DataError::DegenerateSplit {
            side: "train",
            fraction: spec.train_fraction,
        });
    }
    if n_train >= n {
        return Err(DataError::DegenerateSplit {
            side: "test",
            fraction: spec.train_fraction,
        });
    }
    let n_sub = ((spec.subset_fraction * n_train as f64).round() as usize).max(1);
    let train = dataset.select(&indices[..n_sub]);
    let test = dataset.select(&indices[n_train..]);
    Ok((train, test))
}

/// Seeded subsample of `fraction` of the rows (for datasets that ship
/// pre-split, where only the training side shrinks).
pub fn subset(dataset: &Dataset, fraction: f64, seed: u64) -> Result<Dataset, DataError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DataError::BadFraction(fraction));
    }
    let n = dataset.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let keep = ((fraction * n as f64).round() as usize).max(1);
    Ok(dataset.select(&indices[..keep]))
}
