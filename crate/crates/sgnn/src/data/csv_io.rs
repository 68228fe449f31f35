//! Rectangular numeric CSV datasets with a header row.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{DataError, Dataset};

/// Parses a CSV dataset from raw bytes.
///
/// The first record is a header. Every column except the optional label
/// column must hold finite numbers. Feature columns keep their header order.
pub fn parse_dataset_csv(bytes: &[u8], label_column: Option<&str>) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true) // we report ragged rows ourselves, with row numbers
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingLabelColumn(name.to_string()))?,
        ),
        None => None,
    };
    let expected = headers.len();
    let dim = expected - label_idx.map_or(0, |_| 1);
    if dim == 0 {
        return Err(DataError::ZeroDimension);
    }

    let mut features = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut rows = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != expected {
            return Err(DataError::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.trim().parse().map_err(|_| DataError::NonNumeric {
                row,
                column: headers[col].to_string(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonNumeric {
                    row,
                    column: headers[col].to_string(),
                    value: cell.to_string(),
                });
            }
            features.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(DataError::Empty);
    }

    let (labels, classes) = if label_idx.is_some() {
        let distinct: BTreeSet<&String> = raw_labels.iter().collect();
        let classes: Vec<String> = distinct.into_iter().cloned().collect();
        let labels = raw_labels
            .iter()
            .map(|l| classes.binary_search(l).unwrap() as u32)
            .collect();
        (Some(labels), classes)
    } else {
        (None, Vec::new())
    };
    Dataset::new(features, dim, labels, classes)
}

pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset, DataError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    parse_dataset_csv(&bytes, label_column)
}

/// Writes a dataset as CSV with feature headers `f0..f{d-1}` and, when labels
/// are present, a trailing `label` column holding class names.
///
/// Floats use Rust's shortest round-trip formatting, so a load of the written
/// file reproduces the dataset exactly.
pub fn write_csv(dataset: &Dataset, mut w: impl Write) -> Result<(), DataError> {
    let dim = dataset.dim();
    let mut header: Vec<String> = (0..dim).map(|j| format!("f{j}")).collect();
    if dataset.labels().is_some() {
        header.push("label".to_string());
    }
    writeln!(w, "{}", header.join(","))?;
    for i in 0..dataset.len() {
        let mut cells: Vec<String> = dataset.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(label) = dataset.label(i) {
            cells.push(dataset.class_name(label).to_string());
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_csv(dataset, BufWriter::new(File::create(path)?))
}
