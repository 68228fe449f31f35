//! Scalar fields: one finite value per graph node.

use std::fs;
use std::io;
use std::ops::Index;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("field file is empty")]
    Empty,
    #[error("expected header {expected:?}, found {found:?}")]
    BadHeader { expected: &'static str, found: String },
    #[error("line {line}: cannot parse {value:?} as a finite number")]
    BadValue { line: usize, value: String },
    #[error("field file is not valid UTF-8")]
    NotText,
    #[error(transparent)]
    Io(#[from] io::Error),
}

const CSV_HEADER: &str = "value";

/// A function on graph nodes, stored densely: `field[i]` is the value at node
/// `i`. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self, FieldError> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(pos));
        }
        Ok(Self { values })
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Indices attaining the minimum value exactly.
    pub fn argmin_set(&self) -> Vec<usize> {
        let min = self.min_value();
        (0..self.values.len())
            .filter(|&i| self.values[i] == min)
            .collect()
    }

    /// Serializes as single-column CSV with header `value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 8 + 8);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for v in &self.values {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the single-column CSV form.
    pub fn parse_csv(bytes: &[u8]) -> Result<Self, FieldError> {
        let text = std::str::from_utf8(bytes).map_err(|_| FieldError::NotText)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or(FieldError::Empty)?;
        if header.trim() != CSV_HEADER {
            return Err(FieldError::BadHeader {
                expected: CSV_HEADER,
                found: header.to_string(),
            });
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let v: f64 = trimmed.parse().map_err(|_| FieldError::BadValue {
                line: i + 2,
                value: line.to_string(),
            })?;
            if !v.is_finite() {
                return Err(FieldError::BadValue {
                    line: i + 2,
                    value: line.to_string(),
                });
            }
            values.push(v);
        }
        Ok(Self { values })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, FieldError> {
        Self::parse_csv(&fs::read(path)?)
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl From<ScalarField> for Vec<f64> {
    fn from(f: ScalarField) -> Self {
        f.values
    }
}
