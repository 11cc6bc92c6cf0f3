use std::sync::Arc;

use crate::error::{Error, Result};

/// An immutable `n × d` table of finite observations, stored row-major.
///
/// Cloning is cheap: the values live behind an `Arc`, so datasets can be
/// handed to worker threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: usize,
    cols: usize,
    values: Arc<[f64]>,
}

impl Dataset {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one row and one column, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidDataset(format!(
                "{} values do not fill a {rows}x{cols} table",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, values: values.into() })
    }

    /// One-column dataset.
    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    /// Internal constructor for values already known to be finite and well shaped.
    pub(crate) fn from_parts(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        debug_assert!(rows > 0 && cols > 0);
        Self { rows, cols, values: values.into() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.cols + k]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.cols)
    }

    /// Copy of column `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[k]).collect()
    }

    /// Dataset made of the given rows of `self`, in order (repeats allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Dataset::from_parts(idx.len(), self.cols, values)
    }

    /// Applies `f` to every value. Fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Dataset> {
        Dataset::new(self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Dataset::new(0, 1, vec![]).is_err());
        assert!(Dataset::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Dataset::new(1, 1, vec![f64::NAN]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn row_access() {
        let d = Dataset::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(d.rows(), 2);
        assert_eq!(d.cols(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.get(0, 1), 2.0);
        assert_eq!(d.column(0), vec![1.0, 3.0]);
        assert_eq!(d.select_rows(&[1, 1]).values(), &[3.0, 4.0, 3.0, 4.0]);
    }
}
