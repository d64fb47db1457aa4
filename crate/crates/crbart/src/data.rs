//! Basic data containers shared across the crate.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        Ok(Matrix { data, n_rows, n_cols })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Matrix { data: vec![0.0; n_rows * n_cols], n_rows, n_cols }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::invalid(format!(
                    "row {} has {} columns, expected {}",
                    i,
                    row.len(),
                    n_cols
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { data, n_rows: rows.len(), n_cols })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n_cols + j] = value;
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.n_cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.n_rows += 1;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }
}

/// Covariate matrix with a binary outcome per row.
#[derive(Debug, Clone)]
pub struct BinaryDataset {
    pub x: Matrix,
    pub y: Vec<u8>,
}

impl BinaryDataset {
    pub fn new(x: Matrix, y: Vec<u8>) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::invalid(format!(
                "covariate rows {} do not match outcome length {}",
                x.n_rows(),
                y.len()
            )));
        }
        if x.n_rows() == 0 {
            return Err(Error::invalid("dataset has no rows"));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::invalid(format!("outcome value {bad} is not 0/1")));
        }
        if x.rows().any(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("covariates must be finite"));
        }
        Ok(BinaryDataset { x, y })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_vars(&self) -> usize {
        self.x.n_cols()
    }

    /// Proportion of ones.
    pub fn outcome_mean(&self) -> f64 {
        self.y.iter().map(|&v| v as f64).sum::<f64>() / self.y.len() as f64
    }

    pub fn has_both_classes(&self) -> bool {
        self.y.iter().any(|&v| v == 1) && self.y.iter().any(|&v| v == 0)
    }
}
