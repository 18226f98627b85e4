//! Regression observations `(x_j, y_j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` observations with inputs in `R^dim`, stored row-major.
///
/// Radial estimators only look at `|x_j|`; a one-dimensional dataset of
/// non-negative inputs is the usual `(r_j, y_j)` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    inputs: Vec<f64>,
    y: Vec<f64>,
    dim: usize,
}

impl RegressionDataset {
    pub fn new(dim: usize, inputs: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("input dimension must be at least 1"));
        }
        if y.is_empty() {
            return Err(Error::config("dataset must contain at least one observation"));
        }
        if inputs.len() != dim * y.len() {
            return Err(Error::config(format!(
                "{} input coordinates do not match {} responses of dimension {dim}",
                inputs.len(),
                y.len()
            )));
        }
        if let Some(v) = inputs.iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("dataset contains non-finite value {v}")));
        }
        Ok(RegressionDataset { inputs, y, dim })
    }

    /// Scalar inputs, typically distances.
    pub fn radial(r: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(1, r, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn input(&self, j: usize) -> &[f64] {
        &self.inputs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Euclidean norms `|x_j|`.
    pub fn radii(&self) -> Vec<f64> {
        if self.dim == 1 {
            return self.inputs.iter().map(|x| x.abs()).collect();
        }
        self.inputs
            .chunks_exact(self.dim)
            .map(|x| x.iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect()
    }

    /// The observations at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        let mut y = Vec::with_capacity(indices.len());
        for &j in indices {
            if j >= self.len() {
                return Err(Error::config(format!("index {j} out of range for {} rows", self.len())));
            }
            inputs.extend_from_slice(self.input(j));
            y.push(self.y[j]);
        }
        Self::new(self.dim, inputs, y)
    }

    /// Same inputs, responses multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        RegressionDataset {
            inputs: self.inputs.clone(),
            y: self.y.iter().map(|v| v * factor).collect(),
            dim: self.dim,
        }
    }
}
