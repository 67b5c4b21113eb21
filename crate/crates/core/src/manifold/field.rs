use crate::error::{Error, Result};

use super::GridSignature;

/// Real values on the quadrature nodes of one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub grid: GridSignature,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, grid: GridSignature) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(ScalarField { values, grid })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            grid: self.grid,
        }
    }
}
