use crate::error::{Error, Result};
use crate::geometry::grid::Grid;

/// Nodal values on every grid node, boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        ScalarField::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField {
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at the node coordinates `(x_1, …, x_{n-1}, t)`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &Grid, f: F) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.coords_into(i, &mut x);
                f(&x)
            })
            .collect();
        ScalarField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Length and finiteness check against `grid`.
    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("non-finite field value at node {i}")));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        ScalarField {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Values on the boundary faces, one vector per face aligned with
/// `Grid::faces()[k].nodes`. A corner node shared by two faces carries one
/// value per face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub faces: Vec<Vec<f64>>,
}

impl BoundaryField {
    pub fn len(&self) -> usize {
        self.faces.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn face(&self, k: usize) -> &[f64] {
        &self.faces[k]
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.boundary_len() {
            return Err(Error::Shape {
                expected: grid.boundary_len(),
                found: self.len(),
            });
        }
        if self.faces.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite boundary value".into()));
        }
        Ok(())
    }

    /// Trace of a nodal field.
    pub fn trace(grid: &Grid, f: &ScalarField) -> Self {
        BoundaryField {
            faces: grid
                .faces()
                .iter()
                .map(|fc| fc.nodes.iter().map(|&i| f.values[i]).collect())
                .collect(),
        }
    }
}
