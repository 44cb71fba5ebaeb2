use crate::error::{Error, Result};
use crate::mesh::{Point, TriangleMesh};

/// Nodal values of a continuous piecewise-linear function on one mesh level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub level: usize,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(level: usize, values: Vec<f64>) -> Self {
        Self { level, values }
    }

    pub fn zeros(level: usize, len: usize) -> Self {
        Self::constant(level, len, 0.0)
    }

    pub fn constant(level: usize, len: usize, value: f64) -> Self {
        Self {
            level,
            values: vec![value; len],
        }
    }

    /// Nodal interpolant of `f` on `mesh`.
    pub fn interpolate(mesh: &TriangleMesh, f: impl Fn(&Point) -> f64) -> Self {
        Self {
            level: mesh.level,
            values: mesh.vertices.iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks the length against `mesh` and that every entry is finite.
    pub fn validate(&self, mesh: &TriangleMesh) -> Result<()> {
        if self.values.len() != mesh.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.vertex_count(),
                found: self.values.len(),
            });
        }
        if self.level != mesh.level {
            return Err(Error::LevelMismatch {
                expected: mesh.level,
                found: self.level,
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn axpy(&mut self, alpha: f64, other: &ScalarField) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }
}
