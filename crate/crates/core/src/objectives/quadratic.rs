use nalgebra::DMatrix;

use super::{LocalObjective, ObjectiveError};
use crate::linalg;

/// `f(x) = ½ xᵀ A x + bᵀ x + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: f64,
    norm: f64,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self, ObjectiveError> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || n == 0 {
            return Err(ObjectiveError::Shape(format!(
                "A is {}x{}, b has length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if linalg::max_abs_asymmetry(&a) > 1e-12 {
            return Err(ObjectiveError::Parameter("quadratic matrix must be symmetric".into()));
        }
        let norm = linalg::symmetric_norm(&a)
            .map_err(|e| ObjectiveError::Parameter(format!("quadratic matrix: {e}")))?;
        Ok(Self { a, b, c: 0.0, norm })
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl LocalObjective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut quad = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.a[(i, j)] * x[j]).sum();
            quad += x[i] * row;
        }
        0.5 * quad + self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>() + self.c
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            out[i] = (0..n).map(|j| self.a[(i, j)] * x[j]).sum::<f64>() + self.b[i];
        }
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.a.clone())
    }

    fn lipschitz(&self, _radius: f64) -> f64 {
        self.norm
    }
}
