use std::sync::Arc;

use nalgebra::DMatrix;

use super::{LocalObjective, ObjectiveError, ObjectiveSet};

/// `(1/m)(¼x₁⁴ - ½x₁² + ½Σ_{j≥2} x_j²)`. Summed over `m` identical agents
/// this has minimizers at `±e₁` and a strict saddle at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct IdenticalQuartic {
    m: usize,
    n: usize,
}

impl IdenticalQuartic {
    pub fn new(m: usize, n: usize) -> Result<Self, ObjectiveError> {
        if m == 0 || n == 0 {
            return Err(ObjectiveError::Parameter(format!("need m, n >= 1 (got m = {m}, n = {n})")));
        }
        Ok(Self { m, n })
    }

    /// `m` copies of the same local function.
    pub fn set(m: usize, n: usize) -> Result<ObjectiveSet, ObjectiveError> {
        let f: Arc<dyn LocalObjective> = Arc::new(Self::new(m, n)?);
        ObjectiveSet::new(vec![f; m])
    }
}

impl LocalObjective for IdenticalQuartic {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let x1 = x[0];
        let rest: f64 = x[1..].iter().map(|v| v * v).sum();
        (0.25 * x1.powi(4) - 0.5 * x1 * x1 + 0.5 * rest) / self.m as f64
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let inv_m = 1.0 / self.m as f64;
        out[0] = inv_m * (x[0].powi(3) - x[0]);
        for (o, v) in out[1..].iter_mut().zip(&x[1..]) {
            *o = inv_m * v;
        }
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let inv_m = 1.0 / self.m as f64;
        let mut h = DMatrix::identity(self.n, self.n) * inv_m;
        h[(0, 0)] = inv_m * (3.0 * x[0] * x[0] - 1.0);
        Some(h)
    }

    /// Exact: `max_{|x₁| ≤ r} max(|3x₁² - 1|, 1) / m`.
    fn lipschitz(&self, radius: f64) -> f64 {
        (3.0 * radius * radius - 1.0).max(1.0) / self.m as f64
    }
}
