//! Local objectives `f_i` and the stacked objective `F(x̂) = Σ_i f_i(x̂_i)`.
//!
//! Shipped instances:
//! * [`BilinearLogistic`]: the scalar bilinear logistic loss with an `η`
//!   regularizer, one sample per agent;
//! * [`Quadratic`]: `½ xᵀ A x + bᵀ x + c`;
//! * [`IdenticalQuartic`]: every agent holds the same double-well
//!   `(1/m)(¼x₁⁴ - ½x₁² + ½Σ_{j≥2} x_j²)`, with a strict saddle at the origin.

mod bilinear;
mod quadratic;
mod quartic;

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::StackedPoint;

pub use bilinear::{generate_bilinear_logistic, BilinearLogistic, BilinearLogisticData, LIPSCHITZ_GRID_STEP, LIPSCHITZ_INFLATION};
pub use quadratic::Quadratic;
pub use quartic::IdenticalQuartic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// One agent's smooth local function on `R^n`.
pub trait LocalObjective: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇f(x)` into `out`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Analytic Hessian, when the instance ships one.
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Gradient Lipschitz constant over the ball `‖x‖ ≤ radius`. Exact for
    /// quadratics, an estimate otherwise.
    fn lipschitz(&self, radius: f64) -> f64;
}

/// `m` local objectives sharing the dimension `n`.
#[derive(Debug, Clone)]
pub struct ObjectiveSet {
    n: usize,
    locals: Vec<Arc<dyn LocalObjective>>,
    dataset: Option<BilinearLogisticData>,
}

impl ObjectiveSet {
    pub fn new(locals: Vec<Arc<dyn LocalObjective>>) -> Result<Self, ObjectiveError> {
        let n = locals
            .first()
            .map(|f| f.dim())
            .ok_or_else(|| ObjectiveError::Shape("need at least one local objective".into()))?;
        if let Some((i, f)) = locals.iter().enumerate().find(|(_, f)| f.dim() != n) {
            return Err(ObjectiveError::Shape(format!(
                "agent {} has dimension {}, expected {n}",
                i + 1,
                f.dim()
            )));
        }
        Ok(Self { n, locals, dataset: None })
    }

    pub(crate) fn with_dataset(mut self, data: BilinearLogisticData) -> Self {
        self.dataset = Some(data);
        self
    }

    pub fn m(&self) -> usize {
        self.locals.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn local(&self, i: usize) -> &dyn LocalObjective {
        self.locals[i].as_ref()
    }

    /// The generating dataset, for bilinear logistic instances.
    pub fn dataset(&self) -> Option<&BilinearLogisticData> {
        self.dataset.as_ref()
    }

    fn check(&self, x: &StackedPoint) -> Result<(), ObjectiveError> {
        if x.m() != self.m() || x.n() != self.n {
            return Err(ObjectiveError::Shape(format!(
                "point has {}x{} blocks, objective expects {}x{}",
                x.m(),
                x.n(),
                self.m(),
                self.n
            )));
        }
        Ok(())
    }

    /// `F(x̂) = Σ_i f_i(x̂_i)`.
    pub fn stacked_value(&self, x: &StackedPoint) -> Result<f64, ObjectiveError> {
        self.check(x)?;
        Ok(self.locals.iter().zip(x.blocks()).map(|(f, b)| f.value(b)).sum())
    }

    /// `∇F(x̂)`, block `i` equal to `∇f_i(x̂_i)`.
    pub fn stacked_gradient(&self, x: &StackedPoint) -> Result<StackedPoint, ObjectiveError> {
        self.check(x)?;
        let mut g = StackedPoint::zeros(self.m(), self.n);
        for (i, f) in self.locals.iter().enumerate() {
            f.gradient(x.block(i), g.block_mut(i));
        }
        Ok(g)
    }

    /// Block-diagonal `∇²F(x̂) = ⊕_i ∇²f_i(x̂_i)`. `None` if some local has no
    /// analytic Hessian.
    pub fn stacked_hessian(&self, x: &StackedPoint) -> Result<Option<DMatrix<f64>>, ObjectiveError> {
        self.check(x)?;
        let n = self.n;
        let mut h = DMatrix::zeros(self.m() * n, self.m() * n);
        for (i, f) in self.locals.iter().enumerate() {
            let Some(hi) = f.hessian(x.block(i)) else {
                return Ok(None);
            };
            h.view_mut((i * n, i * n), (n, n)).copy_from(&hi);
        }
        Ok(Some(h))
    }

    /// `Σ_i ∇f_i(x̂_i)`.
    pub fn summed_gradient(&self, x: &StackedPoint) -> Result<Vec<f64>, ObjectiveError> {
        let g = self.stacked_gradient(x)?;
        let mut sum = vec![0.0; self.n];
        for b in g.blocks() {
            sum.iter_mut().zip(b).for_each(|(s, v)| *s += v);
        }
        Ok(sum)
    }

    /// `Σ_i ∇²f_i(x̂_i)`.
    pub fn summed_hessian(&self, x: &StackedPoint) -> Result<Option<DMatrix<f64>>, ObjectiveError> {
        self.check(x)?;
        let mut sum = DMatrix::zeros(self.n, self.n);
        for (f, b) in self.locals.iter().zip(x.blocks()) {
            match f.hessian(b) {
                Some(h) => sum += h,
                None => return Ok(None),
            }
        }
        Ok(Some(sum))
    }

    /// Aggregate `f(x) = Σ_i f_i(x)` at a single point.
    pub fn aggregate_value(&self, x: &[f64]) -> f64 {
        self.locals.iter().map(|f| f.value(x)).sum()
    }

    pub fn aggregate_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.n];
        let mut buf = vec![0.0; self.n];
        for f in &self.locals {
            f.gradient(x, &mut buf);
            sum.iter_mut().zip(&buf).for_each(|(s, v)| *s += v);
        }
        sum
    }

    pub fn aggregate_hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let mut sum = DMatrix::zeros(self.n, self.n);
        for f in &self.locals {
            sum += f.hessian(x)?;
        }
        Some(sum)
    }

    /// Per-agent `L_{f_i}` over the ball of the given radius.
    pub fn local_lipschitz(&self, radius: f64) -> Result<Vec<f64>, ObjectiveError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(ObjectiveError::Parameter(format!("radius = {radius} must be positive")));
        }
        Ok(self.locals.iter().map(|f| f.lipschitz(radius)).collect())
    }

    /// `L_F = max_i L_{f_i}`.
    pub fn lipschitz_bound(&self, radius: f64) -> Result<f64, ObjectiveError> {
        Ok(self.local_lipschitz(radius)?.into_iter().fold(0.0, f64::max))
    }
}

/// Objective section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    BilinearLogistic {
        eta: f64,
        seed: u64,
        /// Radius of the ball used to estimate `L_F`.
        #[serde(default = "default_lipschitz_radius")]
        lipschitz_radius: f64,
    },
    Quadratic {
        /// One symmetric `n x n` matrix per agent, rows listed in order.
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offsets: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constants: Option<Vec<f64>>,
    },
    IdenticalQuartic {
        n: usize,
        #[serde(default = "default_lipschitz_radius")]
        lipschitz_radius: f64,
    },
}

fn default_lipschitz_radius() -> f64 {
    3.0
}

impl ObjectiveSpec {
    pub fn build(&self, m: usize) -> Result<ObjectiveSet, ObjectiveError> {
        match self {
            Self::BilinearLogistic { eta, seed, .. } => generate_bilinear_logistic(m, *eta, *seed),
            Self::Quadratic { matrices, offsets, constants } => {
                if matrices.len() != m {
                    return Err(ObjectiveError::Shape(format!(
                        "{} quadratic matrices for {m} agents",
                        matrices.len()
                    )));
                }
                if let Some(b) = offsets {
                    if b.len() != m {
                        return Err(ObjectiveError::Shape(format!(
                            "{} quadratic offsets for {m} agents",
                            b.len()
                        )));
                    }
                }
                if constants.as_ref().is_some_and(|c| c.len() != m) {
                    return Err(ObjectiveError::Shape(format!("quadratic constants must have {m} entries")));
                }
                let mut locals: Vec<Arc<dyn LocalObjective>> = Vec::with_capacity(m);
                for (i, rows) in matrices.iter().enumerate() {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(ObjectiveError::Shape(format!("matrix {} is not square", i + 1)));
                    }
                    let a = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
                    let b = match offsets {
                        Some(b) => b[i].clone(),
                        None => vec![0.0; n],
                    };
                    let c = constants.as_ref().map_or(0.0, |c| c[i]);
                    locals.push(Arc::new(Quadratic::new(a, b)?.with_constant(c)));
                }
                ObjectiveSet::new(locals)
            }
            Self::IdenticalQuartic { n, .. } => IdenticalQuartic::set(m, *n),
        }
    }

    /// Radius used for Lipschitz estimates; quadratics ignore it.
    pub fn lipschitz_radius(&self) -> f64 {
        match self {
            Self::BilinearLogistic { lipschitz_radius, .. }
            | Self::IdenticalQuartic { lipschitz_radius, .. } => *lipschitz_radius,
            Self::Quadratic { .. } => 1.0,
        }
    }

    /// Whether the Lipschitz constant is only valid inside a ball.
    pub fn ball_restricted(&self) -> bool {
        !matches!(self, Self::Quadratic { .. })
    }
}
