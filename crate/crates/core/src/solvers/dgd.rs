use serde::{Deserialize, Serialize};

use super::{check_divergence, check_shapes, weighted_sum, Solver, SolverError};
use crate::mixing::MixingPair;
use crate::objectives::ObjectiveSet;
use crate::point::StackedPoint;

/// DGD step-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    Constant { alpha: f64 },
    /// `α_k = a / (k + b)`.
    Diminishing { a: f64, b: f64 },
}

impl StepSchedule {
    pub fn alpha(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Constant { alpha } => alpha,
            StepSchedule::Diminishing { a, b } => a / (k as f64 + b),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = match *self {
            StepSchedule::Constant { alpha } => alpha > 0.0 && alpha.is_finite(),
            StepSchedule::Diminishing { a, b } => a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::Parameter(format!("step schedule {self:?} must be positive for every k")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct DgdState {
    k: usize,
    x: StackedPoint,
    grad: StackedPoint,
    schedule: StepSchedule,
}

impl DgdState {
    pub fn new(x0: StackedPoint, schedule: StepSchedule, pair: &MixingPair, obj: &ObjectiveSet) -> Result<Self, SolverError> {
        schedule.validate()?;
        check_shapes(&x0, pair, obj)?;
        check_divergence(0, x0.as_slice())?;
        let grad = obj.stacked_gradient(&x0).map_err(|e| SolverError::Shape(e.to_string()))?;
        Ok(Self { k: 0, x: x0, grad, schedule })
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }
}

/// `x̂^{k+1} = Ŵx̂^k - α_k ∇F(x̂^k)`.
pub fn dgd_step(state: &mut DgdState, pair: &MixingPair, obj: &ObjectiveSet) -> Result<(), SolverError> {
    let (m, n) = (state.x.m(), state.x.n());
    if pair.m() != m || obj.m() != m || obj.n() != n {
        return Err(SolverError::Shape("state, mixing pair and objective disagree".into()));
    }
    let alpha = state.schedule.alpha(state.k);
    let mut x_new = StackedPoint::zeros(m, n);
    let mut g_new = StackedPoint::zeros(m, n);
    for i in 0..m {
        let row = x_new.block_mut(i);
        weighted_sum(state.x.block(i), 1.0, (0..m).map(|j| (pair.w()[(i, j)], state.x.block(j))), row);
        for (r, g) in row.iter_mut().zip(state.grad.block(i)) {
            *r -= alpha * g;
        }
        obj.local(i).gradient(x_new.block(i), g_new.block_mut(i));
    }
    check_divergence(state.k + 1, x_new.as_slice())?;
    state.x = x_new;
    state.grad = g_new;
    state.k += 1;
    Ok(())
}

impl Solver for DgdState {
    fn k(&self) -> usize {
        self.k
    }

    fn iterate(&self) -> &StackedPoint {
        &self.x
    }

    fn gradient(&self) -> &StackedPoint {
        &self.grad
    }

    fn step(&mut self, pair: &MixingPair, obj: &ObjectiveSet) -> Result<(), SolverError> {
        dgd_step(self, pair, obj)
    }
}
