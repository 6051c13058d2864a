//! EXTRA in recurrence, dynamical and Jacobi form, the DGD baseline, and a
//! synchronous message-passing engine where each agent only sees what its
//! neighbors send it.

mod dgd;
mod extra;
mod network;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixing::MixingPair;
use crate::objectives::ObjectiveSet;
use crate::point::StackedPoint;

pub use dgd::{dgd_step, DgdState, StepSchedule};
pub use extra::{extra_init, extra_step, ExtraForm, ExtraState};
pub use network::{neighbor_view_step, AgentState, AgentView, Message, Network};

/// Any coordinate beyond this magnitude counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("diverged at iteration {k}: {detail}")]
    Divergence { k: usize, detail: String },
    /// Edges are reported 1-based as `(receiver, sender)`.
    #[error("protocol violation on edge ({}, {}): {detail}", .edge.0, .edge.1)]
    Protocol { edge: (usize, usize), detail: String },
}

/// Algorithm selector as it appears in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ExtraRecurrence,
    ExtraDynamical,
    ExtraJacobi,
    Dgd,
}

impl SolverKind {
    pub fn extra_form(self) -> Option<ExtraForm> {
        match self {
            SolverKind::ExtraRecurrence => Some(ExtraForm::Recurrence),
            SolverKind::ExtraDynamical => Some(ExtraForm::Dynamical),
            SolverKind::ExtraJacobi => Some(ExtraForm::Jacobi),
            SolverKind::Dgd => None,
        }
    }
}

/// Common surface of the iterative solvers.
pub trait Solver: Send {
    fn k(&self) -> usize;

    /// Current stacked iterate `x̂^k`.
    fn iterate(&self) -> &StackedPoint;

    /// Cached `∇F(x̂^k)`; evaluated once per round.
    fn gradient(&self) -> &StackedPoint;

    fn step(&mut self, pair: &MixingPair, obj: &ObjectiveSet) -> Result<(), SolverError>;
}

/// Whatever the observer collected before the solver failed.
#[derive(Debug, Clone)]
pub struct RunFailure<T> {
    pub error: SolverError,
    pub partial: Vec<T>,
}

/// Runs `iters` rounds, calling `observer(k, x̂^k, ∇F(x̂^k))` after each one
/// (so `k` runs over `1..=iters`).
pub fn run<S, T, O>(
    solver: &mut S,
    pair: &MixingPair,
    obj: &ObjectiveSet,
    iters: usize,
    mut observer: O,
) -> Result<Vec<T>, RunFailure<T>>
where
    S: Solver + ?Sized,
    O: FnMut(usize, &StackedPoint, &StackedPoint) -> T,
{
    if iters == 0 {
        return Err(RunFailure { error: SolverError::Parameter("iters must be at least 1".into()), partial: vec![] });
    }
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        if let Err(error) = solver.step(pair, obj) {
            return Err(RunFailure { error, partial: out });
        }
        out.push(observer(solver.k(), solver.iterate(), solver.gradient()));
    }
    Ok(out)
}

pub(crate) fn check_shapes(x0: &StackedPoint, pair: &MixingPair, obj: &ObjectiveSet) -> Result<(), SolverError> {
    if x0.m() != pair.m() || x0.m() != obj.m() {
        return Err(SolverError::Shape(format!(
            "iterate has {} agents, mixing pair {}, objective {}",
            x0.m(),
            pair.m(),
            obj.m()
        )));
    }
    if x0.n() != obj.n() {
        return Err(SolverError::Shape(format!("iterate blocks have length {}, objective dimension {}", x0.n(), obj.n())));
    }
    Ok(())
}

pub(crate) fn check_divergence(k: usize, values: &[f64]) -> Result<(), SolverError> {
    if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(SolverError::Divergence { k, detail: format!("coordinate {idx} = {v:e}") });
    }
    Ok(())
}

/// `Σ_j a_j x_j` over `(weight, block)` pairs, in the given order, skipping
/// zero weights. The aggregate and per-agent paths both go through this so
/// that they round identically.
/// `Σ a_j x_j` evaluated as `row_sum·anchor + Σ a_j (x_j - anchor)`, where
/// `anchor` is the agent's own block and `row_sum` the exact row sum of the
/// mixing matrix (1 for W and V, 0 for W - V). Consensual inputs map exactly.
pub(crate) fn weighted_sum<'a>(
    anchor: &[f64],
    row_sum: f64,
    terms: impl Iterator<Item = (f64, &'a [f64])>,
    out: &mut [f64],
) {
    for (o, c) in out.iter_mut().zip(anchor) {
        *o = row_sum * c;
    }
    for (a, x) in terms {
        if a == 0.0 {
            continue;
        }
        for ((o, v), c) in out.iter_mut().zip(x).zip(anchor) {
            *o += a * (v - c);
        }
    }
}
