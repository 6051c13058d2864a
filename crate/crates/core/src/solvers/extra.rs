use serde::{Deserialize, Serialize};

use super::{check_divergence, check_shapes, weighted_sum, Solver, SolverError};
use crate::mixing::MixingPair;
use crate::objectives::{LocalObjective, ObjectiveSet};
use crate::point::StackedPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraForm {
    /// Two-term recurrence on `(x̂^{k+1}, x̂^k)` with gradient memory.
    Recurrence,
    /// `x̂^{k+1} = Ŵx̂^k + ẑ^k`, `ẑ^{k+1} = (Ŵ - V̂)x̂^k + ẑ^k - α[∇F(x̂^{k+1}) - ∇F(x̂^k)]`.
    Dynamical,
    /// `x̂^{k+1} = Ŵx̂^k + ŷ^k - α∇F(x̂^k)`, `ŷ^{k+1} = (Ŵ - V̂)x̂^k + ŷ^k`.
    Jacobi,
}

impl ExtraForm {
    pub const ALL: [ExtraForm; 3] = [ExtraForm::Recurrence, ExtraForm::Dynamical, ExtraForm::Jacobi];

    /// Whether a round needs neighbors' previous iterates as well.
    pub fn needs_previous(self) -> bool {
        self == ExtraForm::Recurrence
    }
}

#[derive(Debug, Clone)]
pub struct ExtraState {
    form: ExtraForm,
    alpha: f64,
    k: usize,
    x: StackedPoint,
    grad: StackedPoint,
    /// `x̂^{k-1}` and `∇F(x̂^{k-1})`, recurrence form only and `k ≥ 1`.
    prev: Option<(StackedPoint, StackedPoint)>,
    /// `ẑ^k` (dynamical) or `ŷ^k` (Jacobi); zeros for the recurrence.
    companion: StackedPoint,
}

pub fn extra_init(
    x0: StackedPoint,
    alpha: f64,
    pair: &MixingPair,
    obj: &ObjectiveSet,
    form: ExtraForm,
) -> Result<ExtraState, SolverError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SolverError::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    check_shapes(&x0, pair, obj)?;
    check_divergence(0, x0.as_slice())?;
    let grad = obj.stacked_gradient(&x0).map_err(|e| SolverError::Shape(e.to_string()))?;
    let mut companion = StackedPoint::zeros(x0.m(), x0.n());
    if form == ExtraForm::Dynamical {
        for (c, g) in companion.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *c = -alpha * g;
        }
    }
    Ok(ExtraState { form, alpha, k: 0, x: x0, grad, prev: None, companion })
}

impl ExtraState {
    pub fn form(&self) -> ExtraForm {
        self.form
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn companion(&self) -> &StackedPoint {
        &self.companion
    }

    pub fn previous(&self) -> Option<&StackedPoint> {
        self.prev.as_ref().map(|(x, _)| x)
    }

    /// `ẑ^k`, derived from whatever the form stores. The recurrence form
    /// carries no companion and returns `None`.
    pub fn z(&self) -> Option<StackedPoint> {
        match self.form {
            ExtraForm::Recurrence => None,
            ExtraForm::Dynamical => Some(self.companion.clone()),
            ExtraForm::Jacobi => Some(axpy(-self.alpha, &self.grad, &self.companion)),
        }
    }

    /// `ŷ^k = ẑ^k + α∇F(x̂^k)`.
    pub fn y(&self) -> Option<StackedPoint> {
        match self.form {
            ExtraForm::Recurrence => None,
            ExtraForm::Dynamical => Some(axpy(self.alpha, &self.grad, &self.companion)),
            ExtraForm::Jacobi => Some(self.companion.clone()),
        }
    }
}

fn axpy(a: f64, x: &StackedPoint, y: &StackedPoint) -> StackedPoint {
    let data = x.as_slice().iter().zip(y.as_slice()).map(|(xv, yv)| yv + a * xv).collect();
    StackedPoint::new(x.m(), x.n(), data).expect("same shape")
}

/// Inputs of one agent's round.
pub(crate) struct AgentInputs<'a> {
    pub x: &'a [f64],
    pub grad: &'a [f64],
    pub grad_prev: Option<&'a [f64]>,
    pub companion: &'a [f64],
    /// `Σ_j W_ij x_j^k`.
    pub wx: &'a [f64],
    /// `Σ_j V_ij x_j^{k-1}` (recurrence, `k ≥ 1`) or `Σ_j (W - V)_ij x_j^k`.
    pub second: &'a [f64],
}

/// Outputs of one agent's round: new iterate, companion and gradient.
pub(crate) struct AgentOutputs<'a> {
    pub x: &'a mut [f64],
    pub companion: &'a mut [f64],
    pub grad: &'a mut [f64],
}

/// Per-agent update shared by the aggregate and the message-passing paths.
pub(crate) fn agent_kernel(form: ExtraForm, alpha: f64, f: &dyn LocalObjective, inp: AgentInputs, out: AgentOutputs) {
    match form {
        ExtraForm::Recurrence => {
            match inp.grad_prev {
                None => {
                    for t in 0..out.x.len() {
                        out.x[t] = inp.wx[t] - alpha * inp.grad[t];
                    }
                }
                Some(gp) => {
                    for t in 0..out.x.len() {
                        out.x[t] = inp.x[t] + inp.wx[t] - inp.second[t] - alpha * (inp.grad[t] - gp[t]);
                    }
                }
            }
            f.gradient(out.x, out.grad);
        }
        ExtraForm::Dynamical => {
            for t in 0..out.x.len() {
                out.x[t] = inp.wx[t] + inp.companion[t];
            }
            f.gradient(out.x, out.grad);
            for t in 0..out.x.len() {
                out.companion[t] = inp.second[t] + inp.companion[t] - alpha * (out.grad[t] - inp.grad[t]);
            }
        }
        ExtraForm::Jacobi => {
            for t in 0..out.x.len() {
                out.x[t] = inp.wx[t] + inp.companion[t] - alpha * inp.grad[t];
                out.companion[t] = inp.second[t] + inp.companion[t];
            }
            f.gradient(out.x, out.grad);
        }
    }
}

/// Row `i` of `(A ⊗ I_n) x̂`.
fn mixed_row(a: &nalgebra::DMatrix<f64>, row_sum: f64, i: usize, x: &StackedPoint, out: &mut [f64]) {
    weighted_sum(x.block(i), row_sum, (0..x.m()).map(|j| (a[(i, j)], x.block(j))), out);
}

/// One synchronous round; every agent reads the pre-round snapshot.
pub fn extra_step(state: &mut ExtraState, pair: &MixingPair, obj: &ObjectiveSet) -> Result<(), SolverError> {
    let (m, n) = (state.x.m(), state.x.n());
    if pair.m() != m || obj.m() != m || obj.n() != n {
        return Err(SolverError::Shape("state, mixing pair and objective disagree".into()));
    }
    let mut x_new = StackedPoint::zeros(m, n);
    let mut c_new = StackedPoint::zeros(m, n);
    let mut g_new = StackedPoint::zeros(m, n);
    let mut wx = vec![0.0; n];
    let mut second = vec![0.0; n];
    for i in 0..m {
        mixed_row(pair.w(), 1.0, i, &state.x, &mut wx);
        let grad_prev = match (&state.form, &state.prev) {
            (ExtraForm::Recurrence, Some((xp, gp))) => {
                mixed_row(pair.v(), 1.0, i, xp, &mut second);
                Some(gp.block(i))
            }
            (ExtraForm::Recurrence, None) => None,
            _ => {
                mixed_row(pair.w_minus_v(), 0.0, i, &state.x, &mut second);
                None
            }
        };
        let inp = AgentInputs {
            x: state.x.block(i),
            grad: state.grad.block(i),
            grad_prev,
            companion: state.companion.block(i),
            wx: &wx,
            second: &second,
        };
        let out = AgentOutputs { x: x_new.block_mut(i), companion: c_new.block_mut(i), grad: g_new.block_mut(i) };
        agent_kernel(state.form, state.alpha, obj.local(i), inp, out);
    }
    let k = state.k + 1;
    check_divergence(k, x_new.as_slice())?;
    check_divergence(k, c_new.as_slice())?;
    let old_x = std::mem::replace(&mut state.x, x_new);
    let old_g = std::mem::replace(&mut state.grad, g_new);
    if state.form == ExtraForm::Recurrence {
        state.prev = Some((old_x, old_g));
    }
    state.companion = c_new;
    state.k = k;
    Ok(())
}

impl Solver for ExtraState {
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
        extra_step(self, pair, obj)
    }
}
