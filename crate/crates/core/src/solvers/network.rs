use rayon::prelude::*;

use super::extra::{agent_kernel, AgentInputs, AgentOutputs, ExtraForm};
use super::{check_divergence, check_shapes, weighted_sum, SolverError};
use crate::graph::NetworkGraph;
use crate::mixing::MixingPair;
use crate::objectives::{LocalObjective, ObjectiveSet};
use crate::point::StackedPoint;

/// What agent `i` knows about the network: its neighbor list and the matching
/// entries of its rows of `W`, `V` and `W - V`. Nothing else.
#[derive(Debug, Clone)]
pub struct AgentView {
    id: usize,
    neighbors: Vec<usize>,
    /// `(j, W_ij)` over `{i} ∪ N(i)`, ascending `j`.
    w: Vec<(usize, f64)>,
    v: Vec<(usize, f64)>,
    d: Vec<(usize, f64)>,
}

impl AgentView {
    pub fn new(id: usize, g: &NetworkGraph, pair: &MixingPair) -> Self {
        let neighbors = g.neighbors(id).to_vec();
        let mut support: Vec<usize> = neighbors.iter().copied().chain([id]).collect();
        support.sort_unstable();
        let row = |a: &nalgebra::DMatrix<f64>| support.iter().map(|&j| (j, a[(id, j)])).collect();
        Self { id, w: row(pair.w()), v: row(pair.v()), d: row(pair.w_minus_v()), neighbors }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }
}

/// Values one agent broadcasts to its neighbors at the start of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub k: usize,
    pub x: Vec<f64>,
    /// `x_i^{k-1}`, present when the form needs it and `k ≥ 1`.
    pub prev: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub k: usize,
    pub x: Vec<f64>,
    pub grad: Vec<f64>,
    /// `(x_i^{k-1}, ∇f_i(x_i^{k-1}))` for the recurrence form.
    pub prev: Option<(Vec<f64>, Vec<f64>)>,
    pub companion: Vec<f64>,
}

impl AgentState {
    pub fn outgoing(&self, id: usize) -> Message {
        Message { from: id, k: self.k, x: self.x.clone(), prev: self.prev.as_ref().map(|(x, _)| x.clone()) }
    }
}

fn gather<'a>(
    view: &AgentView,
    local: &'a [f64],
    inbox: &'a [Message],
    pick: impl Fn(&'a Message) -> Option<&'a [f64]>,
    row: &[(usize, f64)],
    row_sum: f64,
    out: &mut [f64],
) -> Result<(), SolverError> {
    let mut terms = Vec::with_capacity(row.len());
    for &(j, a) in row {
        if j == view.id {
            terms.push((a, local));
            continue;
        }
        let msg = inbox.iter().find(|msg| msg.from == j).ok_or_else(|| SolverError::Protocol {
            edge: (view.id + 1, j + 1),
            detail: "no message from neighbor".into(),
        })?;
        let values = pick(msg).ok_or_else(|| SolverError::Protocol {
            edge: (view.id + 1, j + 1),
            detail: "message lacks the previous iterate".into(),
        })?;
        terms.push((a, values));
    }
    weighted_sum(local, row_sum, terms.into_iter(), out);
    Ok(())
}

/// Agent `i`'s half of a synchronous EXTRA round. `inbox` must hold exactly
/// one current-round message per neighbor.
pub fn neighbor_view_step(
    view: &AgentView,
    f: &dyn LocalObjective,
    form: ExtraForm,
    alpha: f64,
    local: &AgentState,
    inbox: &[Message],
) -> Result<(AgentState, Message), SolverError> {
    for (idx, msg) in inbox.iter().enumerate() {
        let edge = (view.id + 1, msg.from + 1);
        if !view.neighbors.contains(&msg.from) {
            return Err(SolverError::Protocol { edge, detail: "sender is not a neighbor".into() });
        }
        if inbox[..idx].iter().any(|o| o.from == msg.from) {
            return Err(SolverError::Protocol { edge, detail: "duplicate message".into() });
        }
        if msg.k != local.k {
            return Err(SolverError::Protocol {
                edge,
                detail: format!("message from round {} during round {}", msg.k, local.k),
            });
        }
    }
    let n = local.x.len();
    let mut wx = vec![0.0; n];
    let mut second = vec![0.0; n];
    gather(view, &local.x, inbox, |m| Some(&m.x), &view.w, 1.0, &mut wx)?;
    let grad_prev = match (form, &local.prev) {
        (ExtraForm::Recurrence, Some((xp, gp))) => {
            gather(view, xp, inbox, |m| m.prev.as_deref(), &view.v, 1.0, &mut second)?;
            Some(gp.as_slice())
        }
        (ExtraForm::Recurrence, None) => None,
        _ => {
            gather(view, &local.x, inbox, |m| Some(&m.x), &view.d, 0.0, &mut second)?;
            None
        }
    };
    let mut next = AgentState {
        k: local.k + 1,
        x: vec![0.0; n],
        grad: vec![0.0; n],
        prev: None,
        companion: vec![0.0; n],
    };
    let inp = AgentInputs {
        x: &local.x,
        grad: &local.grad,
        grad_prev,
        companion: &local.companion,
        wx: &wx,
        second: &second,
    };
    let out = AgentOutputs { x: &mut next.x, companion: &mut next.companion, grad: &mut next.grad };
    agent_kernel(form, alpha, f, inp, out);
    check_divergence(next.k, &next.x)?;
    check_divergence(next.k, &next.companion)?;
    if form.needs_previous() {
        next.prev = Some((local.x.clone(), local.grad.clone()));
    }
    let msg = next.outgoing(view.id);
    Ok((next, msg))
}

/// Synchronous EXTRA over explicit per-agent states and messages. Agents run
/// in parallel within a round; the barrier is the end of [`Network::round`].
#[derive(Debug)]
pub struct Network<'a> {
    form: ExtraForm,
    alpha: f64,
    obj: &'a ObjectiveSet,
    views: Vec<AgentView>,
    agents: Vec<AgentState>,
    outboxes: Vec<Message>,
}

impl<'a> Network<'a> {
    pub fn new(
        g: &NetworkGraph,
        pair: &MixingPair,
        obj: &'a ObjectiveSet,
        x0: &StackedPoint,
        alpha: f64,
        form: ExtraForm,
    ) -> Result<Self, SolverError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SolverError::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        check_shapes(x0, pair, obj)?;
        if g.m() != pair.m() {
            return Err(SolverError::Shape(format!("graph has {} agents, mixing pair {}", g.m(), pair.m())));
        }
        let views: Vec<AgentView> = (0..g.m()).map(|i| AgentView::new(i, g, pair)).collect();
        let agents: Vec<AgentState> = (0..g.m())
            .map(|i| {
                let x = x0.block(i).to_vec();
                let mut grad = vec![0.0; x.len()];
                obj.local(i).gradient(&x, &mut grad);
                let companion = match form {
                    ExtraForm::Dynamical => grad.iter().map(|g| -alpha * g).collect(),
                    _ => vec![0.0; x.len()],
                };
                AgentState { k: 0, x, grad, prev: None, companion }
            })
            .collect();
        let outboxes = agents.iter().enumerate().map(|(i, a)| a.outgoing(i)).collect();
        Ok(Self { form, alpha, obj, views, agents, outboxes })
    }

    /// Runs one round and returns the number of directed messages delivered.
    pub fn round(&mut self) -> Result<usize, SolverError> {
        let inboxes: Vec<Vec<Message>> = self
            .views
            .iter()
            .map(|v| v.neighbors.iter().map(|&j| self.outboxes[j].clone()).collect())
            .collect();
        let delivered = inboxes.iter().map(Vec::len).sum();
        let results: Vec<Result<(AgentState, Message), SolverError>> = self
            .views
            .par_iter()
            .zip(self.agents.par_iter())
            .zip(inboxes.par_iter())
            .map(|((view, local), inbox)| {
                neighbor_view_step(view, self.obj.local(view.id), self.form, self.alpha, local, inbox)
            })
            .collect();
        let mut agents = Vec::with_capacity(results.len());
        let mut outboxes = Vec::with_capacity(results.len());
        for r in results {
            let (state, msg) = r?;
            agents.push(state);
            outboxes.push(msg);
        }
        self.agents = agents;
        self.outboxes = outboxes;
        Ok(delivered)
    }

    pub fn k(&self) -> usize {
        self.agents.first().map_or(0, |a| a.k)
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn views(&self) -> &[AgentView] {
        &self.views
    }

    pub fn iterate(&self) -> StackedPoint {
        let blocks: Vec<Vec<f64>> = self.agents.iter().map(|a| a.x.clone()).collect();
        StackedPoint::from_blocks(&blocks).expect("agents share a dimension")
    }
}
