use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig, Fig1Spec};
use super::run::build_instance;
use super::HarnessError;
use crate::analysis::MetricSample;
use crate::linalg::symmetric_eigen;
use crate::point::StackedPoint;
use crate::rng::Stream;
use crate::solvers::{extra_init, run, DgdState, ExtraForm, RunFailure, Solver, StepSchedule};

/// EXTRA (constant step) against DGD (diminishing step) from one shared
/// start, plus an EXTRA run started next to the saddle's stable direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Result {
    pub spec: Fig1Spec,
    pub seed: u64,
    pub iters: usize,
    /// 1-based agent whose distance is plotted.
    pub agent: usize,
    pub x0: StackedPoint,
    pub extra: Vec<MetricSample>,
    pub dgd: Vec<MetricSample>,
    pub saddle: Vec<f64>,
    pub stable_direction: Vec<f64>,
    pub bad_x0: StackedPoint,
    pub bad: Vec<MetricSample>,
}

impl Fig1Result {
    pub fn final_distance(series: &[MetricSample]) -> Option<f64> {
        series.last().and_then(|s| s.dist_to_targets)
    }
}

pub fn reproduce_fig1(cfg: &ExperimentConfig) -> Result<Fig1Result, HarnessError> {
    cfg.validate()?;
    let spec = cfg.fig1.clone().unwrap_or_default();
    let inst = build_instance(cfg)?;
    if inst.targets.second_order.is_empty() {
        return Err(ConfigError::field("objective", "no minimizers found; the figure needs Hessians").into());
    }
    let saddle = inst
        .targets
        .strict_saddles
        .first()
        .cloned()
        .ok_or_else(|| ConfigError::field("objective", "no strict saddle found for the bad initialization"))?;
    let (m, n) = (inst.graph.m(), inst.objective.n());
    let agent = cfg.metrics.track_agent;
    let form = cfg.solver.kind.extra_form().unwrap_or(ExtraForm::Dynamical);
    let iters = cfg.solver.iters;
    let x0 = cfg.init.distribution.draw(m, n, &mut Stream::new(cfg.init.seed, 0))?;

    let go = |solver: &mut dyn Solver| -> Result<Vec<MetricSample>, HarnessError> {
        run(solver, &inst.pair, &inst.objective, iters, |k, x, g| inst.sample(k, x, g, true, Some(agent - 1)))
            .map_err(|RunFailure { error, .. }| HarnessError::Runtime { message: error.to_string(), record: None })
    };
    let runtime = |e: crate::solvers::SolverError| HarnessError::Runtime { message: e.to_string(), record: None };

    let mut extra = extra_init(x0.clone(), spec.extra_alpha, &inst.pair, &inst.objective, form).map_err(runtime)?;
    let extra_series = go(&mut extra)?;
    let schedule = StepSchedule::Diminishing { a: spec.dgd_a, b: spec.dgd_b };
    let mut dgd = DgdState::new(x0.clone(), schedule, &inst.pair, &inst.objective).map_err(runtime)?;
    let dgd_series = go(&mut dgd)?;

    // Stable direction: eigenvector of the largest eigenvalue of Σ∇²f_i at the saddle.
    let h = inst
        .objective
        .aggregate_hessian(&saddle)
        .ok_or_else(|| ConfigError::field("objective", "no Hessian at the saddle"))?;
    let eig = symmetric_eigen(&h).map_err(|e| HarnessError::Runtime { message: e.to_string(), record: None })?;
    let stable_direction: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
    let mut jitter = Stream::new(cfg.init.seed, 1);
    let mut bad_data = Vec::with_capacity(m * n);
    for _ in 0..m {
        for t in 0..n {
            bad_data.push(saddle[t] + spec.bad_init_offset * stable_direction[t] + jitter.normal(0.0, spec.bad_init_noise));
        }
    }
    let bad_x0 = StackedPoint::new(m, n, bad_data).expect("m * n values");
    let mut bad = extra_init(bad_x0.clone(), spec.extra_alpha, &inst.pair, &inst.objective, form).map_err(runtime)?;
    let bad_series = go(&mut bad)?;

    Ok(Fig1Result {
        spec,
        seed: cfg.init.seed,
        iters,
        agent,
        x0,
        extra: extra_series,
        dgd: dgd_series,
        saddle,
        stable_direction,
        bad_x0,
        bad: bad_series,
    })
}
