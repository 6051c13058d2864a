use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{AlphaMode, ConfigError, ExperimentConfig, THEORETICAL_SAFETY};
use super::HarnessError;
use crate::analysis::{
    avg_gradient_norm_of, classify_point, consensus_error, find_stationary_points, step_bound_thm1, step_bound_thm2,
    AnalysisError, MetricSample, StationaryPoints, StationarityVerdict,
};
use crate::graph::NetworkGraph;
use crate::mixing::MixingPair;
use crate::objectives::ObjectiveSet;
use crate::point::StackedPoint;
use crate::rng::Stream;
use crate::solvers::{extra_init, run, DgdState, Solver, SolverKind, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lambda1_p: f64,
    pub lambda_min_v: f64,
    pub l_f: f64,
    pub lipschitz_radius: f64,
    pub thm1: f64,
    pub thm2: f64,
}

/// Everything a config describes before any iteration happens.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: NetworkGraph,
    pub pair: MixingPair,
    pub objective: ObjectiveSet,
    pub bounds: Bounds,
    /// Stationary points of `Σ_i f_i`; empty when Hessians are unavailable.
    pub targets: StationaryPoints,
}

pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance, ConfigError> {
    let graph = cfg.graph.build().map_err(|e| ConfigError::field("graph", e))?;
    let pair = cfg.mixing.build(&graph).map_err(|e| ConfigError::field("mixing", e))?;
    let objective = cfg.objective.build(graph.m()).map_err(|e| ConfigError::field("objective", e))?;
    let radius = cfg.objective.lipschitz_radius();
    let l_f = objective.lipschitz_bound(radius).map_err(|e| ConfigError::field("objective", e))?;
    let thm1 = step_bound_thm1(pair.lambda1_p(), l_f).map_err(|e| ConfigError::field("objective", e))?;
    let thm2 =
        step_bound_thm2(pair.lambda1_p(), l_f, pair.lambda_min_v()).map_err(|e| ConfigError::field("mixing", e))?;
    let bounds =
        Bounds { lambda1_p: pair.lambda1_p(), lambda_min_v: pair.lambda_min_v(), l_f, lipschitz_radius: radius, thm1, thm2 };
    let targets = match find_stationary_points(&objective, &cfg.analysis.search) {
        Ok(t) => t,
        Err(AnalysisError::NoHessian) => StationaryPoints::default(),
        Err(e) => return Err(ConfigError::field("analysis.search", e)),
    };
    Ok(Instance { graph, pair, objective, bounds, targets })
}

impl Instance {
    /// Step-size rule the config asks for, with theoretical modes resolved.
    pub fn schedule(&self, mode: AlphaMode) -> StepSchedule {
        match mode {
            AlphaMode::Fixed(alpha) => StepSchedule::Constant { alpha },
            AlphaMode::TheoreticalThm1 => StepSchedule::Constant { alpha: THEORETICAL_SAFETY * self.bounds.thm1 },
            AlphaMode::TheoreticalThm2 => StepSchedule::Constant { alpha: THEORETICAL_SAFETY * self.bounds.thm2 },
            AlphaMode::Diminishing { a, b } => StepSchedule::Diminishing { a, b },
        }
    }

    pub fn solver(
        &self,
        kind: SolverKind,
        schedule: StepSchedule,
        x0: StackedPoint,
    ) -> Result<Box<dyn Solver>, HarnessError> {
        let runtime = |e: crate::solvers::SolverError| HarnessError::Runtime { message: e.to_string(), record: None };
        match (kind.extra_form(), schedule) {
            (Some(form), StepSchedule::Constant { alpha }) => {
                Ok(Box::new(extra_init(x0, alpha, &self.pair, &self.objective, form).map_err(runtime)?))
            }
            (Some(_), StepSchedule::Diminishing { .. }) => {
                Err(ConfigError::field("solver.alpha_mode", "EXTRA needs a constant step size").into())
            }
            (None, s) => Ok(Box::new(DgdState::new(x0, s, &self.pair, &self.objective).map_err(runtime)?)),
        }
    }

    /// Metric row at `x̂^k`. `track` is 0-based.
    pub fn sample(&self, k: usize, x: &StackedPoint, grad: &StackedPoint, objective: bool, track: Option<usize>) -> MetricSample {
        MetricSample {
            k,
            consensus_error: consensus_error(x),
            avg_grad_norm: avg_gradient_norm_of(grad),
            objective: if objective { self.objective.stacked_value(x).unwrap_or(f64::NAN) } else { f64::NAN },
            dist_to_targets: track.and_then(|a| StationaryPoints::distance(&self.targets.second_order, x.block(a))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub solver: SolverKind,
    pub schedule: StepSchedule,
    pub bounds: Bounds,
    pub targets: StationaryPoints,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub series: Vec<MetricSample>,
    pub verdict: Option<StationarityVerdict>,
    pub final_iterate: Option<StackedPoint>,
    pub wall_time_s: f64,
    pub meta: RunMeta,
    pub error: Option<String>,
}

/// Runs the configured solver once from `init` (seeded by `init.seed`).
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let x0 = cfg.init.distribution.draw(inst.graph.m(), inst.objective.n(), &mut Stream::new(cfg.init.seed, 0))?;
    run_from(cfg, &inst, x0, cfg.init.seed)
}

pub(crate) fn run_from(
    cfg: &ExperimentConfig,
    inst: &Instance,
    x0: StackedPoint,
    seed: u64,
) -> Result<RunRecord, HarnessError> {
    let schedule = inst.schedule(cfg.solver.alpha_mode);
    let mut solver = inst.solver(cfg.solver.kind, schedule, x0)?;
    let track = cfg.metrics.dist_to_targets.then_some(cfg.metrics.track_agent - 1);
    let radius = inst.bounds.lipschitz_radius;
    let mut max_norm: f64 = 0.0;
    let started = Instant::now();
    let outcome = run(solver.as_mut(), &inst.pair, &inst.objective, cfg.solver.iters, |k, x, g| {
        max_norm = max_norm.max(x.max_block_norm());
        inst.sample(k, x, g, cfg.metrics.objective, track)
    });
    let wall_time_s = started.elapsed().as_secs_f64();
    let mut warnings = Vec::new();
    if cfg.objective.ball_restricted() && max_norm > radius {
        warnings.push(format!(
            "iterates left the ball of radius {radius} used for L_F (max agent norm {max_norm:.6e})"
        ));
    }
    let meta = RunMeta { solver: cfg.solver.kind, schedule, bounds: inst.bounds, targets: inst.targets.clone(), warnings };
    let (series, error) = match outcome {
        Ok(s) => (s, None),
        Err(f) => (f.partial, Some(f.error.to_string())),
    };
    let final_x = solver.iterate().clone();
    let verdict = match &error {
        None => Some(
            classify_point(&inst.objective, &final_x, &cfg.analysis.tolerances)
                .map_err(|e| HarnessError::Runtime { message: e.to_string(), record: None })?,
        ),
        Some(_) => None,
    };
    let record = RunRecord {
        config: cfg.clone(),
        seed,
        series,
        verdict,
        final_iterate: error.is_none().then_some(final_x),
        wall_time_s,
        meta,
        error: error.clone(),
    };
    match error {
        None => Ok(record),
        Some(message) => Err(HarnessError::Runtime { message, record: Some(Box::new(record)) }),
    }
}
