use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig};
use super::run::{build_instance, Instance};
use super::HarnessError;
use crate::analysis::{classify_point, StationaryPoints, StationarityLabel};
use crate::rng::Stream;
use crate::solvers::run;

/// Key used in [`MonteCarloSummary::counts`] for trials that diverged.
pub const DIVERGED: &str = "diverged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    /// A stationarity label, or `"diverged"`.
    pub outcome: String,
    /// `‖x̂ - 1 ⊗ s‖` to the nearest strict saddle.
    pub dist_saddle: Option<f64>,
    /// `‖x̂ - 1 ⊗ x*‖` to the nearest second-order stationary point.
    pub dist_second_order: Option<f64>,
    pub saddle_trapped: bool,
    pub second_order_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub iters: usize,
    pub counts: BTreeMap<String, usize>,
    pub saddle_trapped: usize,
    pub second_order_converged: usize,
    pub saddle_trapped_fraction: f64,
    pub second_order_fraction: f64,
    pub targets: StationaryPoints,
    pub per_trial: Vec<TrialOutcome>,
}

fn run_trial(cfg: &ExperimentConfig, inst: &Instance, t: usize) -> Result<TrialOutcome, HarnessError> {
    let mc = cfg.monte_carlo.as_ref().expect("checked by caller");
    let mut stream = Stream::new(mc.master_seed, t as u64);
    let x0 = mc.init.draw(inst.graph.m(), inst.objective.n(), &mut stream)?;
    let mut solver = inst.solver(cfg.solver.kind, inst.schedule(cfg.solver.alpha_mode), x0)?;
    let result = run(solver.as_mut(), &inst.pair, &inst.objective, cfg.solver.iters, |_, _, _| ());
    if result.is_err() {
        return Ok(TrialOutcome {
            trial: t,
            outcome: DIVERGED.into(),
            dist_saddle: None,
            dist_second_order: None,
            saddle_trapped: false,
            second_order_converged: false,
        });
    }
    let x = solver.iterate();
    let verdict = classify_point(&inst.objective, x, &cfg.analysis.tolerances)
        .map_err(|e| HarnessError::Runtime { message: e.to_string(), record: None })?;
    let dist_saddle = StationaryPoints::stacked_distance(&inst.targets.strict_saddles, x);
    let dist_second_order = StationaryPoints::stacked_distance(&inst.targets.second_order, x);
    Ok(TrialOutcome {
        trial: t,
        outcome: verdict.label.as_str().into(),
        dist_saddle,
        dist_second_order,
        saddle_trapped: dist_saddle.is_some_and(|d| d <= mc.saddle_tol),
        second_order_converged: dist_second_order.is_some_and(|d| d <= mc.conv_tol),
    })
}

/// Independent trials drawn from substream `(master_seed, t)`; the summary
/// is the same for any thread count.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloSummary, HarnessError> {
    cfg.validate()?;
    let mc = cfg
        .monte_carlo
        .as_ref()
        .ok_or_else(|| ConfigError::field("monte_carlo", "section is required for a Monte-Carlo study"))?;
    let inst = build_instance(cfg)?;
    let trials = || (0..mc.trials).into_par_iter().map(|t| run_trial(cfg, &inst, t)).collect::<Vec<_>>();
    let results = match mc.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Runtime { message: e.to_string(), record: None })?
            .install(trials),
        None => trials(),
    };
    let per_trial: Vec<TrialOutcome> = results.into_iter().collect::<Result<_, _>>()?;
    let mut counts: BTreeMap<String, usize> =
        StationarityLabel::ALL.iter().map(|l| (l.as_str().to_string(), 0)).collect();
    counts.insert(DIVERGED.into(), 0);
    for o in &per_trial {
        *counts.get_mut(&o.outcome).expect("known outcome") += 1;
    }
    let saddle_trapped = per_trial.iter().filter(|o| o.saddle_trapped).count();
    let second_order_converged = per_trial.iter().filter(|o| o.second_order_converged).count();
    let alpha = match inst.schedule(cfg.solver.alpha_mode) {
        crate::solvers::StepSchedule::Constant { alpha } => alpha,
        s => s.alpha(0),
    };
    Ok(MonteCarloSummary {
        trials: mc.trials,
        master_seed: mc.master_seed,
        alpha,
        iters: cfg.solver.iters,
        counts,
        saddle_trapped,
        second_order_converged,
        saddle_trapped_fraction: saddle_trapped as f64 / mc.trials as f64,
        second_order_fraction: second_order_converged as f64 / mc.trials as f64,
        targets: inst.targets.clone(),
        per_trial,
    })
}
