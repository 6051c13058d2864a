//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{StationarySearch, Tolerances};
use crate::graph::GraphSpec;
use crate::mixing::MixingSpec;
use crate::objectives::ObjectiveSpec;
use crate::point::StackedPoint;
use crate::rng::Stream;
use crate::solvers::SolverKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    pub(crate) fn field(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Validation { field: field.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub mixing: MixingSpec,
    pub objective: ObjectiveSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub metrics: MetricsSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fig1: Option<Fig1Spec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub alpha_mode: AlphaMode,
    pub iters: usize,
}

/// `{ fixed = 0.2 }`, `"theoretical_thm1"`, `"theoretical_thm2"` or
/// `{ diminishing = { a = 2.0, b = 1.0 } }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Fixed(f64),
    TheoreticalThm1,
    TheoreticalThm2,
    Diminishing { a: f64, b: f64 },
}

/// Multiplier applied to the theoretical bounds, which are strict.
pub const THEORETICAL_SAFETY: f64 = 0.99;

/// Initial-point distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitDistribution {
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Either one block shared by every agent or the full stacked vector.
    Point { values: Vec<f64> },
}

impl InitDistribution {
    pub fn validate(&self, field: &str) -> Result<(), ConfigError> {
        match *self {
            InitDistribution::Gaussian { mean, std } if !(mean.is_finite() && std > 0.0 && std.is_finite()) => {
                Err(ConfigError::field(field, format!("gaussian needs finite mean and std > 0 (got {mean}, {std})")))
            }
            InitDistribution::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(ConfigError::field(field, format!("uniform needs finite lo < hi (got {lo}, {hi})")))
            }
            InitDistribution::Point { ref values } if values.iter().any(|v| !v.is_finite()) => {
                Err(ConfigError::field(field, "point values must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, InitDistribution::Point { .. })
    }

    /// Agents in order, coordinates in order, all from `stream`.
    pub fn draw(&self, m: usize, n: usize, stream: &mut Stream) -> Result<StackedPoint, ConfigError> {
        let data: Vec<f64> = match self {
            InitDistribution::Gaussian { mean, std } => (0..m * n).map(|_| stream.normal(*mean, *std)).collect(),
            InitDistribution::Uniform { lo, hi } => (0..m * n).map(|_| stream.uniform_in(*lo, *hi)).collect(),
            InitDistribution::Point { values } if values.len() == n => {
                return Ok(StackedPoint::consensual(m, values));
            }
            InitDistribution::Point { values } if values.len() == m * n => values.clone(),
            InitDistribution::Point { values } => {
                return Err(ConfigError::field(
                    "init.distribution.values",
                    format!("expected {n} or {} values, got {}", m * n, values.len()),
                ))
            }
        };
        Ok(StackedPoint::new(m, n, data).expect("length m * n"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub distribution: InitDistribution,
    #[serde(default)]
    pub seed: u64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self { distribution: InitDistribution::Gaussian { mean: 0.0, std: 1.0 }, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSpec {
    pub objective: bool,
    pub dist_to_targets: bool,
    /// 1-based agent whose distance to the minimizer set is recorded.
    pub track_agent: usize,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self { objective: true, dist_to_targets: true, track_agent: 5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub tolerances: Tolerances,
    pub search: StationarySearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub trials: usize,
    pub init: InitDistribution,
    pub master_seed: u64,
    #[serde(default = "default_target_tol")]
    pub saddle_tol: f64,
    #[serde(default = "default_target_tol")]
    pub conv_tol: f64,
    /// Worker threads; the summary does not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_target_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Spec {
    pub extra_alpha: f64,
    pub dgd_a: f64,
    pub dgd_b: f64,
    /// Distance from the saddle along its stable direction for the bad start.
    pub bad_init_offset: f64,
    /// Per-coordinate Gaussian jitter around the bad start.
    pub bad_init_noise: f64,
}

impl Default for Fig1Spec {
    fn default() -> Self {
        Self { extra_alpha: 0.2, dgd_a: 2.0, dgd_b: 1.0, bad_init_offset: 2.0, bad_init_noise: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("extra-lab-out") }
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// Parses and validates a config held in memory.
pub fn parse_config(src: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
        ConfigError::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&src)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Field-level checks that do not need to build the instance.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.mixing.theta > 0.0 && self.mixing.theta <= 0.5) {
            return Err(ConfigError::field("mixing.theta", format!("must lie in (0, 1/2], got {}", self.mixing.theta)));
        }
        if let Some(beta) = self.mixing.lazify_beta {
            if !(0.0..1.0).contains(&beta) {
                return Err(ConfigError::field("mixing.lazify_beta", format!("must lie in [0, 1), got {beta}")));
            }
        }
        match &self.objective {
            ObjectiveSpec::BilinearLogistic { eta, lipschitz_radius, .. } => {
                positive("objective.eta", *eta)?;
                positive("objective.lipschitz_radius", *lipschitz_radius)?;
            }
            ObjectiveSpec::IdenticalQuartic { n, lipschitz_radius } => {
                if *n == 0 {
                    return Err(ConfigError::field("objective.n", "must be at least 1"));
                }
                positive("objective.lipschitz_radius", *lipschitz_radius)?;
            }
            ObjectiveSpec::Quadratic { .. } => {}
        }
        if self.solver.iters == 0 {
            return Err(ConfigError::field("solver.iters", "must be at least 1"));
        }
        match self.solver.alpha_mode {
            AlphaMode::Fixed(a) => positive("solver.alpha_mode.fixed", a)?,
            AlphaMode::Diminishing { a, b } => {
                if self.solver.kind != SolverKind::Dgd {
                    return Err(ConfigError::field(
                        "solver.alpha_mode",
                        "diminishing step sizes are only defined for dgd; EXTRA uses a constant step",
                    ));
                }
                positive("solver.alpha_mode.diminishing.a", a)?;
                positive("solver.alpha_mode.diminishing.b", b)?;
            }
            AlphaMode::TheoreticalThm1 | AlphaMode::TheoreticalThm2 => {}
        }
        self.init.distribution.validate("init.distribution")?;
        if self.metrics.track_agent == 0 || self.metrics.track_agent > self.graph.m {
            return Err(ConfigError::field(
                "metrics.track_agent",
                format!("must lie in 1..={}, got {}", self.graph.m, self.metrics.track_agent),
            ));
        }
        let tol = &self.analysis.tolerances;
        for (name, v) in [("consensus", tol.consensus), ("grad", tol.grad), ("eig", tol.eig)] {
            positive(&format!("analysis.tolerances.{name}"), v)?;
        }
        positive("analysis.search.radius", self.analysis.search.radius)?;
        if let Some(mc) = &self.monte_carlo {
            if mc.trials == 0 {
                return Err(ConfigError::field("monte_carlo.trials", "must be at least 1"));
            }
            if mc.init.is_point_mass() {
                return Err(ConfigError::field(
                    "monte_carlo.init",
                    "a point-mass initialization is atomic; use gaussian or uniform",
                ));
            }
            mc.init.validate("monte_carlo.init")?;
            positive("monte_carlo.saddle_tol", mc.saddle_tol)?;
            positive("monte_carlo.conv_tol", mc.conv_tol)?;
            if mc.threads == Some(0) {
                return Err(ConfigError::field("monte_carlo.threads", "must be at least 1"));
            }
        }
        if let Some(f) = &self.fig1 {
            positive("fig1.extra_alpha", f.extra_alpha)?;
            positive("fig1.dgd_a", f.dgd_a)?;
            positive("fig1.dgd_b", f.dgd_b)?;
            if !(f.bad_init_offset.is_finite() && f.bad_init_noise >= 0.0 && f.bad_init_noise.is_finite()) {
                return Err(ConfigError::field("fig1", "bad_init_offset must be finite and bad_init_noise >= 0"));
            }
        }
        Ok(())
    }
}
