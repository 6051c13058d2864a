use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{consensus_error, AnalysisError};
use crate::linalg::symmetric_min_eigenvalue;
use crate::objectives::ObjectiveSet;
use crate::point::StackedPoint;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityLabel {
    Nonconsensual,
    ConsensualNonstationary,
    /// First-order stationary; no Hessian was available to say more.
    ConsensualFirstOrder,
    ConsensualSecondOrder,
    ConsensualStrictSaddle,
}

impl StationarityLabel {
    pub const ALL: [StationarityLabel; 5] = [
        StationarityLabel::Nonconsensual,
        StationarityLabel::ConsensualNonstationary,
        StationarityLabel::ConsensualFirstOrder,
        StationarityLabel::ConsensualSecondOrder,
        StationarityLabel::ConsensualStrictSaddle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StationarityLabel::Nonconsensual => "nonconsensual",
            StationarityLabel::ConsensualNonstationary => "consensual_nonstationary",
            StationarityLabel::ConsensualFirstOrder => "consensual_first_order",
            StationarityLabel::ConsensualSecondOrder => "consensual_second_order",
            StationarityLabel::ConsensualStrictSaddle => "consensual_strict_saddle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub consensus: f64,
    pub grad: f64,
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { consensus: 1e-6, grad: 1e-6, eig: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (name, v) in [("consensus", self.consensus), ("grad", self.grad), ("eig", self.eig)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AnalysisError::Parameter(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityVerdict {
    pub label: StationarityLabel,
    pub consensus_residual: f64,
    /// `‖Σ_i ∇f_i(x̂_i)‖`.
    pub grad_norm: f64,
    /// `λ_min(Σ_i ∇²f_i(x̂_i))`, when Hessians exist.
    pub lambda_min: Option<f64>,
}

/// Consensus first, then the summed gradient, then the sign of the smallest
/// eigenvalue of the summed Hessian. `λ_min ∈ [-tol, ∞)` counts as
/// second order.
pub fn classify_point(
    obj: &ObjectiveSet,
    x: &StackedPoint,
    tol: &Tolerances,
) -> Result<StationarityVerdict, AnalysisError> {
    if x.m() != obj.m() || x.n() != obj.n() {
        return Err(AnalysisError::Shape("point and objective disagree".into()));
    }
    let consensus_residual = consensus_error(x);
    let grad_norm = obj.summed_gradient(x)?.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lambda_min = match obj.summed_hessian(x)? {
        Some(h) => Some(symmetric_min_eigenvalue(&h)?),
        None => None,
    };
    let label = if !(consensus_residual <= tol.consensus) {
        StationarityLabel::Nonconsensual
    } else if !(grad_norm <= tol.grad) {
        StationarityLabel::ConsensualNonstationary
    } else {
        match lambda_min {
            None => StationarityLabel::ConsensualFirstOrder,
            Some(l) if l >= -tol.eig => StationarityLabel::ConsensualSecondOrder,
            Some(_) => StationarityLabel::ConsensualStrictSaddle,
        }
    };
    Ok(StationarityVerdict { label, consensus_residual, grad_norm, lambda_min })
}

/// Multi-start Newton search for stationary points of `f = Σ_i f_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarySearch {
    /// Starts are drawn from the box `[-radius, radius]^n`.
    pub radius: f64,
    /// Lattice starts per axis when `n ≤ 3`.
    pub grid_per_axis: usize,
    /// Uniform random starts when `n > 3`.
    pub random_starts: usize,
    pub seed: u64,
    pub max_newton: usize,
    pub grad_tol: f64,
    pub merge_tol: f64,
    pub eig_tol: f64,
}

impl Default for StationarySearch {
    fn default() -> Self {
        Self {
            radius: 3.0,
            grid_per_axis: 9,
            random_starts: 64,
            seed: 0,
            max_newton: 100,
            grad_tol: 1e-11,
            merge_tol: 1e-6,
            eig_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoints {
    /// `λ_min ≥ -eig_tol`.
    pub second_order: Vec<Vec<f64>>,
    pub strict_saddles: Vec<Vec<f64>>,
}

impl StationaryPoints {
    /// Euclidean distance from `x` to the nearest listed point.
    pub fn distance(points: &[Vec<f64>], x: &[f64]) -> Option<f64> {
        points
            .iter()
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .min_by(f64::total_cmp)
    }

    /// `‖x̂ - 1 ⊗ p‖` minimized over the listed points.
    pub fn stacked_distance(points: &[Vec<f64>], x: &StackedPoint) -> Option<f64> {
        points
            .iter()
            .map(|p| x.blocks().flat_map(|b| b.iter().zip(p).map(|(a, c)| (a - c) * (a - c))).sum::<f64>().sqrt())
            .min_by(f64::total_cmp)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton(obj: &ObjectiveSet, start: Vec<f64>, s: &StationarySearch) -> Option<Vec<f64>> {
    let mut x = start;
    let mut g = obj.aggregate_gradient(&x);
    for _ in 0..s.max_newton {
        let gn = norm(&g);
        if gn <= s.grad_tol {
            return Some(x);
        }
        let h = obj.aggregate_hessian(&x)?;
        let dir = match h.clone().lu().solve(&DVector::from_column_slice(&g)) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d.iter().map(|v| -v).collect::<Vec<_>>(),
            _ => g.iter().map(|v| -v).collect(),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let gt = obj.aggregate_gradient(&trial);
            if norm(&gt) < gn {
                x = trial;
                g = gt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || x.iter().any(|v| !v.is_finite() || v.abs() > 1e3 * s.radius.max(1.0)) {
            return None;
        }
    }
    (norm(&g) <= s.grad_tol).then_some(x)
}

fn lattice(n: usize, per_axis: usize, radius: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if per_axis <= 1 {
        vec![0.0]
    } else {
        (0..per_axis).map(|t| -radius + 2.0 * radius * t as f64 / (per_axis - 1) as f64).collect()
    };
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(*a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Finds and classifies stationary points of the aggregate objective.
/// Results are deduplicated and sorted lexicographically.
pub fn find_stationary_points(obj: &ObjectiveSet, s: &StationarySearch) -> Result<StationaryPoints, AnalysisError> {
    let n = obj.n();
    if obj.aggregate_hessian(&vec![0.0; n]).is_none() {
        return Err(AnalysisError::NoHessian);
    }
    if !(s.radius > 0.0) {
        return Err(AnalysisError::Parameter(format!("search radius must be positive, got {}", s.radius)));
    }
    let starts = if n <= 3 {
        lattice(n, s.grid_per_axis, s.radius)
    } else {
        let mut rng = Stream::new(s.seed, 0);
        let mut v = vec![vec![0.0; n]];
        v.extend((0..s.random_starts).map(|_| (0..n).map(|_| rng.uniform_in(-s.radius, s.radius)).collect()));
        v
    };
    let mut found: Vec<Vec<f64>> = Vec::new();
    for start in starts {
        if let Some(p) = newton(obj, start, s) {
            let dup = found.iter().any(|q| {
                q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= s.merge_tol * (1.0 + a.abs()))
            });
            if !dup {
                found.push(p);
            }
        }
    }
    found.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = StationaryPoints::default();
    for p in found {
        let h: DMatrix<f64> = obj.aggregate_hessian(&p).ok_or(AnalysisError::NoHessian)?;
        if symmetric_min_eigenvalue(&h)? >= -s.eig_tol {
            out.second_order.push(p);
        } else {
            out.strict_saddles.push(p);
        }
    }
    Ok(out)
}
