//! Convergence metrics, step-size bounds, stationarity verdicts and the
//! linearization diagnostics of the Jacobi-form update map.

mod cesaro;
mod diagnostics;
mod stationarity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::objectives::{ObjectiveError, ObjectiveSet};
use crate::point::StackedPoint;

pub use cesaro::{cesaro_rate, cesaro_rates, CesaroRate, CesaroReport, CESARO_MIN_SAMPLES};
pub use diagnostics::{lemma4_certificate, t_map_jacobian, Lemma4Certificate, DET_REL_TOL};
pub use stationarity::{
    classify_point, find_stationary_points, StationaryPoints, StationarySearch, StationarityLabel,
    StationarityVerdict, Tolerances,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("objective does not provide Hessians")]
    NoHessian,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

/// One row of a metric series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub k: usize,
    pub consensus_error: f64,
    pub avg_grad_norm: f64,
    pub objective: f64,
    pub dist_to_targets: Option<f64>,
}

/// `‖x̂ - 1 ⊗ x̄‖`, with `x̄` the block average.
pub fn consensus_error(x: &StackedPoint) -> f64 {
    let avg = x.average_block();
    x.blocks()
        .flat_map(|b| b.iter().zip(&avg).map(|(v, a)| (v - a) * (v - a)))
        .sum::<f64>()
        .sqrt()
}

/// `‖((1/m) 11ᵀ ⊗ I) g‖ = ‖Σ_i g_i‖ / √m` for a stacked gradient `g`.
pub fn avg_gradient_norm_of(grad: &StackedPoint) -> f64 {
    let mut sum = vec![0.0; grad.n()];
    for b in grad.blocks() {
        for (s, v) in sum.iter_mut().zip(b) {
            *s += v;
        }
    }
    sum.iter().map(|v| v * v).sum::<f64>().sqrt() / (grad.m() as f64).sqrt()
}

pub fn avg_gradient_norm(obj: &ObjectiveSet, x: &StackedPoint) -> Result<f64, AnalysisError> {
    Ok(avg_gradient_norm_of(&obj.stacked_gradient(x)?))
}

fn bound_denominator(l: f64) -> f64 {
    6.0 * l.powi(4) + 6.0 * l.powi(3) + 48.0 * l + 1.0
}

fn check_bound_inputs(lambda1_p: f64, l_f: f64) -> Result<(), AnalysisError> {
    if !(0.0..1.0).contains(&lambda1_p) {
        return Err(AnalysisError::Parameter(format!("lambda1(P) must lie in [0, 1), got {lambda1_p}")));
    }
    if !(l_f > 0.0 && l_f.is_finite()) {
        return Err(AnalysisError::Parameter(format!("L_F must be positive, got {l_f}")));
    }
    Ok(())
}

/// `(1 - λ₁(P)²) / (6L⁴ + 6L³ + 48L + 1)`.
pub fn step_bound_thm1(lambda1_p: f64, l_f: f64) -> Result<f64, AnalysisError> {
    check_bound_inputs(lambda1_p, l_f)?;
    Ok((1.0 - lambda1_p * lambda1_p) / bound_denominator(l_f))
}

/// `min{step_bound_thm1, λ_min(V) / L_F}`.
pub fn step_bound_thm2(lambda1_p: f64, l_f: f64, lambda_min_v: f64) -> Result<f64, AnalysisError> {
    let b1 = step_bound_thm1(lambda1_p, l_f)?;
    if !(lambda_min_v > 0.0 && lambda_min_v.is_finite()) {
        return Err(AnalysisError::Parameter(format!("lambda_min(V) must be positive, got {lambda_min_v}")));
    }
    Ok(b1.min(lambda_min_v / l_f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consensus_residual_by_hand() {
        let x = StackedPoint::new(2, 1, vec![1.0, -1.0]).unwrap();
        assert!((consensus_error(&x) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(consensus_error(&StackedPoint::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap()), 0.0);
        assert_eq!(consensus_error(&StackedPoint::consensual(4, &[0.3, -2.0])), 0.0);
    }

    #[test]
    fn bounds_by_hand() {
        assert!((step_bound_thm1(0.0, 1.0).unwrap() - 1.0 / 61.0).abs() < 1e-18);
        assert_eq!(step_bound_thm2(0.0, 1.0, 0.5).unwrap(), 1.0 / 61.0);
        let b = step_bound_thm2(0.0, 100.0, 0.001).unwrap();
        let b1 = 1.0 / bound_denominator(100.0);
        assert_eq!(b, b1.min(1e-5));
        assert!(step_bound_thm1(1.0, 1.0).is_err());
        assert!(step_bound_thm1(0.5, 0.0).is_err());
        assert!(step_bound_thm2(0.5, 1.0, 0.0).is_err());
        assert!(step_bound_thm1(1.0 - 1e-12, 1.0).unwrap() < 1e-12);
    }
}
