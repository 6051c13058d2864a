use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::linalg::{determinant, kron_identity, row_norm_product};
use crate::mixing::MixingPair;
use crate::objectives::ObjectiveSet;
use crate::point::StackedPoint;

/// Relative threshold of the invertibility test.
pub const DET_REL_TOL: f64 = 1e-12;

fn stacked_hessian(obj: &ObjectiveSet, x: &StackedPoint, pair: &MixingPair) -> Result<DMatrix<f64>, AnalysisError> {
    if x.m() != pair.m() || x.m() != obj.m() || x.n() != obj.n() {
        return Err(AnalysisError::Shape("point, mixing pair and objective disagree".into()));
    }
    obj.stacked_hessian(x)?.ok_or(AnalysisError::NoHessian)
}

/// Jacobian of the Jacobi-form map `(x̂, ŷ) ↦ (Ŵx̂ + ŷ - α∇F(x̂), (Ŵ - V̂)x̂ + ŷ)`:
///
/// ```text
/// [ Ŵ - α∇²F(x̂)   I ]
/// [ Ŵ - V̂          I ]
/// ```
///
/// It does not depend on `ŷ`.
pub fn t_map_jacobian(
    obj: &ObjectiveSet,
    x: &StackedPoint,
    alpha: f64,
    pair: &MixingPair,
) -> Result<DMatrix<f64>, AnalysisError> {
    let h = stacked_hessian(obj, x, pair)?;
    let n = x.n();
    let d = pair.m() * n;
    let w = kron_identity(pair.w(), n);
    let wv = kron_identity(pair.w_minus_v(), n);
    let mut dt = DMatrix::zeros(2 * d, 2 * d);
    dt.view_mut((0, 0), (d, d)).copy_from(&(&w - h * alpha));
    dt.view_mut((0, d), (d, d)).fill_with_identity();
    dt.view_mut((d, 0), (d, d)).copy_from(&wv);
    dt.view_mut((d, d), (d, d)).fill_with_identity();
    Ok(dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Certificate {
    /// `det(V̂ - α∇²F(x̂))`.
    pub det: f64,
    /// Product of the row norms of `V̂ - α∇²F(x̂)` (Hadamard bound on `|det|`).
    pub scale: f64,
    pub invertible: bool,
}

/// Invertibility of the Jacobian via its Schur complement `V̂ - α∇²F(x̂)`.
pub fn lemma4_certificate(
    obj: &ObjectiveSet,
    x: &StackedPoint,
    alpha: f64,
    pair: &MixingPair,
) -> Result<Lemma4Certificate, AnalysisError> {
    if !(alpha > 0.0) {
        return Err(AnalysisError::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let h = stacked_hessian(obj, x, pair)?;
    let s = kron_identity(pair.v(), x.n()) - h * alpha;
    let det = determinant(&s)?;
    let scale = row_norm_product(&s);
    // Compare in log space so large m neither underflows nor overflows.
    let lu = s.clone().lu();
    let u = lu.u();
    let log_det: f64 = (0..u.nrows()).map(|i| u[(i, i)].abs().ln()).sum();
    let log_scale: f64 = s.row_iter().map(|r| r.norm().ln()).sum();
    let invertible = log_det > DET_REL_TOL.ln() + log_scale;
    Ok(Lemma4Certificate { det, scale, invertible })
}
