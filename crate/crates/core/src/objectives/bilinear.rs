use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{LocalObjective, ObjectiveError, ObjectiveSet};
use crate::rng::Stream;

/// Lattice spacing of the Lipschitz sampling grid. The lattice is fixed, so
/// the sampled set only grows with the radius and the estimate is monotone.
pub const LIPSCHITZ_GRID_STEP: f64 = 1.0 / 16.0;
/// Safety factor applied to the sampled maximum Hessian norm.
pub const LIPSCHITZ_INFLATION: f64 = 1.5;

/// `ln(1 + e^{-u})` without overflow.
fn softplus_neg(u: f64) -> f64 {
    (-u).max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `d/du ln(1 + e^{-u}) = -1 / (1 + e^u)`.
fn softplus_neg_d1(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-u).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + u.exp())
    }
}

/// `σ(u) σ(-u)`.
fn softplus_neg_d2(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// Agent `i`'s term of the bilinear logistic loss with scalar weights
/// `(x, X)`:
///
/// `L_i(x, X) = (1/m) ln(1 + exp(-ζ x X ξ)) + (η / 2m)(x² + X²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearLogistic {
    m: usize,
    eta: f64,
    label: f64,
    feature: f64,
}

impl BilinearLogistic {
    pub fn new(m: usize, eta: f64, label: f64, feature: f64) -> Result<Self, ObjectiveError> {
        if !(eta > 0.0) {
            return Err(ObjectiveError::Parameter(format!("eta = {eta} must be positive")));
        }
        if m == 0 {
            return Err(ObjectiveError::Parameter("m must be positive".into()));
        }
        if label != 1.0 && label != -1.0 {
            return Err(ObjectiveError::Parameter(format!("label {label} not in {{-1, 1}}")));
        }
        Ok(Self { m, eta, label, feature })
    }

    fn s(&self) -> f64 {
        self.label * self.feature
    }

    fn hessian_entries(&self, x: &[f64]) -> (f64, f64, f64) {
        let (a, b) = (x[0], x[1]);
        let s = self.s();
        let u = a * b * s;
        let (d1, d2) = (softplus_neg_d1(u), softplus_neg_d2(u));
        let inv_m = 1.0 / self.m as f64;
        let haa = inv_m * (d2 * b * b * s * s + self.eta);
        let hbb = inv_m * (d2 * a * a * s * s + self.eta);
        let hab = inv_m * (d2 * a * b * s * s + d1 * s);
        (haa, hab, hbb)
    }
}

fn sym2_norm(p: f64, q: f64, r: f64) -> f64 {
    let mid = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    (mid + rad).abs().max((mid - rad).abs())
}

impl LocalObjective for BilinearLogistic {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        let inv_m = 1.0 / self.m as f64;
        inv_m * softplus_neg(a * b * self.s()) + 0.5 * self.eta * inv_m * (a * a + b * b)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        let s = self.s();
        let d1 = softplus_neg_d1(a * b * s);
        let inv_m = 1.0 / self.m as f64;
        out[0] = inv_m * (d1 * b * s + self.eta * a);
        out[1] = inv_m * (d1 * a * s + self.eta * b);
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (haa, hab, hbb) = self.hessian_entries(x);
        Some(DMatrix::from_row_slice(2, 2, &[haa, hab, hab, hbb]))
    }

    /// `1.5 * max ‖∇²L_i‖` over the lattice points of spacing
    /// [`LIPSCHITZ_GRID_STEP`] inside the ball.
    fn lipschitz(&self, radius: f64) -> f64 {
        let h = LIPSCHITZ_GRID_STEP;
        let k_max = (radius / h).floor() as i64;
        let r2 = radius * radius;
        let mut best = 0.0_f64;
        for i in -k_max..=k_max {
            let a = i as f64 * h;
            for j in -k_max..=k_max {
                let b = j as f64 * h;
                if a * a + b * b > r2 {
                    continue;
                }
                let (p, q, r) = self.hessian_entries(&[a, b]);
                best = best.max(sym2_norm(p, q, r));
            }
        }
        LIPSCHITZ_INFLATION * best
    }
}

/// Labels `ζ^(i)` and features `ξ^(i)` behind a bilinear logistic instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearLogisticData {
    pub labels: Vec<f64>,
    pub features: Vec<f64>,
    pub eta: f64,
    pub seed: u64,
}

impl BilinearLogisticData {
    /// `Σ_i ζ^(i) ξ^(i) / (2m)`; the origin is a strict saddle of the
    /// aggregate exactly when this exceeds `η` in magnitude.
    pub fn saddle_coupling(&self) -> f64 {
        let m = self.labels.len() as f64;
        self.labels.iter().zip(&self.features).map(|(z, x)| z * x).sum::<f64>() / (2.0 * m)
    }
}

/// Draws `ζ^(i)` uniformly from `{-1, 1}` and `ξ^(i) ~ N(ζ^(i), 1)`, agent
/// `i` (0-based) reading stream `i` of `seed`.
pub fn generate_bilinear_logistic(m: usize, eta: f64, seed: u64) -> Result<ObjectiveSet, ObjectiveError> {
    if m == 0 {
        return Err(ObjectiveError::Parameter("m must be positive".into()));
    }
    if !(eta > 0.0) {
        return Err(ObjectiveError::Parameter(format!("eta = {eta} must be positive")));
    }
    let mut labels = Vec::with_capacity(m);
    let mut features = Vec::with_capacity(m);
    let mut locals: Vec<Arc<dyn super::LocalObjective>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut stream = Stream::new(seed, i as u64);
        let zeta = stream.sign();
        let xi = stream.normal(zeta, 1.0);
        labels.push(zeta);
        features.push(xi);
        locals.push(Arc::new(BilinearLogistic::new(m, eta, zeta, xi)?));
    }
    let data = BilinearLogisticData { labels, features, eta, seed };
    Ok(ObjectiveSet::new(locals)?.with_dataset(data))
}
