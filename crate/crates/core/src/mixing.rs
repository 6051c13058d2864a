//! Mixing matrices `W`, `V = θI + (1-θ)W` and the consensus-error matrix `P`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NetworkGraph;
use crate::linalg::{self, LinalgError};

pub use crate::linalg::spectral_radius;

/// Symmetry and support tolerance for validated constructions.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Band around the eigenvalue 1 of `W` used for the simplicity check.
pub const UNIT_EIGEN_TOL: f64 = 1e-9;
/// Minimum alignment of the top eigenvector of `W` with `1/√m`.
pub const ALIGNMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixingError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("mixing matrix is {rows}x{cols}, graph has {m} agents")]
    Shape { rows: usize, cols: usize, m: usize },
    #[error("W is not symmetric (max |W_ij - W_ji| = {0:e})")]
    Symmetry(f64),
    #[error("W has nonzero weight {value:e} at non-edge ({i}, {j})")]
    Sparsity { i: usize, j: usize, value: f64 },
    #[error("W violates the spectral condition `{condition}`: {detail}")]
    Spectral { condition: &'static str, detail: String },
    #[error("V = θI + (1-θ)W is not positive definite (λ_min(V) = {0:e})")]
    Positivity(f64),
    #[error("spectral radius of P is {0}, expected < 1")]
    Contraction(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Metropolis weights: `W_ij = 1/(1 + max(deg_i, deg_j))` on edges, the
/// diagonal absorbs the remainder so every row sums to one.
pub fn metropolis_weights(g: &NetworkGraph) -> Result<DMatrix<f64>, MixingError> {
    if !g.is_connected() {
        return Err(MixingError::Disconnected);
    }
    let m = g.m();
    let mut w = DMatrix::zeros(m, m);
    for (i, j) in g.edges() {
        let wij = 1.0 / (1.0 + g.degree(i).max(g.degree(j)) as f64);
        w[(i, j)] = wij;
        w[(j, i)] = wij;
    }
    for i in 0..m {
        let off: f64 = g.neighbors(i).iter().map(|&j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    Ok(w)
}

/// `βI + (1-β)W`, mapping each eigenvalue `ω` to `β + (1-β)ω`.
pub fn lazify(w: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>, MixingError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(MixingError::Parameter(format!("lazify beta = {beta} not in [0, 1)")));
    }
    if beta == 0.0 {
        return Ok(w.clone());
    }
    let n = w.nrows();
    Ok(DMatrix::identity(n, n) * beta + w * (1.0 - beta))
}

/// Cached spectral facts of a validated pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFacts {
    /// Eigenvalues of `W`, descending.
    pub w_eigenvalues: Vec<f64>,
    /// Spectral radius of `P`.
    pub lambda1_p: f64,
    pub lambda_min_v: f64,
}

/// A validated `(W, V, θ)` triple. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MixingPair {
    w: DMatrix<f64>,
    v: DMatrix<f64>,
    w_minus_v: DMatrix<f64>,
    theta: f64,
    spectral: SpectralFacts,
}

impl MixingPair {
    /// Validates `W` against `g` and builds `V` and the spectral cache.
    pub fn new(w: DMatrix<f64>, theta: f64, g: &NetworkGraph) -> Result<Self, MixingError> {
        if !(theta > 0.0 && theta <= 0.5) {
            return Err(MixingError::Parameter(format!("theta = {theta} not in (0, 1/2]")));
        }
        let m = g.m();
        if w.nrows() != m || w.ncols() != m {
            return Err(MixingError::Shape { rows: w.nrows(), cols: w.ncols(), m });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(MixingError::Linalg(LinalgError::NonFinite));
        }
        let asym = linalg::max_abs_asymmetry(&w);
        if asym > STRUCTURE_TOL {
            return Err(MixingError::Symmetry(asym));
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && !g.has_edge(i, j) && w[(i, j)].abs() > STRUCTURE_TOL {
                    return Err(MixingError::Sparsity { i: i + 1, j: j + 1, value: w[(i, j)] });
                }
            }
        }

        let spec = linalg::symmetric_eigen(&w)?;
        let top = spec.values[0];
        let bottom = *spec.values.last().unwrap();
        if top > 1.0 + UNIT_EIGEN_TOL {
            return Err(MixingError::Spectral {
                condition: "W ⪯ I",
                detail: format!("largest eigenvalue {top}"),
            });
        }
        if bottom <= -1.0 + UNIT_EIGEN_TOL {
            return Err(MixingError::Spectral {
                condition: "-I ≺ W",
                detail: format!("smallest eigenvalue {bottom}"),
            });
        }
        if (top - 1.0).abs() > UNIT_EIGEN_TOL {
            return Err(MixingError::Spectral {
                condition: "null{I - W} = span{1}",
                detail: format!("largest eigenvalue {top} is not 1"),
            });
        }
        if m > 1 && spec.values[1] > 1.0 - UNIT_EIGEN_TOL {
            return Err(MixingError::Spectral {
                condition: "null{I - W} = span{1}",
                detail: format!("eigenvalue 1 is repeated (second eigenvalue {})", spec.values[1]),
            });
        }
        let inv_sqrt_m = 1.0 / (m as f64).sqrt();
        let align: f64 = spec.vectors.column(0).iter().map(|v| v * inv_sqrt_m).sum();
        if align.abs() <= 1.0 - ALIGNMENT_TOL {
            return Err(MixingError::Spectral {
                condition: "null{I - W} = span{1}",
                detail: format!("top eigenvector alignment with 1/√m is {align}"),
            });
        }

        let v = DMatrix::identity(m, m) * theta + &w * (1.0 - theta);
        let lambda_min_v = linalg::symmetric_min_eigenvalue(&v)?;
        if lambda_min_v <= 0.0 {
            return Err(MixingError::Positivity(lambda_min_v));
        }
        let w_minus_v = &w - &v;
        let mut pair = Self {
            w,
            v,
            w_minus_v,
            theta,
            spectral: SpectralFacts { w_eigenvalues: spec.values, lambda1_p: f64::NAN, lambda_min_v },
        };
        let lambda1_p = linalg::spectral_radius(&pair.p_matrix())?;
        if lambda1_p >= 1.0 {
            return Err(MixingError::Contraction(lambda1_p));
        }
        pair.spectral.lambda1_p = lambda1_p;
        Ok(pair)
    }

    pub fn m(&self) -> usize {
        self.w.nrows()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `W - V = θ(W - I)`.
    pub fn w_minus_v(&self) -> &DMatrix<f64> {
        &self.w_minus_v
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn spectral(&self) -> &SpectralFacts {
        &self.spectral
    }

    pub fn lambda1_p(&self) -> f64 {
        self.spectral.lambda1_p
    }

    pub fn lambda_min_v(&self) -> f64 {
        self.spectral.lambda_min_v
    }

    /// The `2m x 2m` block matrix
    /// `[[W - 11ᵀ/m, I], [W - V, I - 11ᵀ/m]]`.
    pub fn p_matrix(&self) -> DMatrix<f64> {
        let m = self.m();
        let avg = 1.0 / m as f64;
        DMatrix::from_fn(2 * m, 2 * m, |r, c| {
            let (bi, bj) = (r / m, c / m);
            let (i, j) = (r % m, c % m);
            let eye = if i == j { 1.0 } else { 0.0 };
            match (bi, bj) {
                (0, 0) => self.w[(i, j)] - avg,
                (0, 1) => eye,
                (1, 0) => self.w_minus_v[(i, j)],
                _ => eye - avg,
            }
        })
    }
}

/// Free-function form of [`MixingPair::new`].
pub fn make_mixing_pair(
    w: DMatrix<f64>,
    theta: f64,
    g: &NetworkGraph,
) -> Result<MixingPair, MixingError> {
    MixingPair::new(w, theta, g)
}

pub fn build_p(pair: &MixingPair) -> DMatrix<f64> {
    pair.p_matrix()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSpec {
    #[serde(default)]
    pub scheme: MixingScheme,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lazify_beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingScheme {
    #[default]
    Metropolis,
}

impl MixingSpec {
    pub fn build(&self, g: &NetworkGraph) -> Result<MixingPair, MixingError> {
        let w = match self.scheme {
            MixingScheme::Metropolis => metropolis_weights(g)?,
        };
        let w = match self.lazify_beta {
            Some(beta) => lazify(&w, beta)?,
            None => w,
        };
        MixingPair::new(w, self.theta, g)
    }
}
