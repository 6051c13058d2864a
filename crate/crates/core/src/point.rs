//! Stacked iterates `x̂ = [x̂_1; ...; x̂_m]` with `x̂_i ∈ R^n`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedPoint {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl StackedPoint {
    /// Wraps `data` as `m` blocks of length `n`. Returns `None` on a length
    /// mismatch.
    pub fn new(m: usize, n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == m * n).then_some(Self { m, n, data })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, data: vec![0.0; m * n] }
    }

    /// Every agent holds a copy of `block`.
    pub fn consensual(m: usize, block: &[f64]) -> Self {
        let n = block.len();
        let mut data = Vec::with_capacity(m * n);
        for _ in 0..m {
            data.extend_from_slice(block);
        }
        Self { m, n, data }
    }

    pub fn from_blocks(blocks: &[Vec<f64>]) -> Option<Self> {
        let n = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != n) {
            return None;
        }
        Some(Self { m: blocks.len(), n, data: blocks.concat() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1)).take(self.m)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.m == other.m && self.n == other.n
    }

    /// `(1/m) Σ_i x̂_i`.
    pub fn average_block(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.n];
        for b in self.blocks() {
            for (a, v) in avg.iter_mut().zip(b) {
                *a += v;
            }
        }
        let inv = 1.0 / self.m as f64;
        avg.iter_mut().for_each(|a| *a *= inv);
        avg
    }

    /// `(A ⊗ I_n) x̂` for an `m x m` matrix `A`, summing `j` in ascending order.
    pub fn mix(&self, a: &DMatrix<f64>) -> Self {
        debug_assert_eq!(a.nrows(), self.m);
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.m {
            let dst = &mut out[i * self.n..(i + 1) * self.n];
            for j in 0..self.m {
                let aij = a[(i, j)];
                if aij == 0.0 {
                    continue;
                }
                for (d, x) in dst.iter_mut().zip(self.block(j)) {
                    *d += aij * x;
                }
            }
        }
        Self { m: self.m, n: self.n, data: out }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Largest per-agent Euclidean norm.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
