//! Instance generators and finite-difference oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use extra_lab::graph::{circulant_regular_graph, complete_graph, ring_graph, NetworkGraph};
use extra_lab::mixing::{lazify, metropolis_weights, MixingPair};
use extra_lab::objectives::{
    generate_bilinear_logistic, IdenticalQuartic, LocalObjective, ObjectiveSet, Quadratic,
};
use extra_lab::rng::Stream;
use nalgebra::DMatrix;

pub fn random_graph(stream: &mut Stream, m: usize) -> NetworkGraph {
    match stream.next_u64() % 3 {
        0 if m >= 3 => ring_graph(m).unwrap(),
        1 if m >= 4 => {
            let ds: Vec<usize> = (2..m).filter(|d| (m * d).is_multiple_of(2)).collect();
            circulant_regular_graph(m, ds[(stream.next_u64() as usize) % ds.len()]).unwrap()
        }
        _ => complete_graph(m).unwrap(),
    }
}

/// A validated pair on a random topology; redraws until validation passes.
pub fn random_instance_pair(stream: &mut Stream, m_lo: usize, m_hi: usize) -> (NetworkGraph, MixingPair) {
    loop {
        let m = m_lo + (stream.next_u64() as usize) % (m_hi - m_lo + 1);
        let g = random_graph(stream, m);
        let theta = [0.05, 0.25, 0.5][(stream.next_u64() % 3) as usize];
        let beta = [0.0, 0.3][(stream.next_u64() % 2) as usize];
        let w = lazify(&metropolis_weights(&g).unwrap(), beta).unwrap();
        if let Ok(p) = MixingPair::new(w, theta, &g) {
            return (g, p);
        }
    }
}

/// Random symmetric `n x n` matrix with entries in `[-1, 1]`.
pub fn random_symmetric(stream: &mut Stream, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| stream.uniform_in(-1.0, 1.0));
    (&b + b.transpose()) * 0.5
}

/// Strongly convex quadratics `½xᵀA_i x + b_iᵀx` with `A_i = MᵀM/n + 0.1 I`.
pub fn random_convex_quadratics(stream: &mut Stream, m: usize, n: usize) -> ObjectiveSet {
    let locals: Vec<Arc<dyn LocalObjective>> = (0..m)
        .map(|_| {
            let b = DMatrix::from_fn(n, n, |_, _| stream.uniform_in(-1.0, 1.0));
            let a = b.transpose() * &b / n as f64 + DMatrix::identity(n, n) * 0.1;
            let a = (&a + a.transpose()) * 0.5;
            let off = (0..n).map(|_| stream.uniform_in(-1.0, 1.0)).collect();
            Arc::new(Quadratic::new(a, off).unwrap()) as Arc<dyn LocalObjective>
        })
        .collect();
    ObjectiveSet::new(locals).unwrap()
}

/// Indefinite quadratics, for derivative checks only.
pub fn random_quadratics(stream: &mut Stream, m: usize, n: usize) -> ObjectiveSet {
    let locals: Vec<Arc<dyn LocalObjective>> = (0..m)
        .map(|_| {
            let a = random_symmetric(stream, n);
            let off = (0..n).map(|_| stream.uniform_in(-1.0, 1.0)).collect();
            Arc::new(Quadratic::new(a, off).unwrap().with_constant(stream.uniform())) as Arc<dyn LocalObjective>
        })
        .collect();
    ObjectiveSet::new(locals).unwrap()
}

/// One instance of every shipped objective family.
pub fn shipped_objectives() -> Vec<(&'static str, ObjectiveSet)> {
    let mut s = Stream::new(5, 0);
    vec![
        ("bilinear_logistic m=20", generate_bilinear_logistic(20, 0.1, 1).unwrap()),
        ("bilinear_logistic m=3", generate_bilinear_logistic(3, 0.5, 9).unwrap()),
        ("quadratic n=3", random_quadratics(&mut s, 4, 3)),
        ("identical_quartic n=3", IdenticalQuartic::set(5, 3).unwrap()),
    ]
}

fn fd_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let na = a.iter().map(|p| p * p).sum::<f64>().sqrt();
    let nb = b.iter().map(|p| p * p).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-8)
}

/// Relative error of the analytic gradient against central differences.
pub fn gradient_fd_error(f: &dyn LocalObjective, x: &[f64]) -> f64 {
    let n = x.len();
    let mut g = vec![0.0; n];
    f.gradient(x, &mut g);
    let mut fd = vec![0.0; n];
    let mut y = x.to_vec();
    for t in 0..n {
        let h = fd_step(x[t]);
        y[t] = x[t] + h;
        let up = f.value(&y);
        y[t] = x[t] - h;
        let down = f.value(&y);
        y[t] = x[t];
        fd[t] = (up - down) / (2.0 * h);
    }
    rel(&g, &fd)
}

/// Relative error of the analytic Hessian against central differences of
/// the analytic gradient.
pub fn hessian_fd_error(f: &dyn LocalObjective, x: &[f64]) -> f64 {
    let n = x.len();
    let h_an = f.hessian(x).expect("shipped objectives have Hessians");
    let mut fd = vec![0.0; n * n];
    let mut y = x.to_vec();
    let (mut gu, mut gd) = (vec![0.0; n], vec![0.0; n]);
    for t in 0..n {
        let h = fd_step(x[t]);
        y[t] = x[t] + h;
        f.gradient(&y, &mut gu);
        y[t] = x[t] - h;
        f.gradient(&y, &mut gd);
        y[t] = x[t];
        for r in 0..n {
            fd[r * n + t] = (gu[r] - gd[r]) / (2.0 * h);
        }
    }
    let an: Vec<f64> = (0..n * n).map(|i| h_an[(i / n, i % n)]).collect();
    rel(&an, &fd)
}

pub fn random_point(stream: &mut Stream, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| stream.uniform_in(-r, r)).collect()
}

/// Worst gradient and Hessian errors over `grad_points` and `hess_points`
/// random points per agent.
pub fn fd_errors(obj: &ObjectiveSet, seed: u64, grad_points: usize, hess_points: usize) -> (f64, f64) {
    let mut s = Stream::new(seed, 0);
    let (mut ge, mut he) = (0.0_f64, 0.0_f64);
    for i in 0..obj.m() {
        for _ in 0..grad_points {
            let x = random_point(&mut s, obj.n(), 3.0);
            ge = ge.max(gradient_fd_error(obj.local(i), &x));
        }
        for _ in 0..hess_points {
            let x = random_point(&mut s, obj.n(), 3.0);
            he = he.max(hessian_fd_error(obj.local(i), &x));
        }
    }
    (ge, he)
}
