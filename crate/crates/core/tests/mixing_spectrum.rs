//! Spectral checks of `P` against oracles that never touch a QR iteration.

use extra_lab::graph::{circulant_regular_graph, complete_graph, ring_graph, NetworkGraph};
use extra_lab::mixing::{lazify, metropolis_weights, spectral_radius, MixingPair};
use extra_lab::rng::Stream;
use nalgebra::{Complex, DMatrix};

/// Largest root modulus of `λ² - (1+ω)λ + ω - θω + θ`, maximized over the
/// eigenvalues `ω ≠ 1` of `W` (the `ω = 1` direction contributes a nilpotent
/// block). This is the block-diagonalization of `P` in `W`'s eigenbasis.
fn radius_from_w_spectrum(w_eigs: &[f64], theta: f64) -> f64 {
    w_eigs
        .iter()
        .skip(1)
        .map(|&om| {
            let b = 1.0 + om;
            let c = om - theta * om + theta;
            let disc = b * b - 4.0 * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                ((b + r) / 2.0).abs().max(((b - r) / 2.0).abs())
            } else {
                c.sqrt()
            }
        })
        .fold(0.0, f64::max)
}

/// On the complete graph with Metropolis weights `W = 11ᵀ/m`, so every
/// non-consensus direction has `ω = 0` and the block is `λ² - λ + θ`.
fn complete_graph_radius(theta: f64) -> f64 {
    if theta >= 0.25 {
        theta.sqrt()
    } else {
        (1.0 + (1.0 - 4.0 * theta).sqrt()) / 2.0
    }
}

fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex<f64>; 3] {
    // λ³ + a2 λ² + a1 λ + a0 via Cardano, then two Newton polishes per root.
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = Complex::new(q * q / 4.0 + p.powi(3) / 27.0, 0.0).sqrt();
    let mut u = (Complex::new(-q / 2.0, 0.0) + disc).powf(1.0 / 3.0);
    if u.norm() < 1e-300 {
        u = (Complex::new(-q / 2.0, 0.0) - disc).powf(1.0 / 3.0);
    }
    let omega = Complex::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex::new(0.0, 0.0); 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let uk = u * omega.powu(k as u32);
        let vk = if uk.norm() < 1e-300 { Complex::new(0.0, 0.0) } else { -p / (3.0 * uk) };
        *r = uk + vk - shift;
    }
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let f = ((*r + a2) * *r + a1) * *r + a0;
            let df = (3.0 * *r + 2.0 * a2) * *r + a1;
            if df.norm() > 1e-12 {
                *r -= f / df;
            }
        }
    }
    roots
}

/// Draws until the candidate passes validation (small θ on a sparse,
/// non-lazy graph can leave `V` indefinite).
fn random_pair(stream: &mut Stream) -> (MixingPair, f64) {
    loop {
        if let Some(found) = candidate_pair(stream) {
            return found;
        }
    }
}

fn candidate_pair(stream: &mut Stream) -> Option<(MixingPair, f64)> {
    let m = 2 + (stream.next_u64() % 19) as usize;
    let theta = [0.05, 0.25, 0.5][(stream.next_u64() % 3) as usize];
    let beta = [0.0, 0.3][(stream.next_u64() % 2) as usize];
    let g: NetworkGraph = match stream.next_u64() % 3 {
        0 if m >= 3 => ring_graph(m).unwrap(),
        1 => {
            let even: Vec<usize> = (2..m).filter(|d| (m * d).is_multiple_of(2)).collect();
            if even.is_empty() {
                complete_graph(m).unwrap()
            } else {
                let d = even[(stream.next_u64() as usize) % even.len()];
                circulant_regular_graph(m, d).unwrap()
            }
        }
        _ => complete_graph(m).unwrap(),
    };
    let w = lazify(&metropolis_weights(&g).unwrap(), beta).unwrap();
    MixingPair::new(w, theta, &g).ok().map(|p| (p, theta))
}

#[test]
fn lambda1_matches_w_spectrum_reduction() {
    let mut stream = Stream::new(2024, 0);
    for _ in 0..50 {
        let (pair, theta) = random_pair(&mut stream);
        let oracle = radius_from_w_spectrum(&pair.spectral().w_eigenvalues, theta);
        let got = pair.lambda1_p();
        // Defective blocks (θ(1-ω) = (1-ω)²/4) lose half the digits.
        assert!((got - oracle).abs() < 1e-7, "m={} θ={theta}: {got} vs {oracle}", pair.m());
        assert!(got < 1.0 - 1e-8);
    }
}

#[test]
fn complete_graph_closed_form() {
    for m in [2usize, 5, 20] {
        let g = complete_graph(m).unwrap();
        for theta in [0.05, 0.25, 0.5] {
            let pair = MixingPair::new(metropolis_weights(&g).unwrap(), theta, &g).unwrap();
            let expect = complete_graph_radius(theta);
            let got = pair.lambda1_p();
            println!("m={m} θ={theta}: λ1(P) = {got:.15}, closed form {expect:.15}");
            if theta != 0.25 {
                assert!((got - expect).abs() < 1e-9);
            } else {
                assert!((got - expect).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn spectral_radius_agrees_with_cubic_roots() {
    let mut stream = Stream::new(99, 0);
    for _ in 0..200 {
        let a = DMatrix::from_fn(3, 3, |_, _| stream.uniform_in(-2.0, 2.0));
        let tr = a.trace();
        let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
            + a[(0, 0)] * a[(2, 2)] - a[(0, 2)] * a[(2, 0)]
            + a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)];
        let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
        let oracle = cubic_roots(-tr, minors, -det).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let got = spectral_radius(&a).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle} for {a}");
    }
}
