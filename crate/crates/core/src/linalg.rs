//! Dense eigen-solvers and small matrix helpers.
//!
//! Symmetric inputs go through tridiagonalization + implicit QR (nalgebra);
//! general inputs through balancing, Householder Hessenberg reduction and
//! Francis double-shift QR. Both are capped at `100 * dim` sweeps and report
//! non-convergence as an error.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("eigen-solver did not converge within {0} iterations")]
    NoConvergence(usize),
}

fn check_square(a: &DMatrix<f64>) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(())
}

fn iteration_cap(dim: usize) -> usize {
    100 * dim.max(1)
}

/// Eigen-pairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SymmetricSpectrum, LinalgError> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SymmetricSpectrum { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let cap = iteration_cap(n);
    let eig = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, cap)
        .ok_or(LinalgError::NoConvergence(cap))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymmetricSpectrum { values, vectors })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(a: &DMatrix<f64>) -> Result<f64, LinalgError> {
    Ok(symmetric_eigen(a)?.values.last().copied().unwrap_or(f64::NAN))
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
pub fn symmetric_norm(a: &DMatrix<f64>) -> Result<f64, LinalgError> {
    Ok(symmetric_eigen(a)?.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// All eigenvalues of a general real matrix, complex pairs included.
///
/// Balances, reduces to upper Hessenberg form with Householder reflectors,
/// then runs Francis double-shift QR with exceptional shifts after 10 and 20
/// stalled sweeps on the same block.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, LinalgError> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h, iteration_cap(n))
}

/// Parlett–Reinsch balancing with radix-2 scalings (exact in floating point).
fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let norm = (0..len).map(|i| a[(k + 1 + i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in 0..len {
            v[i] = a[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vv: f64 = v[..len].iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in 0..n {
            let s: f64 = (0..len).map(|i| v[i] * a[(k + 1 + i, j)]).sum();
            let f = 2.0 * s / vv;
            for i in 0..len {
                a[(k + 1 + i, j)] -= f * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (0..len).map(|j| a[(i, k + 1 + j)] * v[j]).sum();
            let f = 2.0 * s / vv;
            for j in 0..len {
                a[(i, k + 1 + j)] -= f * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed in the process).
fn hessenberg_qr(a: &mut DMatrix<f64>, cap: usize) -> Result<Vec<Complex<f64>>, LinalgError> {
    let n = a.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut shift_acc = 0.0;
    let mut its = 0usize;
    let mut total = 0usize;
    while nn >= 0 {
        let nu = nn as usize;
        // Smallest l such that the trailing block a[l..=nn] is unreduced.
        let mut l = nu;
        while l >= 1 {
            let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[(l, l - 1)].abs() <= f64::EPSILON * s {
                a[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = a[(nu, nu)];
        if l == nu {
            wr[nu] = x + shift_acc;
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[(nu - 1, nu - 1)];
        let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
        if l == nu - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = q.abs().sqrt();
            x += shift_acc;
            if q >= 0.0 {
                let z = p + sign(z, p);
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = -z;
                wi[nu] = z;
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if total >= cap {
            return Err(LinalgError::NoConvergence(cap));
        }
        if its == 10 || its == 20 {
            shift_acc += x;
            for i in 0..=nu {
                a[(i, i)] -= x;
            }
            let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        total += 1;

        // Look for two consecutive small subdiagonal elements.
        let (mut p, mut q, mut r);
        let mut m = nu - 2;
        loop {
            let z = a[(m, m)];
            let r0 = x - z;
            let s0 = y - z;
            p = (r0 * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
            q = a[(m + 1, m + 1)] - z - r0 - s0;
            r = a[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
            if u <= f64::EPSILON * v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nu {
            a[(i, i - 2)] = 0.0;
            if i != m + 2 {
                a[(i, i - 3)] = 0.0;
            }
        }
        // Double-shift QR sweep on rows l..=nn and columns m..=nn.
        let mut xk = 0.0;
        for k in m..nu {
            if k != m {
                p = a[(k, k - 1)];
                q = a[(k + 1, k - 1)];
                r = if k != nu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                xk = p.abs() + q.abs() + r.abs();
                if xk != 0.0 {
                    p /= xk;
                    q /= xk;
                    r /= xk;
                }
            }
            let s = sign((p * p + q * q + r * r).sqrt(), p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    a[(k, k - 1)] = -a[(k, k - 1)];
                }
            } else {
                a[(k, k - 1)] = -s * xk;
            }
            p += s;
            let (hx, hy, hz) = (p / s, q / s, r / s);
            q /= p;
            r /= p;
            for j in k..=nu {
                let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                if k != nu - 1 {
                    pp += r * a[(k + 2, j)];
                    a[(k + 2, j)] -= pp * hz;
                }
                a[(k + 1, j)] -= pp * hy;
                a[(k, j)] -= pp * hx;
            }
            let mmin = if nu < k + 3 { nu } else { k + 3 };
            for i in l..=mmin {
                let mut pp = hx * a[(i, k)] + hy * a[(i, k + 1)];
                if k != nu - 1 {
                    pp += hz * a[(i, k + 2)];
                    a[(i, k + 2)] -= pp * r;
                }
                a[(i, k + 1)] -= pp * q;
                a[(i, k)] -= pp;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

/// Largest eigenvalue modulus of a general real matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())))
}

pub fn determinant(a: &DMatrix<f64>) -> Result<f64, LinalgError> {
    check_square(a)?;
    Ok(a.clone().lu().determinant())
}

/// `A ⊗ I_n`.
pub fn kron_identity(a: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let (r, c) = a.shape();
    DMatrix::from_fn(r * n, c * n, |i, j| if i % n == j % n { a[(i / n, j / n)] } else { 0.0 })
}

pub fn max_abs_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn row_norm_product(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.norm()).product()
}

pub fn as_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_unit_radius() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((spectral_radius(&a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_block_has_zero_radius() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(spectral_radius(&a).unwrap(), 0.0);
    }

    #[test]
    fn shape_and_finiteness_errors() {
        let a = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(spectral_radius(&a), Err(LinalgError::NotSquare { rows: 2, cols: 3 }));
        let b = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert_eq!(spectral_radius(&b), Err(LinalgError::NonFinite));
    }

    #[test]
    fn symmetric_spectrum_is_sorted_descending() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let s = symmetric_eigen(&a).unwrap();
        let expect = [3.0, 1.0, -1.0];
        for (v, e) in s.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-13);
        }
        let v0 = s.vectors.column(0);
        assert!((v0[0].abs() - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn companion_matrix_roots() {
        // x⁴ - 10x³ + 35x² - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[10.0, -35.0, 50.0, -24.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let mut re: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn complex_pair_and_triangular_input() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, -0.5, 7.0, 0.5, 0.5, -3.0, 0.0, 0.0, 2.0]);
        let ev = eigenvalues(&a).unwrap();
        let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((radius - 2.0).abs() < 1e-14);
        assert!(ev.iter().any(|z| (z.norm() - 0.5_f64.sqrt()).abs() < 1e-14 && z.im.abs() > 0.1));
    }

    #[test]
    fn kron_with_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let k = kron_identity(&a, 2);
        assert_eq!(k[(0, 2)], 2.0);
        assert_eq!(k[(1, 3)], 2.0);
        assert_eq!(k[(0, 3)], 0.0);
        assert_eq!(k[(3, 1)], 3.0);
    }
}
