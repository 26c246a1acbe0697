//! Eigenvalues of dense Hermitian matrices by the cyclic Jacobi method.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation that annihilates it.
//! Sweeps stop once the off-diagonal Frobenius norm falls below
//! `OFF_DIAGONAL_TOL * ||M||_F`.

use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Largest tolerated `max |M - M^dagger|` entry for an input to be treated as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigenvalues",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let deviation = m.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut a = m.clone();
    a.hermitize();
    Ok(jacobi_in_place(&mut a))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let s = a.as_slice();
    let mut acc = 0.0;
    for r in 0..n {
        for c in (r + 1)..n {
            acc += s[r * n + c].norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

fn jacobi_in_place(a: &mut CMatrix) -> Vec<f64> {
    let n = a.rows();
    let target = OFF_DIAGONAL_TOL * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(a, p, q);
            }
        }
    }

    let mut vals: Vec<f64> = a.diag().into_iter().map(|z| z.re).collect();
    vals.sort_by(|x, y| x.total_cmp(y));
    vals
}

/// Annihilates `a[p][q]` (and `a[q][p]`) with a unitary similarity on the (p, q) plane.
fn rotate(a: &mut CMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // Rotations that cannot change the diagonal in floating point are skipped
    // after zeroing the pivot.
    if (app.abs() + 100.0 * r == app.abs()) && (aqq.abs() + 100.0 * r == aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }

    // Phase removal: D = diag(.., e^{-i theta} at q, ..), B = D^dag A D makes b_pq = r.
    let phase = apq / r; // e^{i theta}
    let s = a.as_mut_slice();
    for k in 0..n {
        if k != q {
            s[k * n + q] *= phase.conj();
            s[q * n + k] *= phase;
        }
    }

    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = s[k * n + p];
        let akq = s[k * n + q];
        let new_kp = akp * c - akq * sn;
        let new_kq = akp * sn + akq * c;
        s[k * n + p] = new_kp;
        s[k * n + q] = new_kq;
        s[p * n + k] = new_kp.conj();
        s[q * n + k] = new_kq.conj();
    }
    s[p * n + p] = Complex64::new(app - t * r, 0.0);
    s[q * n + q] = Complex64::new(aqq + t * r, 0.0);
    s[p * n + q] = Complex64::new(0.0, 0.0);
    s[q * n + p] = Complex64::new(0.0, 0.0);
}
