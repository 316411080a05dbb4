//! Cyclic Jacobi eigensolver for small dense complex Hermitian matrices.
//!
//! Each plane rotation first removes the phase of the pivot a_pq, then applies
//! the classic real symmetric Jacobi rotation. Convergence is quadratic once
//! the off-diagonal part is small, and the result is fully deterministic.

use crate::linalg::{hermiticity_defect, max_abs, CMatrix, C64};
use crate::{Error, Result};

/// Relative Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Converged when the largest off-diagonal modulus is below this times ‖h‖.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

fn max_off_diagonal(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(a[(i, j)].norm());
            }
        }
    }
    off
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as
/// columns. Each eigenvector is phased so its largest component is real and
/// positive.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square".into(),
            found: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    let n = h.nrows();
    let norm = max_abs(h);
    let deviation = hermiticity_defect(h);
    if deviation > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NonHermitianInput { deviation });
    }

    let mut a = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut w = CMatrix::identity(n, n);
    let target = OFF_DIAGONAL_TOL * norm;

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut w, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = w.column(i).into_owned();
        let big = col.iter().copied().fold(C64::new(0.0, 0.0), |m, z| {
            if z.norm() > m.norm() + 1e-14 {
                z
            } else {
                m
            }
        });
        if big.norm() > 0.0 {
            col *= big.conj() / big.norm();
        }
        vectors.set_column(k, &col);
    }
    Ok((values, vectors))
}

// Annihilates a[p][q] with V = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] acting on
// rows/columns p, q: a <- V† a V, w <- w V.
fn rotate(a: &mut CMatrix, w: &mut CMatrix, p: usize, q: usize) {
    let beta = a[(p, q)];
    let mag = beta.norm();
    if mag == 0.0 {
        return;
    }
    let phase = beta / mag; // e^{iφ}
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let cs = 1.0 / t.hypot(1.0);
    let sn = t * cs;
    let vpp = C64::new(cs, 0.0);
    let vpq = C64::new(sn, 0.0);
    let vqp = -phase.conj() * sn;
    let vqq = phase.conj() * cs;

    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
        let (wkp, wkq) = (w[(k, p)], w[(k, q)]);
        w[(k, p)] = wkp * vpp + wkq * vqp;
        w[(k, q)] = wkp * vpq + wkq * vqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}
