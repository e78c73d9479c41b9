//! Small dense complex-matrix helpers used by the gate constructors and
//! state evolution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Max-entry norm of a matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry deviation of `U^dag U` from the identity.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let eye = DMatrix::<C64>::identity(n, n);
    max_abs(&(prod - eye))
}

/// Check unitarity against an absolute tolerance.
pub fn check_unitary(u: &DMatrix<C64>, tol: f64) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation < tol {
        Ok(())
    } else {
        Err(Error::NotUnitary { deviation })
    }
}

/// Max-entry deviation of `sum_i K_i^dag K_i` from the identity.
pub fn kraus_completeness_deviation(kraus: &[DMatrix<C64>]) -> f64 {
    let n = kraus[0].nrows();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    let eye = DMatrix::<C64>::identity(n, n);
    max_abs(&(acc - eye))
}

/// Exponential of an anti-Hermitian generator, via the Hermitian
/// eigendecomposition of `-iG`. The result is unitary to machine
/// precision regardless of the generator's norm.
pub fn exp_antihermitian(g: &DMatrix<C64>) -> DMatrix<C64> {
    let n = g.nrows();
    debug_assert!(max_abs(&(g.adjoint() + g)) < 1e-12, "generator not anti-Hermitian");
    let h = g.map(|z| z * C64::new(0.0, -1.0));
    let eig = h.symmetric_eigen();
    let phases: DVector<C64> = eig.eigenvalues.map(|lambda| C64::from_polar(1.0, lambda));
    let mut out = DMatrix::<C64>::zeros(n, n);
    // V diag(e^{i lambda}) V^dag
    for k in 0..n {
        let col = eig.eigenvectors.column(k);
        let p = phases[k];
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * p * col[j].conj();
            }
        }
    }
    out
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue_hermitian(m: &DMatrix<C64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Annihilation operator on a single truncated mode: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(cutoff: usize) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator on a single truncated mode.
pub fn number_op(cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
