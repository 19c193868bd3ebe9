//! Small dense complex linear-algebra helpers shared across the stack.
//!
//! Everything here operates on `ndarray` arrays of `Complex64`. Dimensions
//! are tiny (atom levels, group order) up to moderate (state vectors of a
//! few thousand amplitudes), so all routines are straightforward dense code.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = Array2<C64>;
/// Dense complex vector.
pub type CVec = Array1<C64>;

/// 1 + 0i.
pub const ONE: C64 = C64::new(1.0, 0.0);
/// 0 + 0i.
pub const ZERO: C64 = C64::new(0.0, 0.0);
/// 0 + 1i.
pub const I: C64 = C64::new(0.0, 1.0);

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let s = a[[ia, ja]];
            if s == ZERO {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[[ia * rb + ib, ja * cb + jb]] = s * b[[ib, jb]];
                }
            }
        }
    }
    out
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest absolute entry of `a - b` after removing the global phase that
/// best aligns `b` with `a` (phase of tr(b† a)).
pub fn max_abs_diff_up_to_phase(a: &CMat, b: &CMat) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Deviation of `u` from unitarity: max |(u† u - 1)_{ij}|.
pub fn unitarity_error(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = dagger(u).dot(u);
    let eye = CMat::eye(n);
    max_abs_diff(&prod, &eye)
}

/// Spectral (operator) norm: the largest singular value, computed from the
/// Hermitian eigenvalues of a† a.
pub fn operator_norm(a: &CMat) -> f64 {
    let gram = dagger(a).dot(a);
    match eigh_hermitian(&gram) {
        Ok((vals, _)) => vals.iter().fold(0.0f64, |m, &v| m.max(v.max(0.0))).sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Hermitian eigendecomposition (ascending eigenvalues, unitary columns).
///
/// Some LAPACK binding layouts hand back eigenvectors of the conjugate
/// matrix when given row-major complex input (for a Hermitian matrix,
/// conj(H) = H^T shares the eigenvalues while its eigenvectors are the
/// conjugates). Both candidates are checked against the defining residual
/// H v = lambda v and the consistent one is returned, so callers always get
/// eigenvectors of the matrix they passed in.
pub fn eigh_hermitian(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("hermitian eigendecomposition: {e}")))?;
    let residual = |v: &CMat| -> f64 {
        let hv = h.dot(v);
        let mut worst = 0.0f64;
        for j in 0..v.ncols() {
            for i in 0..v.nrows() {
                worst = worst.max((hv[[i, j]] - v[[i, j]] * vals[j]).norm());
            }
        }
        worst
    };
    let direct = residual(&vecs);
    let conjugated = vecs.mapv(|z| z.conj());
    if residual(&conjugated) < direct {
        Ok((vals, conjugated))
    } else {
        Ok((vals, vecs))
    }
}

/// Symmetric eigendecomposition of a real matrix.
pub fn eigh_symmetric(h: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("symmetric eigendecomposition: {e}")))?;
    Ok((vals, vecs))
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// The argument is scaled by 2^-s until its 1-norm is below 1/2, the
/// exponential of the scaled matrix is summed to machine precision (the
/// tail of the series at norm 1/2 falls below 1e-17 after ~20 terms), and
/// the result is squared back up. Adequate for the small matrices (atom
/// levels, group order) this crate exponentiates outside the Hermitian
/// fast path.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / C64::new(f64::powi(2.0, s as i32), 0.0));
    let mut result = CMat::eye(n);
    let mut term = CMat::eye(n);
    for k in 1..=24 {
        term = term.dot(&scaled) / C64::new(k as f64, 0.0);
        result = result + &term;
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// exp(-i h t) for Hermitian `h`, via eigendecomposition.
pub fn expi_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let (vals, vecs) = eigh_hermitian(h)?;
    let phases: CVec = vals.mapv(|e| (-I * e * t).exp());
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z * phases[j]);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}
