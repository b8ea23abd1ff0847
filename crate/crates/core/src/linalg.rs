// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn norm1(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm0(v: &DVector<f64>) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

/// Entries of `v` restricted to `idx` (in the given order).
pub fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Columns of `a` indexed by `idx`.
pub fn columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    a.select_columns(idx)
}

/// Complement of a sorted index set within `0..n`.
pub fn complement(idx: &[usize], n: usize) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in idx {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}

/// Vector equal to `v` on `idx` and zero elsewhere.
pub fn restrict(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for &i in idx {
        out[i] = v[i];
    }
    out
}

/// Largest eigenvalue magnitude extremes of a symmetric matrix `(min, max)`.
pub fn sym_eig_extremes(m: DMatrix<f64>) -> (f64, f64) {
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Spectral norm of a (small) dense matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    // The Gram of the smaller side is cheaper and symmetric.
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let (_, max) = sym_eig_extremes(gram);
    max.max(0.0).sqrt()
}

/// `y = A x` written without temporaries.
pub fn gemv(y: &mut DVector<f64>, a: &DMatrix<f64>, x: &DVector<f64>) {
    y.gemv(1.0, a, x, 0.0);
}

/// `y = Aᵀ x` written without temporaries.
pub fn gemv_tr(y: &mut DVector<f64>, a: &DMatrix<f64>, x: &DVector<f64>) {
    y.gemv_tr(1.0, a, x, 0.0);
}
