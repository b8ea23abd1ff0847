// SPDX-License-Identifier: Apache-2.0

//! Support selection and least-squares refitting on a support.

use nalgebra::{DMatrix, DVector};

/// Indices of the `s` largest-magnitude entries of `v`, ties broken toward
/// the lower index, returned ascending.
pub fn supp(v: &DVector<f64>, s: usize) -> Vec<usize> {
    let s = s.min(v.len());
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    idx.truncate(s);
    idx.sort_unstable();
    idx
}

/// Result of [`prune_ls_with_diagnostics`].
#[derive(Debug, Clone)]
pub struct SupportFit {
    pub x: DVector<f64>,
    /// `A_T` was numerically rank deficient; the minimum-norm solution was used.
    pub rank_deficient: bool,
}

/// `x_T = A_T† y`, zero off `T`.
pub fn prune_ls(a: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    prune_ls_with_diagnostics(a, y, support).x
}

pub fn prune_ls_with_diagnostics(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    support: &[usize],
) -> SupportFit {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if support.is_empty() {
        return SupportFit {
            x,
            rank_deficient: false,
        };
    }
    let sub = a.select_columns(support);
    let (coef, rank_deficient) = least_squares(&sub, y);
    for (k, &i) in support.iter().enumerate() {
        x[i] = coef[k];
    }
    SupportFit { x, rank_deficient }
}

/// Least-squares solve of `B c ≈ y`. Full column rank goes through QR;
/// anything else falls back to the SVD minimum-norm solution.
fn least_squares(b: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, bool) {
    let (m, k) = b.shape();
    if k <= m {
        let qr = b.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        let diag_min = r.diagonal().iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
        if diag_max > 0.0 && diag_min > 1e-12 * diag_max * (m.max(k) as f64) {
            let qty = qr.q().transpose() * y;
            if let Some(c) = r.solve_upper_triangular(&qty) {
                return (c, false);
            }
        }
    }
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * (m.max(k) as f64) * f64::EPSILON;
    let c = svd
        .solve(y, tol)
        .unwrap_or_else(|_| DVector::zeros(k));
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    (c, rank < k)
}
