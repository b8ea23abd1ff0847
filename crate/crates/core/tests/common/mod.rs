// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

//! Reference routines used as independent oracles by the integration tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale)
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn sparse_vector(n: usize, s: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let idx = rand::seq::index::sample(rng, n, s);
    let mut x = DVector::zeros(n);
    for i in idx.iter() {
        x[i] = rng.sample::<f64, _>(StandardNormal);
    }
    x
}

/// Dense two-phase tableau simplex with Bland's rule for
/// `min cᵀz s.t. Bz = b, z ≥ 0`. Returns `None` when infeasible.
pub fn simplex_eq(c: &[f64], bmat: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = bmat.shape();
    let tol = 1e-11;
    // Tableau columns: n originals, m artificials, rhs.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    let mut basis = vec![0usize; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * bmat[(i, j)];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sign * b[i];
        basis[i] = n + i;
    }
    // Phase 1 objective: sum of artificials, expressed in non-basic terms.
    let mut obj = vec![0.0; width];
    for row in &t[..m] {
        for j in 0..width {
            if j < n || j == width - 1 {
                obj[j] -= row[j];
            }
        }
    }
    t[m] = obj;
    pivot_loop(&mut t, &mut basis, n + m, tol);
    if -t[m][width - 1] > 1e-9 {
        return None;
    }
    // Drive artificial variables out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > tol) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // Phase 2: drop artificial columns by forbidding them.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    for i in 0..m {
        let bi = basis[i];
        if bi < n && c[bi] != 0.0 {
            let f = c[bi];
            for j in 0..width {
                obj[j] -= f * t[i][j];
            }
        }
    }
    t[m] = obj;
    pivot_loop(&mut t, &mut basis, n, tol);
    let mut z = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            z[basis[i]] = t[i][width - 1];
        }
    }
    Some(z)
}

fn pivot_loop(t: &mut [Vec<f64>], basis: &mut [usize], allowed: usize, tol: f64) {
    let m = basis.len();
    let width = t[0].len();
    for _ in 0..10_000 {
        let Some(col) = (0..allowed).find(|&j| t[m][j] < -tol) else {
            return;
        };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][col] > tol {
                let ratio = t[i][width - 1] / t[i][col];
                match best {
                    Some((bi, br))
                        if ratio > br + 1e-14
                            || (ratio >= br - 1e-14 && basis[i] > basis[bi]) => {}
                    _ => best = Some((i, ratio)),
                }
            }
        }
        let Some((row, _)) = best else {
            panic!("unbounded LP");
        };
        pivot(t, basis, row, col);
    }
    panic!("simplex did not terminate");
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    t[row].iter_mut().for_each(|v| *v /= p);
    let pr = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, q) in r.iter_mut().zip(&pr) {
                    *v -= f * q;
                }
            }
        }
    }
    basis[row] = col;
}

/// `min ‖x‖₁ s.t. Ax = y` via `x = p − q`, `p, q ≥ 0`.
pub fn l1_min_lp(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    let bmat = DMatrix::from_fn(m, 2 * n, |i, j| if j < n { a[(i, j)] } else { -a[(i, j - n)] });
    let c = vec![1.0; 2 * n];
    let z = simplex_eq(&c, &bmat, y.as_slice()).expect("feasible LP");
    DVector::from_fn(n, |i, _| z[i] - z[n + i])
}

/// ISTA for `min ½‖y − Ax‖² + w‖x‖₁`.
pub fn ista(a: &DMatrix<f64>, y: &DVector<f64>, w: f64, iters: usize) -> DVector<f64> {
    let lip = a.clone().svd(false, false).singular_values.max().powi(2);
    let step = 1.0 / lip;
    let mut x = DVector::zeros(a.ncols());
    for _ in 0..iters {
        let g = a.transpose() * (a * &x - y);
        let z = &x - g * step;
        x = z.map(|v| v.signum() * (v.abs() - w * step).max(0.0));
    }
    x
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exhaustive RIC through singular values of every column submatrix.
pub fn ric_by_svd(a: &DMatrix<f64>, s: usize) -> f64 {
    subsets(a.ncols(), s)
        .iter()
        .map(|sup| {
            let sv = a.select_columns(sup).svd(false, false).singular_values;
            let hi = sv.max().powi(2) - 1.0;
            let lo = 1.0 - sv.min().powi(2);
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Exhaustive ROC via the supremum of `|⟨A u, A v⟩|` over disjoint supports.
pub fn roc_by_svd(a: &DMatrix<f64>, s: usize, t: usize) -> f64 {
    let n = a.ncols();
    let mut best = 0.0f64;
    for sa in subsets(n, s) {
        let rest: Vec<usize> = (0..n).filter(|i| !sa.contains(i)).collect();
        for sb in subsets(rest.len(), t) {
            let sb: Vec<usize> = sb.iter().map(|&i| rest[i]).collect();
            let cross = a.select_columns(&sa).transpose() * a.select_columns(&sb);
            best = best.max(cross.svd(false, false).singular_values.max());
        }
    }
    best
}
