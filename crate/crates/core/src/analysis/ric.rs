// SPDX-License-Identifier: Apache-2.0

//! Restricted isometry and restricted orthogonality constants by support
//! enumeration (exact) or random supports (sampled lower bound).

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub order: usize,
    pub delta: f64,
    /// `false` for sampled estimates, which are lower bounds.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocEstimate {
    pub orders: (usize, usize),
    pub theta: f64,
    pub exact: bool,
}

pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Rightmost position that can still move.
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn sub_gram(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

/// Isometry defect `max(λ_max − 1, 1 − λ_min)` of `A_SᵀA_S`.
fn support_defect(g: &DMatrix<f64>, support: &[usize]) -> f64 {
    let eig = sub_gram(g, support, support).symmetric_eigen();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (hi - 1.0).max(1.0 - lo)
}

fn cross_norm(g: &DMatrix<f64>, s1: &[usize], s2: &[usize]) -> f64 {
    let (p, q) = if s1.len() <= s2.len() { (s1, s2) } else { (s2, s1) };
    let b = sub_gram(g, p, q);
    let bbt = &b * b.transpose();
    bbt.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// `δ_s = max_{|S| = s} ‖A_SᵀA_S − I‖₂`.
pub fn estimate_ric(
    a: &DMatrix<f64>,
    s: usize,
    mode: EstimateMode,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    let n = a.ncols();
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { sparsity: s, dim: n });
    }
    let g = a.transpose() * a;
    let delta = match mode {
        EstimateMode::Exact => {
            let needed = binomial(n, s);
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
            combinations(n, s)
                .par_iter()
                .map(|sup| support_defect(&g, sup))
                .reduce(|| 0.0, f64::max)
        }
        EstimateMode::Sampled => {
            let mut rng = rng_from(seed);
            let draws: Vec<Vec<usize>> = (0..budget.min(1 << 24) as usize)
                .map(|_| {
                    let mut v = sample(&mut rng, n, s).into_vec();
                    v.sort_unstable();
                    v
                })
                .collect();
            draws
                .par_iter()
                .map(|sup| support_defect(&g, sup))
                .reduce(|| 0.0, f64::max)
        }
    };
    Ok(RipEstimate {
        order: s,
        delta: delta.max(0.0),
        exact: mode == EstimateMode::Exact,
    })
}

/// `θ_{s,s'} = max over disjoint (S, S') of ‖A_SᵀA_{S'}‖₂`.
pub fn estimate_roc(
    a: &DMatrix<f64>,
    s: usize,
    s2: usize,
    mode: EstimateMode,
    budget: u128,
    seed: u64,
) -> Result<RocEstimate> {
    let n = a.ncols();
    if s == 0 || s2 == 0 || s + s2 > n {
        return Err(Error::InvalidParameter(format!(
            "ROC orders ({s}, {s2}) need 1 <= s, s' and s + s' <= N = {n}"
        )));
    }
    let g = a.transpose() * a;
    let theta = match mode {
        EstimateMode::Exact => {
            let needed = binomial(n, s).saturating_mul(binomial(n - s, s2));
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
            let inner = combinations(n - s, s2);
            combinations(n, s)
                .par_iter()
                .map(|first| {
                    let rest: Vec<usize> = crate::linalg::complement(first, n);
                    let mut second = vec![0; s2];
                    inner.iter().fold(0.0f64, |m, pick| {
                        for (dst, &i) in second.iter_mut().zip(pick) {
                            *dst = rest[i];
                        }
                        m.max(cross_norm(&g, first, &second))
                    })
                })
                .reduce(|| 0.0, f64::max)
        }
        EstimateMode::Sampled => {
            let mut rng = rng_from(seed);
            let draws: Vec<(Vec<usize>, Vec<usize>)> = (0..budget.min(1 << 24) as usize)
                .map(|_| {
                    let v = sample(&mut rng, n, s + s2).into_vec();
                    (v[..s].to_vec(), v[s..].to_vec())
                })
                .collect();
            draws
                .par_iter()
                .map(|(p, q)| cross_norm(&g, p, q))
                .reduce(|| 0.0, f64::max)
        }
    };
    Ok(RocEstimate {
        orders: (s, s2),
        theta,
        exact: mode == EstimateMode::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 2), 120);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(500, 20), 266_719_851_283_743_829_654_740_530_950_952_475);
    }

    #[test]
    fn combinations_are_complete_and_ordered() {
        let c = combinations(5, 3);
        assert_eq!(c.len(), 10);
        assert_eq!(c[0], vec![0, 1, 2]);
        assert_eq!(c[9], vec![2, 3, 4]);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    #[test]
    fn diagonal_scaling_closed_form() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.2, 0.9]));
        let r = estimate_ric(&a, 1, EstimateMode::Exact, DEFAULT_BUDGET, 0).unwrap();
        assert!((r.delta - 0.44).abs() <= 1e-12);
        assert!(r.exact);
    }

    #[test]
    fn orthonormal_columns_have_zero_constants() {
        let q = DMatrix::from_fn(6, 6, |i, j| ((i * 3 + j * 5) as f64).cos()).qr().q();
        let a = q.columns(0, 4).into_owned();
        for s in 1..=4 {
            let r = estimate_ric(&a, s, EstimateMode::Exact, DEFAULT_BUDGET, 0).unwrap();
            assert!(r.delta <= 1e-12);
        }
        let t = estimate_roc(&a, 1, 2, EstimateMode::Exact, DEFAULT_BUDGET, 0).unwrap();
        assert!(t.theta <= 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let a = DMatrix::<f64>::identity(30, 30);
        assert!(matches!(
            estimate_ric(&a, 10, EstimateMode::Exact, 1000, 0),
            Err(Error::BudgetExceeded { .. })
        ));
        let r = estimate_ric(&a, 10, EstimateMode::Sampled, 50, 1).unwrap();
        assert!(!r.exact && r.delta <= 1e-12);
    }
}
