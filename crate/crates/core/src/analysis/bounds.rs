// SPDX-License-Identifier: Apache-2.0

//! Constants of the error bounds and recurrence inequalities, evaluated
//! exactly as printed, plus validity flags for each result.
//!
//! Notation: `δ = δ_{s+a}`, `θ = θ_{s+a,b}`, `r = √(s/b)`, `λ′ = max(λ, ½)`,
//! `λ″ = max(λ, 1/(1+√s))`, `κ = (λ″(1+√s) − 1)/√b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `δ_{s+a}`.
    pub delta_sa: f64,
    /// `δ_{2s}`.
    pub delta_2s: f64,
    /// `δ_s`.
    pub delta_s: f64,
    /// `θ_{s+a,b}`.
    pub theta: f64,
    pub lambda: f64,
    pub s: usize,
    pub a: usize,
    pub b: usize,
    /// Iteration index used in the geometric sums.
    pub k: usize,
}

impl BoundInputs {
    /// Inputs with the default partition `a = ⌈s/4⌉`, `b = 4a`.
    pub fn with_default_partition(s: usize, lambda: f64, k: usize) -> Self {
        let (a, b) = default_partition(s);
        BoundInputs {
            delta_sa: 0.0,
            delta_2s: 0.0,
            delta_s: 0.0,
            theta: 0.0,
            lambda,
            s,
            a,
            b,
            k,
        }
    }
}

/// `a = ⌈s/4⌉`, `b = 4a`.
pub fn default_partition(s: usize) -> (usize, usize) {
    let a = s.div_ceil(4).max(1);
    (a, 4 * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityFlags {
    /// ℓ1- and ℓ2-penalty fixed bounds and their pruned versions:
    /// `λ > ½` and `c1 > 0`.
    pub fixed_bound: bool,
    /// ℓ1 recurrence: `c5 > 0`.
    pub recurrence_l1: bool,
    /// ℓ2 recurrence: `c8 > 0`.
    pub recurrence_l2: bool,
    /// Iteration-dependent bounds and the initialization bound:
    /// `δ + √(s/b) θ < 1`.
    pub iterative_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub inputs: BoundInputs,
    pub lambda_p: f64,
    pub lambda_pp: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c14: f64,
    pub c15: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    /// Fixed bound `‖x − x̂‖ ≤ fixed_eps·ε + fixed_tail·‖x_{T₀ᶜ}‖₁` (both penalties).
    pub fixed_eps: f64,
    pub fixed_tail: f64,
    /// Fixed bound of the pruned variants, `‖x − x̂‖ ≤ pruned_fixed_eps·ε`.
    pub pruned_fixed_eps: f64,
    /// Iteration-dependent bound of pruned NBPDN-1 (through `c14`).
    pub pruned_l1_eps: f64,
    /// Iteration-dependent bound of pruned NBPDN-2 (through `c15`).
    pub pruned_l2_eps: f64,
    pub flags: ValidityFlags,
}

/// `(c^k − 1)/(c − 1)`, with the limit `k` when `|c − 1| < 1e-12`.
pub fn geometric_sum(c: f64, k: usize) -> f64 {
    if (c - 1.0).abs() < 1e-12 {
        k as f64
    } else {
        (c.powi(k as i32) - 1.0) / (c - 1.0)
    }
}

pub fn bound_constants(inp: &BoundInputs) -> Result<BoundConstants> {
    let BoundInputs {
        delta_sa: d,
        delta_2s: d2s,
        delta_s: ds,
        theta: th,
        lambda: lam,
        s,
        a,
        b,
        k,
    } = *inp;
    if !(a < b && b <= 4 * a) {
        return Err(Error::InvalidPartition { a, b });
    }
    if s == 0 {
        return Err(Error::InvalidSparsity { sparsity: s, dim: 0 });
    }
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::InvalidParameter(format!("lambda {lam} outside [0, 1]")));
    }
    for (name, v) in [("delta_sa", d), ("delta_2s", d2s), ("delta_s", ds), ("theta", th)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1)")));
        }
    }
    let sf = s as f64;
    let bf = b as f64;
    let r = (sf / bf).sqrt();
    let lp = lam.max(0.5);
    let lpp = lam.max(1.0 / (1.0 + sf.sqrt()));
    let kappa = (lpp * (1.0 + sf.sqrt()) - 1.0) / bf.sqrt();

    let c1 = 1.0 - d - r * th / (2.0 * lam - 1.0);
    let c5 = 1.0 - d - r * (2.0 * lp - 1.0) * th;
    let c2 = 2.0 * (1.0 - lam) * (1.0 + 2.0 * lam * r * th / c5);
    let c3 = 2.0 * lam * (1.0 + 2.0 * lam * r * th / c5);
    let c4 = 4.0 * lam * (sf * (1.0 + d)).sqrt() / c5;
    let c6 = 2.0 * (1.0 + 2.0 * r * th / c5);
    let c7 = 4.0 * (sf * (1.0 + d)).sqrt() / c5;
    let c8 = 1.0 - d - kappa * th;
    let c9 = 2.0 * (1.0 - lam) / (lam * bf.sqrt()) * (1.0 + (1.0 + kappa) * th / c8);
    let c10 = 2.0 / bf.sqrt() * (1.0 + (1.0 + kappa) * th / c8);
    let c11 = (1.0 + kappa) * 2.0 * (1.0 + d).sqrt() / c8;
    let denom = 1.0 - d - r * th;
    let c12 = 2.0 / bf.sqrt() * (1.0 + th * (1.0 + sf / bf).sqrt() / denom);
    let c13 = 2.0 * (1.0 + sf / bf).sqrt() * (1.0 + d).sqrt() / denom;
    let shrink = 1.0 - d2s * d2s;
    let c14 = c2 * (2.0 * sf / shrink).sqrt();
    let c15 = c9 * (2.0 / shrink).sqrt();
    let g2 = geometric_sum(c2, k);
    let g9 = geometric_sum(c9, k);
    let d1 = g2 * (c4 + c2 * c7);
    let d2 = g2 * (c3 + c2 * c6);
    let d3 = g9 * (c11 + c9 * c13);
    let d4 = g9 * (c10 + c9 * c12);

    let fixed_eps = 4.0 * lam * (sf * (1.0 + d)).sqrt() / (c1 * (2.0 * lam - 1.0));
    let fixed_tail =
        2.0 * lam / (2.0 * lam - 1.0) * (1.0 + 2.0 * lam / (2.0 * lam - 1.0) * r * th / c1);
    let pruned_fixed_eps = 4.0 * lam * (2.0 * sf * (1.0 + d)).sqrt()
        / (c1 * (2.0 * lam - 1.0) * shrink.sqrt())
        + (1.0 + ds).sqrt() / (1.0 - d2s);
    let pruned_l1_eps = geometric_sum(c14, k)
        * ((c4 + c14 * c7) * (2.0 * sf / shrink).sqrt()
            + (1.0 + c14) * (2.0 * sf * (1.0 + ds)).sqrt() / (1.0 - d2s));
    let pruned_l2_eps = geometric_sum(c15, k)
        * ((c11 + c15 * c13) * (2.0 / shrink).sqrt() + (1.0 + c15) * (1.0 + ds).sqrt() / (1.0 - d2s));

    let flags = ValidityFlags {
        fixed_bound: lam > 0.5 && c1 > 0.0,
        recurrence_l1: c5 > 0.0,
        recurrence_l2: c8 > 0.0,
        iterative_bound: denom > 0.0,
    };
    Ok(BoundConstants {
        inputs: *inp,
        lambda_p: lp,
        lambda_pp: lpp,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c10,
        c11,
        c12,
        c13,
        c14,
        c15,
        d1,
        d2,
        d3,
        d4,
        fixed_eps,
        fixed_tail,
        pruned_fixed_eps,
        pruned_l1_eps,
        pruned_l2_eps,
        flags,
    })
}

impl BoundConstants {
    /// `(name, value)` pairs for c1…c15 and d1…d4.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c5", self.c5),
            ("c6", self.c6),
            ("c7", self.c7),
            ("c8", self.c8),
            ("c9", self.c9),
            ("c10", self.c10),
            ("c11", self.c11),
            ("c12", self.c12),
            ("c13", self.c13),
            ("c14", self.c14),
            ("c15", self.c15),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
        ]
    }
}

/// Largest `δ_{2s}` for which the fixed bound holds when `s = 4a = b`,
/// using `δ_{s+a} ≤ δ_{2s}` and `θ_{s+a,b} ≤ √1.25 δ_{2s}`. Found by
/// bisection on the validity flag. Zero when `λ ≤ ½`.
pub fn fixed_bound_frontier(lambda: f64) -> f64 {
    frontier_by_bisection(lambda, |c| c.flags.fixed_bound)
}

/// Same frontier for the iteration-dependent bounds (independent of `λ`).
pub fn iterative_bound_frontier(lambda: f64) -> f64 {
    frontier_by_bisection(lambda, |c| c.flags.iterative_bound)
}

fn frontier_by_bisection(lambda: f64, holds: impl Fn(&BoundConstants) -> bool) -> f64 {
    let eval = |delta: f64| {
        let inp = BoundInputs {
            delta_sa: delta,
            delta_2s: delta,
            delta_s: delta,
            theta: 1.25f64.sqrt() * delta,
            lambda,
            s: 4,
            a: 1,
            b: 4,
            k: 1,
        };
        inp.theta < 1.0 && bound_constants(&inp).map(|c| holds(&c)).unwrap_or(false)
    };
    if !eval(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    lo
}

/// Closed form of [`fixed_bound_frontier`]: `(2λ − 1)/(2λ − 1 + √1.25)`.
pub fn fixed_bound_frontier_closed(lambda: f64) -> f64 {
    if lambda <= 0.5 {
        0.0
    } else {
        (2.0 * lambda - 1.0) / (2.0 * lambda - 1.0 + 1.25f64.sqrt())
    }
}

/// The rounded form `(2λ − 1)/(2λ + 0.12)` quoted alongside the bound.
pub fn fixed_bound_frontier_rounded(lambda: f64) -> f64 {
    if lambda <= 0.5 {
        0.0
    } else {
        (2.0 * lambda - 1.0) / (2.0 * lambda + 0.12)
    }
}
