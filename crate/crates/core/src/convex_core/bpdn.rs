// SPDX-License-Identifier: Apache-2.0

//! ADMM solver for the penalized basis-pursuit-denoising program
//!
//! ```text
//! minimize   λ‖x‖₁ + (1 − λ)·g(x − x́)
//! subject to ‖A x − y‖₂ ≤ ε
//! ```
//!
//! with `g ∈ {‖·‖₁, ‖·‖₂, 0}`. The splitting is `u = x` (ℓ1 term),
//! `v = x − x́` (penalty term) and `w = A x` (ball constraint). Every
//! subproblem is closed form; the `x`-update solves `(cI + AᵀA) x = r`
//! through the Woodbury identity
//!
//! ```text
//! (cI + AᵀA)⁻¹ = (I − Aᵀ (cI + AAᵀ)⁻¹ A) / c
//! ```
//!
//! so only an `M×M` inverse is cached per node, and `A x` falls out of the
//! same solve (`A x = (cI + AAᵀ)⁻¹ A r`). All three constraints share one
//! penalty `ρ`, which keeps the factorization independent of `ρ` and makes
//! residual balancing free.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::prox::{block_shrink_in_place, project_ball_in_place, soft_scalar};
use super::support::prune_ls;
use crate::error::{Error, Result};
use crate::linalg::norm1;

/// ρ is rebalanced at most every `ADAPT_EVERY` iterations and frozen after
/// `ADAPT_UNTIL`, so the tail of every solve is plain fixed-ρ ADMM.
const ADAPT_EVERY: usize = 20;
const ADAPT_UNTIL: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Penalty {
    None,
    L1,
    L2,
}

/// One node's convex program.
#[derive(Debug, Clone)]
pub struct PenalizedBpdnProblem {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub epsilon: f64,
    pub lambda: f64,
    pub penalty: Penalty,
    /// Neighbor blend `x́`; ignored for [`Penalty::None`].
    pub anchor: DVector<f64>,
}

impl PenalizedBpdnProblem {
    /// Plain BPDN: `min ‖x‖₁ s.t. ‖Ax − y‖ ≤ ε`.
    pub fn bpdn(a: DMatrix<f64>, y: DVector<f64>, epsilon: f64) -> Self {
        let n = a.ncols();
        PenalizedBpdnProblem {
            a,
            y,
            epsilon,
            lambda: 1.0,
            penalty: Penalty::None,
            anchor: DVector::zeros(n),
        }
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        objective(x, self.lambda, self.penalty, &self.anchor)
    }
}

/// `λ‖x‖₁ + (1 − λ) g(x − x́)`; plain `‖x‖₁` for [`Penalty::None`].
pub fn objective(x: &DVector<f64>, lambda: f64, penalty: Penalty, anchor: &DVector<f64>) -> f64 {
    let l1 = lambda * norm1(x);
    match penalty {
        Penalty::None => norm1(x),
        Penalty::L1 => l1 + (1.0 - lambda) * norm1(&(x - anchor)),
        Penalty::L2 => l1 + (1.0 - lambda) * (x - anchor).norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_inner_iters: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub over_relaxation: f64,
    /// Residual balancing: scale ρ by 2 when the normalized primal/dual
    /// residual ratio leaves `[1/10, 10]`. Checked every 20 iterations
    /// during the first 1000.
    pub adaptive_rho: bool,
    /// Residuals are evaluated every `check_every` iterations.
    pub check_every: usize,
    /// Record the combined normalized residual at every iteration.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            max_inner_iters: 2000,
            tol_abs: 1e-6,
            tol_rel: 1e-5,
            over_relaxation: 1.6,
            adaptive_rho: true,
            check_every: 5,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("solver config: {m}")));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be > 0");
        }
        if self.max_inner_iters == 0 || self.check_every == 0 {
            return bad("iteration counts must be >= 1");
        }
        if !(self.tol_abs > 0.0 && self.tol_abs <= 1e-2 && self.tol_rel > 0.0 && self.tol_rel <= 1e-2)
        {
            return bad("tolerances must lie in (0, 1e-2]");
        }
        if !(1.0..=1.8).contains(&self.over_relaxation) {
            return bad("over_relaxation must lie in [1, 1.8]");
        }
        Ok(())
    }

    /// Same config with tighter tolerances, for oracle comparisons.
    pub fn tight() -> Self {
        SolverConfig {
            max_inner_iters: 50_000,
            tol_abs: 1e-10,
            tol_rel: 1e-9,
            check_every: 1,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_hat: DVector<f64>,
    pub inner_iters: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `max(0, ‖A x̂ − y‖ − ε)`.
    pub feasibility_gap: f64,
    pub objective: f64,
    pub converged: bool,
    pub rho: f64,
    /// Combined normalized residual per iteration (when recorded).
    pub history: Vec<f64>,
}

impl SolveReport {
    /// Feasibility tolerance `1e-6 · (1 + ‖y‖)`.
    pub fn feasibility_tolerance(y: &DVector<f64>) -> f64 {
        1e-6 * (1.0 + y.norm())
    }

    /// Turn a non-converged report into an error.
    pub fn into_result(self, node: Option<usize>) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxItersExceeded {
                iters: self.inner_iters,
                node,
            })
        }
    }
}

/// Full ADMM iterate, kept between outer iterations for warm starts.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
    pub du: DVector<f64>,
    pub dv: DVector<f64>,
    pub dw: DVector<f64>,
    pub rho: f64,
    /// ℓ1 weight (`λ`) the scaled duals were computed for.
    l1_weight: f64,
    had_penalty: bool,
}

impl AdmmState {
    fn cold(n: usize, m: usize, rho: f64) -> Self {
        AdmmState {
            x: DVector::zeros(n),
            u: DVector::zeros(n),
            v: DVector::zeros(n),
            w: DVector::zeros(m),
            du: DVector::zeros(n),
            dv: DVector::zeros(n),
            dw: DVector::zeros(m),
            rho,
            l1_weight: 1.0,
            had_penalty: false,
        }
    }

    /// State with primal iterate `x` and zero duals.
    pub fn from_point(a: &DMatrix<f64>, x: &DVector<f64>, rho: f64) -> Self {
        let mut s = AdmmState::cold(a.ncols(), a.nrows(), rho);
        s.x.copy_from(x);
        s.u.copy_from(x);
        s.w = a * x;
        s
    }
}

/// Per-matrix cached factorization, immutable and shareable.
#[derive(Debug)]
pub struct BpdnFactor {
    /// `Aᵀ`, so that `A v` runs as a transposed (dot-product) product.
    at: DMatrix<f64>,
    gram: DMatrix<f64>,
    /// `(I + AAᵀ)⁻¹` and `(2I + AAᵀ)⁻¹`.
    kinv: [DMatrix<f64>; 2],
    /// Cholesky of `AAᵀ` when `A` has full row rank.
    gram_chol: Option<Cholesky<f64, Dyn>>,
}

impl BpdnFactor {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let m = a.nrows();
        let gram = a * a.transpose();
        let kinv = [1.0, 2.0].map(|c| {
            let k = &gram + DMatrix::identity(m, m) * c;
            k.cholesky()
                .expect("cI + AAᵀ is positive definite")
                .inverse()
        });
        let gram_chol = if m <= a.ncols() {
            gram.clone().cholesky().filter(|ch| {
                let d = ch.l_dirty().diagonal();
                let max = d.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                let min = d.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
                min > 1e-7 * max
            })
        } else {
            None
        };
        BpdnFactor {
            at: a.transpose(),
            gram,
            kinv,
            gram_chol,
        }
    }
}

/// A node's solver: borrowed data plus its cached factorization.
#[derive(Debug, Clone)]
pub struct NodeSolver<'a> {
    a: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    factor: Arc<BpdnFactor>,
}

/// Parameters of one solve at a fixed node.
#[derive(Debug, Clone, Copy)]
pub struct SolveSpec<'b> {
    pub epsilon: f64,
    pub lambda: f64,
    pub penalty: Penalty,
    pub anchor: Option<&'b DVector<f64>>,
}

impl<'a> NodeSolver<'a> {
    pub fn new(a: &'a DMatrix<f64>, y: &'a DVector<f64>) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, y has length {}",
                a.nrows(),
                a.ncols(),
                y.len()
            )));
        }
        Ok(NodeSolver {
            a,
            y,
            factor: Arc::new(BpdnFactor::new(a)),
        })
    }

    pub fn with_factor(a: &'a DMatrix<f64>, y: &'a DVector<f64>, factor: Arc<BpdnFactor>) -> Self {
        NodeSolver { a, y, factor }
    }

    pub fn factor(&self) -> &Arc<BpdnFactor> {
        &self.factor
    }

    pub fn a(&self) -> &'a DMatrix<f64> {
        self.a
    }

    pub fn y(&self) -> &'a DVector<f64> {
        self.y
    }

    /// Solve, optionally warm-started from a previous ADMM state.
    /// Returns the report and the final state.
    pub fn solve(
        &self,
        spec: SolveSpec<'_>,
        config: &SolverConfig,
        warm: Option<&AdmmState>,
    ) -> Result<(SolveReport, AdmmState)> {
        config.validate()?;
        let (m, n) = self.a.shape();
        if !(spec.epsilon >= 0.0) {
            return Err(Error::InvalidParameter("epsilon must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&spec.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {}",
                spec.lambda
            )));
        }
        // λ = 1 removes the penalty term entirely.
        let penalty = if spec.lambda >= 1.0 { Penalty::None } else { spec.penalty };
        let zero_anchor;
        let anchor = match (penalty, spec.anchor) {
            (Penalty::None, _) => {
                zero_anchor = DVector::zeros(n);
                &zero_anchor
            }
            (_, Some(x)) => x,
            (_, None) => {
                return Err(Error::InvalidParameter("penalized solve needs an anchor".into()))
            }
        };
        if anchor.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "anchor has length {}, expected {n}",
                anchor.len()
            )));
        }
        let has_v = penalty != Penalty::None;
        let lambda = if has_v { spec.lambda } else { 1.0 };
        let pen_weight = 1.0 - lambda;
        let c = if has_v { 2.0 } else { 1.0 };
        let kinv = &self.factor.kinv[usize::from(has_v)];
        let gram = &self.factor.gram;
        let alpha = config.over_relaxation;

        let mut st = match warm {
            Some(w) if w.x.len() == n && w.w.len() == m => {
                let mut s = w.clone();
                if s.l1_weight > 0.0 {
                    let scale = lambda / s.l1_weight;
                    s.du *= scale;
                    s.dw *= scale;
                }
                if has_v {
                    s.v = &s.x - anchor;
                    if !s.had_penalty {
                        s.dv.fill(0.0);
                    }
                }
                s
            }
            _ => AdmmState::cold(n, m, config.rho),
        };
        st.l1_weight = lambda;
        st.had_penalty = has_v;
        let mut rho = st.rho;

        let mut p0 = DVector::zeros(n);
        let mut ap0 = DVector::zeros(m);
        let mut q = DVector::zeros(m);
        let mut rm = DVector::zeros(m);
        let mut t = DVector::zeros(m);
        let mut aty = DVector::zeros(n);
        let mut u_prev = st.u.clone();
        let mut v_prev = st.v.clone();
        let mut w_prev = st.w.clone();
        let mut history = Vec::new();
        let mut iters = 0;
        let mut converged = false;
        let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);

        let sqrt_pri = ((if has_v { 2 * n } else { n } + m) as f64).sqrt();
        let sqrt_dual = (n as f64).sqrt();

        while iters < config.max_inner_iters {
            iters += 1;
            let check = config.record_history
                || iters % config.check_every == 0
                || iters == config.max_inner_iters;
            if check {
                u_prev.copy_from(&st.u);
                w_prev.copy_from(&st.w);
                if has_v {
                    v_prev.copy_from(&st.v);
                }
            }

            // x-update: r = p0 + Aᵀq, t = K⁻¹ A r, x = (r − Aᵀt)/c, Ax = t.
            for i in 0..n {
                let mut val = st.u[i] - st.du[i];
                if has_v {
                    val += anchor[i] + st.v[i] - st.dv[i];
                }
                p0[i] = val;
            }
            for i in 0..m {
                q[i] = st.w[i] - st.dw[i];
            }
            ap0.gemv_tr(1.0, &self.factor.at, &p0, 0.0);
            rm.copy_from(&ap0);
            rm.gemv(1.0, gram, &q, 1.0);
            t.gemv(1.0, kinv, &rm, 0.0);
            q -= &t;
            st.x.copy_from(&p0);
            st.x.gemv_tr(1.0, self.a, &q, 1.0);
            st.x /= c;

            // u-update (ℓ1 prox) with over-relaxation.
            let thr_u = lambda / rho;
            for i in 0..n {
                let xr = alpha * st.x[i] + (1.0 - alpha) * st.u[i];
                let z = soft_scalar(xr + st.du[i], thr_u);
                st.du[i] += xr - z;
                st.u[i] = z;
            }
            // v-update (penalty prox).
            if has_v {
                let thr_v = pen_weight / rho;
                let mut arg = DVector::zeros(n);
                let mut xrs = DVector::zeros(n);
                for i in 0..n {
                    let xr = alpha * (st.x[i] - anchor[i]) + (1.0 - alpha) * st.v[i];
                    xrs[i] = xr;
                    arg[i] = xr + st.dv[i];
                }
                match penalty {
                    Penalty::L1 => arg.iter_mut().for_each(|a| *a = soft_scalar(*a, thr_v)),
                    Penalty::L2 => block_shrink_in_place(arg.as_mut_slice(), thr_v),
                    Penalty::None => unreachable!(),
                }
                for i in 0..n {
                    st.dv[i] += xrs[i] - arg[i];
                }
                st.v = arg;
            }
            // w-update (ball projection).
            for i in 0..m {
                let xr = alpha * t[i] + (1.0 - alpha) * st.w[i];
                q[i] = xr + st.dw[i];
                rm[i] = xr;
            }
            project_ball_in_place(q.as_mut_slice(), self.y.as_slice(), spec.epsilon);
            for i in 0..m {
                st.dw[i] += rm[i] - q[i];
            }
            st.w.copy_from(&q);

            if !check {
                continue;
            }

            // Residuals.
            let mut r2 = 0.0;
            let mut cx2 = 0.0;
            let mut z2 = 0.0;
            for i in 0..n {
                r2 += (st.x[i] - st.u[i]).powi(2);
                cx2 += st.x[i] * st.x[i];
                z2 += st.u[i] * st.u[i];
                if has_v {
                    r2 += (st.x[i] - anchor[i] - st.v[i]).powi(2);
                    cx2 += st.x[i] * st.x[i];
                    z2 += (st.v[i] + anchor[i]).powi(2);
                }
            }
            for i in 0..m {
                r2 += (t[i] - st.w[i]).powi(2);
                cx2 += t[i] * t[i];
                z2 += st.w[i] * st.w[i];
            }
            r_norm = r2.sqrt();
            // Dual residual ρ‖Δu + Δv + AᵀΔw‖ and dual scale ρ‖du + dv + Aᵀdw‖.
            for i in 0..m {
                q[i] = st.w[i] - w_prev[i];
            }
            aty.gemv_tr(1.0, self.a, &q, 0.0);
            let mut s2 = 0.0;
            for i in 0..n {
                let mut d = st.u[i] - u_prev[i] + aty[i];
                if has_v {
                    d += st.v[i] - v_prev[i];
                }
                s2 += d * d;
            }
            s_norm = rho * s2.sqrt();
            aty.gemv_tr(1.0, self.a, &st.dw, 0.0);
            let mut y2 = 0.0;
            for i in 0..n {
                let mut d = st.du[i] + aty[i];
                if has_v {
                    d += st.dv[i];
                }
                y2 += d * d;
            }
            let eps_pri = sqrt_pri * config.tol_abs + config.tol_rel * cx2.sqrt().max(z2.sqrt());
            let eps_dual = sqrt_dual * config.tol_abs + config.tol_rel * rho * y2.sqrt();
            let (rn, sn) = (r_norm / eps_pri, s_norm / eps_dual);
            if config.record_history {
                history.push(rn + sn);
            }
            if rn <= 1.0 && sn <= 1.0 {
                converged = true;
                break;
            }
            if config.adaptive_rho && iters % ADAPT_EVERY == 0 && iters <= ADAPT_UNTIL {
                let factor = if rn > 10.0 * sn {
                    2.0
                } else if sn > 10.0 * rn {
                    0.5
                } else {
                    1.0
                };
                if factor != 1.0 {
                    rho *= factor;
                    st.du /= factor;
                    st.dw /= factor;
                    if has_v {
                        st.dv /= factor;
                    }
                }
            }
        }
        st.rho = rho;

        // The split copies `u` and `x́ + v` are exact prox outputs and can
        // be closer to optimal than `x` itself; report the best feasible one.
        let feas_tol = SolveReport::feasibility_tolerance(self.y);
        let mut candidates = vec![st.x.clone(), st.u.clone()];
        if has_v {
            candidates.push(anchor + &st.v);
        }
        // Least-squares refit on the support of `u`.
        let support: Vec<usize> = (0..n).filter(|&i| st.u[i] != 0.0).collect();
        if !support.is_empty() && support.len() <= m {
            candidates.push(prune_ls(self.a, self.y, &support));
        }
        let mut best: Option<(DVector<f64>, f64, f64)> = None;
        for cand in candidates {
            let cand = self.restore_feasibility(&cand, spec.epsilon);
            let gap = ((self.a * &cand - self.y).norm() - spec.epsilon).max(0.0);
            let obj = objective(&cand, lambda, penalty, anchor);
            let better = match &best {
                None => true,
                Some((_, bo, bg)) => {
                    (gap <= feas_tol && (*bg > feas_tol || obj < *bo)) || (*bg > feas_tol && gap < *bg)
                }
            };
            if better {
                best = Some((cand, obj, gap));
            }
        }
        let (x_hat, obj, gap) = best.expect("at least one candidate");
        let report = SolveReport {
            objective: obj,
            feasibility_gap: gap,
            x_hat,
            inner_iters: iters,
            primal_residual: r_norm,
            dual_residual: s_norm,
            converged,
            rho,
            history,
        };
        if report.x_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("solver produced non-finite iterate".into()));
        }
        Ok((report, st))
    }

    /// Minimum-norm correction moving `x` onto the constraint boundary when
    /// it sits (slightly) outside the ball. Needs full row rank.
    fn restore_feasibility(&self, x: &DVector<f64>, epsilon: f64) -> DVector<f64> {
        let ax = self.a * x;
        let r = &ax - self.y;
        let rn = r.norm();
        if rn <= epsilon {
            return x.clone();
        }
        let Some(chol) = &self.factor.gram_chol else {
            return x.clone();
        };
        let target = self.y + &r * (epsilon / rn);
        let corr = chol.solve(&(target - ax));
        x + self.a.transpose() * corr
    }
}

/// One-shot solve of a [`PenalizedBpdnProblem`].
pub fn solve_penalized_bpdn(
    problem: &PenalizedBpdnProblem,
    config: &SolverConfig,
    warm_start: Option<&DVector<f64>>,
) -> Result<SolveReport> {
    if problem.anchor.len() != problem.a.ncols() {
        return Err(Error::DimensionMismatch("anchor length".into()));
    }
    let solver = NodeSolver::new(&problem.a, &problem.y)?;
    let warm = match warm_start {
        Some(x) if x.len() == problem.a.ncols() => {
            Some(AdmmState::from_point(&problem.a, x, config.rho))
        }
        Some(_) => return Err(Error::DimensionMismatch("warm start length".into())),
        None => None,
    };
    let spec = SolveSpec {
        epsilon: problem.epsilon,
        lambda: problem.lambda,
        penalty: problem.penalty,
        anchor: Some(&problem.anchor),
    };
    solver.solve(spec, config, warm.as_ref()).map(|(r, _)| r)
}
