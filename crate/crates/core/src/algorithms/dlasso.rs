// SPDX-License-Identifier: Apache-2.0

//! Consensus-ADMM solution of the network LASSO
//!
//! ```text
//! minimize Σ_l ½‖y_l − A_l x_l‖² + (w/L)‖γ_l‖₁
//! subject to x_l = γ_l, x_l = x_r for every edge (l, r)
//! ```
//!
//! Per iteration node `l` updates
//!
//! ```text
//! x_l ← (A_lᵀA_l + ρ(2|N_l| + 1) I)⁻¹ (A_lᵀy_l − ω_l + ργ_l − p_l + ρ Σ_r (x_l + x_r))
//! γ_l ← S_{w/(Lρ)}(x_l + ω_l/ρ)
//! ```
//!
//! then exchanges `x_l` with its neighbors and updates the multipliers
//! `ω_l += ρ(x_l − γ_l)` and `p_l += ρ Σ_r (x_l − x_r)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::nbpdn::expect_kind;
use super::{check_network, AlgorithmConfig, AlgorithmKind, RecordLevel, Recorder, RunTrace, EARLY_STOP_TOL};
use crate::convex_core::{soft_threshold, SolverConfig};
use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::network::NetworkMatrix;

pub const DEFAULT_CONSENSUS_RHO: f64 = 1.0;

/// `σ·√(2 log N)` with `σ` the per-entry noise standard deviation.
pub fn default_lasso_weight(instance: &ProblemInstance) -> f64 {
    instance.noise_std * (2.0 * (instance.dim() as f64).ln()).sqrt()
}

struct DlassoNode<'a> {
    a: &'a DMatrix<f64>,
    aty: DVector<f64>,
    /// `(cI + AAᵀ)⁻¹` with `c = ρ(2|N| + 1)`.
    kinv: DMatrix<f64>,
    c: f64,
    neighbors: Vec<usize>,
}

impl DlassoNode<'_> {
    /// `(cI + AᵀA)⁻¹ r` through the Woodbury identity.
    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        let t = &self.kinv * (self.a * r);
        (r - self.a.transpose() * t) / self.c
    }
}

/// Symmetric neighbor sets implied by the off-diagonal pattern of `H`.
fn graph_neighbors(h: &NetworkMatrix, l: usize) -> Vec<usize> {
    (0..h.node_count())
        .filter(|&r| r != l && (h.weight(l, r) > 0.0 || h.weight(r, l) > 0.0))
        .collect()
}

pub fn run_dlasso(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    let _ = solver;
    expect_kind(config, &[AlgorithmKind::Dlasso])?;
    config.validate(instance.dim())?;
    check_network(instance, h)?;
    let node_count = instance.node_count();
    let n = instance.dim();
    let rho = config.dlasso.consensus_rho.unwrap_or(DEFAULT_CONSENSUS_RHO);
    let weight = config
        .dlasso
        .lasso_weight
        .unwrap_or_else(|| default_lasso_weight(instance));
    let threshold = weight / (node_count as f64 * rho);

    let nodes: Vec<DlassoNode> = instance
        .observations
        .iter()
        .enumerate()
        .map(|(l, o)| {
            let neighbors = graph_neighbors(h, l);
            let c = rho * (2 * neighbors.len() + 1) as f64;
            let m = o.a.nrows();
            let k = &o.a * o.a.transpose() + DMatrix::identity(m, m) * c;
            DlassoNode {
                a: &o.a,
                aty: o.a.transpose() * &o.y,
                kinv: k.cholesky().expect("cI + AAᵀ is positive definite").inverse(),
                c,
                neighbors,
            }
        })
        .collect();

    let mut rec = Recorder::new(
        AlgorithmKind::Dlasso,
        &instance.signal.values,
        instance.signal.sparsity,
        node_count,
        record,
    );
    let zeros = vec![DVector::zeros(n); node_count];
    let mut x = zeros.clone();
    let mut gamma = zeros.clone();
    let mut omega = zeros.clone();
    let mut p = zeros;
    rec.push(&gamma, vec![0; node_count], vec![0; node_count]);
    let comm: Vec<usize> = nodes.iter().map(|nd| nd.neighbors.len()).collect();
    let rows = config.max_outer_iters + 1;

    for k in 1..=config.max_outer_iters {
        let previous = &x;
        let updated: Vec<(DVector<f64>, DVector<f64>)> = (0..node_count)
            .into_par_iter()
            .map(|l| {
                let nd = &nodes[l];
                let mut r = &nd.aty - &omega[l] + &gamma[l] * rho - &p[l];
                for &j in &nd.neighbors {
                    r += (&previous[l] + &previous[j]) * rho;
                }
                let xl = nd.solve(&r);
                let gl = soft_threshold(&(&xl + &omega[l] / rho), threshold);
                (xl, gl)
            })
            .collect();
        let (next_x, next_gamma): (Vec<_>, Vec<_>) = updated.into_iter().unzip();
        // Exchange of x_l, then multiplier updates.
        for l in 0..node_count {
            omega[l] += (&next_x[l] - &next_gamma[l]) * rho;
            for &j in &nodes[l].neighbors {
                p[l] += (&next_x[l] - &next_x[j]) * rho;
            }
        }
        let moved = next_gamma
            .iter()
            .zip(&gamma)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        x = next_x;
        gamma = next_gamma;
        rec.push(&gamma, comm.clone(), vec![1; node_count]);
        if config.early_stop && moved < EARLY_STOP_TOL {
            rec.trace.stopped_at = Some(k);
            rec.pad_to(rows, &gamma);
            break;
        }
    }
    Ok(rec.finish(gamma))
}
