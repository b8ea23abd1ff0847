// SPDX-License-Identifier: Apache-2.0

//! Post-hoc check of the per-iteration recurrence inequalities on a run.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_constants, BoundConstants, BoundInputs};
use super::ric::{estimate_ric, estimate_roc, EstimateMode};
use crate::algorithms::{AlgorithmKind, RunTrace};
use crate::convex_core::supp;
use crate::error::Result;
use crate::instance::ProblemInstance;
use crate::linalg::{complement, norm1, restrict};
use crate::network::NetworkMatrix;

/// Allowed negative slack before a point counts as a violation.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceVariant {
    /// `‖z_{l,k}‖₁ ≤ c2 Σ h_lr ‖z_{r,k−1}‖₁ + c3 ‖x_{T₀ᶜ}‖₁ + c4 ε` for NBPDN-1.
    #[serde(rename = "NBPDN1-l1")]
    Nbpdn1L1,
    /// `‖z_{l,k}‖ ≤ c9 Σ h_lr ‖z_{r,k−1}‖ + c10 ‖x_{T₀ᶜ}‖₁ + c11 ε` for NBPDN-2.
    #[serde(rename = "NBPDN2-l2")]
    Nbpdn2L2,
}

impl RecurrenceVariant {
    pub fn algorithm(self) -> AlgorithmKind {
        match self {
            RecurrenceVariant::Nbpdn1L1 => AlgorithmKind::Nbpdn1,
            RecurrenceVariant::Nbpdn2L2 => AlgorithmKind::Nbpdn2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub variant: RecurrenceVariant,
    pub applicable: bool,
    /// Why the check was gated off.
    pub reason: Option<String>,
    /// `[k−1][l]` of RHS − LHS for `k ≥ 1`.
    pub slack: Vec<Vec<f64>>,
    pub violations: usize,
    pub min_slack: f64,
    /// ℓ2 error sequence `[k][l]`, recorded for the ℓ1 variant only.
    pub l2_errors: Option<Vec<Vec<f64>>>,
}

impl RecurrenceReport {
    fn not_applicable(variant: RecurrenceVariant, reason: String) -> Self {
        RecurrenceReport {
            variant,
            applicable: false,
            reason: Some(reason),
            slack: Vec::new(),
            violations: 0,
            min_slack: f64::INFINITY,
            l2_errors: None,
        }
    }

    /// No violations, or not applicable.
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Exact `δ_{s+a}`, `δ_{2s}`, `δ_s` and `θ_{s+a,b}` of `a`. Returns `None`
/// when any of them reaches 1.
pub fn exact_bound_inputs(
    a: &DMatrix<f64>,
    s: usize,
    part_a: usize,
    part_b: usize,
    lambda: f64,
    k: usize,
    budget: u128,
) -> Result<Option<BoundInputs>> {
    let n = a.ncols();
    let ric = |order: usize| -> Result<f64> {
        Ok(estimate_ric(a, order.min(n), EstimateMode::Exact, budget, 0)?.delta)
    };
    let delta_sa = ric(s + part_a)?;
    let delta_2s = ric(2 * s)?;
    let delta_s = ric(s)?;
    let theta = estimate_roc(a, s + part_a, part_b, EstimateMode::Exact, budget, 0)?.theta;
    if [delta_sa, delta_2s, delta_s, theta].iter().any(|&v| v >= 1.0) {
        return Ok(None);
    }
    Ok(Some(BoundInputs {
        delta_sa,
        delta_2s,
        delta_s,
        theta,
        lambda,
        s,
        a: part_a,
        b: part_b,
        k,
    }))
}

/// Per-node constants from exact estimates of every local matrix. `None` if
/// some node has a constant at or above 1.
pub fn node_constants(
    instance: &ProblemInstance,
    s: usize,
    part_a: usize,
    part_b: usize,
    lambda: f64,
    k: usize,
    budget: u128,
) -> Result<Option<Vec<BoundConstants>>> {
    let mut out = Vec::with_capacity(instance.node_count());
    for obs in &instance.observations {
        match exact_bound_inputs(&obs.a, s, part_a, part_b, lambda, k, budget)? {
            Some(inp) => out.push(bound_constants(&inp)?),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Evaluate the recurrence inequality of `variant` at every `(l, k ≥ 1)`.
pub fn check_recurrence(
    trace: &RunTrace,
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    constants: &[BoundConstants],
    variant: RecurrenceVariant,
) -> RecurrenceReport {
    let nodes = instance.node_count();
    if trace.algorithm != variant.algorithm() {
        return RecurrenceReport::not_applicable(
            variant,
            format!("trace is {}, check needs {}", trace.algorithm, variant.algorithm()),
        );
    }
    if constants.len() != nodes || h.node_count() != nodes || trace.node_count != nodes {
        return RecurrenceReport::not_applicable(variant, "node count mismatch".into());
    }
    for (l, c) in constants.iter().enumerate() {
        let ok = match variant {
            RecurrenceVariant::Nbpdn1L1 => c.flags.recurrence_l1,
            RecurrenceVariant::Nbpdn2L2 => c.flags.recurrence_l2,
        };
        if !ok {
            return RecurrenceReport::not_applicable(
                variant,
                format!("node {l}: RIC/ROC condition not met"),
            );
        }
    }
    let eps = instance.epsilon;
    for (l, obs) in instance.observations.iter().enumerate() {
        if obs.noise.norm() > eps * (1.0 + 1e-12) {
            return RecurrenceReport::not_applicable(
                variant,
                format!("node {l}: noise norm exceeds epsilon"),
            );
        }
    }

    let x = &instance.signal.values;
    let s = constants[0].inputs.s;
    let t0 = supp(x, s);
    let tail = norm1(&restrict(x, &complement(&t0, x.len())));
    let err = match variant {
        RecurrenceVariant::Nbpdn1L1 => &trace.err_l1,
        RecurrenceVariant::Nbpdn2L2 => &trace.err_l2,
    };
    let last = trace.stopped_at.unwrap_or(err.len().saturating_sub(1));

    let mut slack = Vec::with_capacity(last);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for k in 1..=last.min(err.len().saturating_sub(1)) {
        let row: Vec<f64> = (0..nodes)
            .map(|l| {
                let c = &constants[l];
                let (cr, ct, ce) = match variant {
                    RecurrenceVariant::Nbpdn1L1 => (c.c2, c.c3, c.c4),
                    RecurrenceVariant::Nbpdn2L2 => (c.c9, c.c10, c.c11),
                };
                let blended: f64 = h
                    .active_row(l)
                    .iter()
                    .map(|&(r, w)| w * err[k - 1][r])
                    .sum();
                cr * blended + ct * tail + ce * eps - err[k][l]
            })
            .collect();
        for &v in &row {
            min_slack = min_slack.min(v);
            if v < -SLACK_TOL {
                violations += 1;
            }
        }
        slack.push(row);
    }
    RecurrenceReport {
        variant,
        applicable: true,
        reason: None,
        slack,
        violations,
        min_slack,
        l2_errors: (variant == RecurrenceVariant::Nbpdn1L1).then(|| trace.err_l2.clone()),
    }
}
