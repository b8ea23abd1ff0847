// SPDX-License-Identifier: Apache-2.0

//! The per-node convex program and its building blocks.

mod bpdn;
mod prox;
mod support;

pub use bpdn::{
    objective, solve_penalized_bpdn, AdmmState, BpdnFactor, NodeSolver, PenalizedBpdnProblem,
    Penalty, SolveReport, SolveSpec, SolverConfig,
};
pub use prox::{block_shrink, project_ball, soft_threshold};
pub use support::{prune_ls, prune_ls_with_diagnostics, supp, SupportFit};
