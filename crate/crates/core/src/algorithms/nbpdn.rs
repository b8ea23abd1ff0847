// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;
use rayon::prelude::*;

use super::{
    blend_neighbors, check_network, AlgorithmConfig, AlgorithmKind, RecordLevel, Recorder,
    RunTrace, EARLY_STOP_TOL,
};
use crate::convex_core::{
    prune_ls_with_diagnostics, supp, AdmmState, NodeSolver, Penalty, SolveSpec, SolverConfig,
};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::network::NetworkMatrix;

struct NodeStep {
    estimate: DVector<f64>,
    state: AdmmState,
    inner: usize,
    converged: bool,
    rank_deficient: bool,
}

struct Cooperative<'a> {
    solvers: Vec<NodeSolver<'a>>,
    epsilon: f64,
    lambda: f64,
    penalty: Penalty,
    prune: Option<usize>,
    solver: &'a SolverConfig,
}

impl Cooperative<'_> {
    fn step(
        &self,
        l: usize,
        anchor: Option<&DVector<f64>>,
        warm: Option<&AdmmState>,
    ) -> Result<NodeStep> {
        let spec = match anchor {
            None => SolveSpec {
                epsilon: self.epsilon,
                lambda: 1.0,
                penalty: Penalty::None,
                anchor: None,
            },
            Some(a) => SolveSpec {
                epsilon: self.epsilon,
                lambda: self.lambda,
                penalty: self.penalty,
                anchor: Some(a),
            },
        };
        let (report, state) = self.solvers[l]
            .solve(spec, self.solver, warm)
            .map_err(|e| Error::InvalidParameter(format!("node {l}: {e}")))?;
        if !report.converged {
            log::warn!(
                "node {l}: inner solve stopped at {} iterations without converging",
                report.inner_iters
            );
        }
        let (estimate, rank_deficient) = match self.prune {
            Some(s) => {
                let support = supp(&report.x_hat, s);
                let fit = prune_ls_with_diagnostics(self.solvers[l].a(), self.solvers[l].y(), &support);
                (fit.x, fit.rank_deficient)
            }
            None => (report.x_hat, false),
        };
        Ok(NodeStep {
            estimate,
            state,
            inner: report.inner_iters,
            converged: report.converged,
            rank_deficient,
        })
    }
}

fn absorb(rec: &mut Recorder<'_>, steps: Vec<NodeStep>, comm: Vec<usize>) -> (Vec<DVector<f64>>, Vec<AdmmState>) {
    let inner = steps.iter().map(|s| s.inner).collect();
    rec.trace.nonconverged += steps.iter().filter(|s| !s.converged).count();
    rec.trace.rank_deficient += steps.iter().filter(|s| s.rank_deficient).count();
    let (estimates, states): (Vec<_>, Vec<_>) = steps.into_iter().map(|s| (s.estimate, s.state)).unzip();
    rec.push(&estimates, comm, inner);
    (estimates, states)
}

fn run_cooperative(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    config.validate(instance.dim())?;
    solver.validate()?;
    check_network(instance, h)?;
    let node_count = instance.node_count();
    let solvers = instance
        .observations
        .iter()
        .map(|o| NodeSolver::new(&o.a, &o.y))
        .collect::<Result<Vec<_>>>()?;
    let kind = config.kind;
    let ctx = Cooperative {
        solvers,
        epsilon: config.epsilon.unwrap_or(instance.epsilon),
        lambda: config.lambda,
        penalty: kind.penalty(),
        prune: if kind.is_pruned() { config.sparsity } else { None },
        solver,
    };
    let mut rec = Recorder::new(
        kind,
        &instance.signal.values,
        instance.signal.sparsity,
        node_count,
        record,
    );

    // Iteration 0: local BPDN (plus pruning for the pruned variants).
    let steps = (0..node_count)
        .into_par_iter()
        .map(|l| ctx.step(l, None, None))
        .collect::<Result<Vec<_>>>()?;
    let (mut estimates, mut states) = absorb(&mut rec, steps, vec![0; node_count]);
    let rows = config.max_outer_iters + 1;
    if kind == AlgorithmKind::Bpdn {
        rec.pad_to(rows, &estimates);
        return Ok(rec.finish(estimates));
    }
    let comm: Vec<usize> = (0..node_count).map(|l| h.incoming_links(l)).collect();

    for k in 1..=config.max_outer_iters {
        // Barrier: every anchor is formed from iteration k − 1 only.
        let previous = &estimates;
        let steps = (0..node_count)
            .into_par_iter()
            .map(|l| {
                let anchor = blend_neighbors(h, previous, l);
                ctx.step(l, Some(&anchor), Some(&states[l]))
            })
            .collect::<Result<Vec<_>>>()?;
        let (next, next_states) = absorb(&mut rec, steps, comm.clone());
        let moved = next
            .iter()
            .zip(&estimates)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        estimates = next;
        states = next_states;
        if config.early_stop && moved < EARLY_STOP_TOL {
            rec.trace.stopped_at = Some(k);
            rec.pad_to(rows, &estimates);
            break;
        }
    }
    Ok(rec.finish(estimates))
}

/// Local BPDN at every node, no cooperation. The trace repeats the
/// initialization for all `K` iterations.
pub fn run_bpdn(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    expect_kind(config, &[AlgorithmKind::Bpdn])?;
    run_cooperative(instance, h, config, solver, record)
}

/// NBPDN-1 (ℓ1 penalty) and NBPDN-2 (ℓ2 penalty).
pub fn run_nbpdn(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    expect_kind(config, &[AlgorithmKind::Nbpdn1, AlgorithmKind::Nbpdn2])?;
    run_cooperative(instance, h, config, solver, record)
}

/// Pruned NBPDN: each node solve is followed by top-`s` support selection
/// and a least-squares refit on that support.
pub fn run_pnbpdn(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    expect_kind(config, &[AlgorithmKind::Pnbpdn1, AlgorithmKind::Pnbpdn2])?;
    run_cooperative(instance, h, config, solver, record)
}

pub(super) fn expect_kind(config: &AlgorithmConfig, kinds: &[AlgorithmKind]) -> Result<()> {
    if kinds.contains(&config.kind) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "algorithm {} not handled by this runner",
            config.kind
        )))
    }
}
