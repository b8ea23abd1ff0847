// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::AlgorithmKind;
use crate::convex_core::supp;
use crate::error::Result;
use crate::linalg::{norm0, norm1};

/// How much of the trajectory a run keeps. Error norms and diagnostics are
/// always recorded; full estimate vectors only with [`RecordLevel::Full`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordLevel {
    Full,
    #[default]
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: AlgorithmKind,
    pub node_count: usize,
    pub dim: usize,
    /// `‖x‖²` of the true signal.
    pub signal_energy: f64,
    /// `[k][l]` estimates, empty unless recorded in full.
    pub estimates: Vec<Vec<DVector<f64>>>,
    pub final_estimates: Vec<DVector<f64>>,
    /// `[k][l]` of `‖x − x̂_{l,k}‖₂`.
    pub err_l2: Vec<Vec<f64>>,
    /// `[k][l]` of `‖x − x̂_{l,k}‖₁`.
    pub err_l1: Vec<Vec<f64>>,
    /// `[k][l]`: `supp(x̂, s) == supp(x, s)` with `s` the true sparsity.
    pub support_match: Vec<Vec<bool>>,
    /// `[k][l]` of `‖x̂_{l,k}‖₀`.
    pub nnz: Vec<Vec<usize>>,
    /// `[k][l]` vectors received by node `l` in iteration `k`.
    pub comm: Vec<Vec<usize>>,
    /// `[k][l]` inner iterations of the node solve.
    pub inner_iters: Vec<Vec<usize>>,
    /// Node solves that hit the inner iteration cap.
    pub nonconverged: usize,
    /// Support refits with a rank-deficient column block.
    pub rank_deficient: usize,
    /// Outer iteration where early stopping fired, if it did.
    pub stopped_at: Option<usize>,
}

pub(crate) struct Recorder<'a> {
    truth: &'a DVector<f64>,
    truth_support: Vec<usize>,
    sparsity: usize,
    level: RecordLevel,
    pub trace: RunTrace,
}

impl<'a> Recorder<'a> {
    pub fn new(
        algorithm: AlgorithmKind,
        truth: &'a DVector<f64>,
        sparsity: usize,
        node_count: usize,
        level: RecordLevel,
    ) -> Self {
        Recorder {
            truth,
            truth_support: supp(truth, sparsity),
            sparsity,
            level,
            trace: RunTrace {
                algorithm,
                node_count,
                dim: truth.len(),
                signal_energy: truth.norm_squared(),
                estimates: Vec::new(),
                final_estimates: Vec::new(),
                err_l2: Vec::new(),
                err_l1: Vec::new(),
                support_match: Vec::new(),
                nnz: Vec::new(),
                comm: Vec::new(),
                inner_iters: Vec::new(),
                nonconverged: 0,
                rank_deficient: 0,
                stopped_at: None,
            },
        }
    }

    pub fn push(&mut self, estimates: &[DVector<f64>], comm: Vec<usize>, inner: Vec<usize>) {
        let t = &mut self.trace;
        let mut l2 = Vec::with_capacity(estimates.len());
        let mut l1 = Vec::with_capacity(estimates.len());
        let mut hits = Vec::with_capacity(estimates.len());
        let mut nnz = Vec::with_capacity(estimates.len());
        for x in estimates {
            assert!(x.iter().all(|v| v.is_finite()), "non-finite estimate");
            let z = x - self.truth;
            l2.push(z.norm());
            l1.push(norm1(&z));
            hits.push(supp(x, self.sparsity) == self.truth_support);
            nnz.push(norm0(x));
        }
        t.err_l2.push(l2);
        t.err_l1.push(l1);
        t.support_match.push(hits);
        t.nnz.push(nnz);
        t.comm.push(comm);
        t.inner_iters.push(inner);
        if self.level == RecordLevel::Full {
            t.estimates.push(estimates.to_vec());
        }
    }

    /// Repeat the last row until the trace holds `rows` iterations.
    pub fn pad_to(&mut self, rows: usize, estimates: &[DVector<f64>]) {
        let l = estimates.len();
        while self.trace.err_l2.len() < rows {
            self.push(estimates, vec![0; l], vec![0; l]);
        }
    }

    pub fn finish(mut self, estimates: Vec<DVector<f64>>) -> RunTrace {
        self.trace.final_estimates = estimates;
        self.trace
    }
}

pub const TRACE_CSV_HEADER: &str = "trial,algorithm,k,l,err_l2,msenr_partial,comm_count,inner_iters";

/// One CSV row of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub trial: usize,
    pub algorithm: AlgorithmKind,
    pub k: usize,
    pub l: usize,
    pub err_l2: f64,
    /// Per-node, per-trial `10 log₁₀(‖x‖² / ‖x − x̂_{l,k}‖²)`.
    pub msenr_partial: f64,
    pub comm_count: usize,
    pub inner_iters: usize,
}

impl RunTrace {
    /// Number of recorded iterations (`K + 1`).
    pub fn iterations(&self) -> usize {
        self.err_l2.len()
    }

    pub fn comm_total(&self, k: usize) -> usize {
        self.comm[k].iter().sum()
    }

    pub fn comm_cumulative(&self, k: usize) -> usize {
        (0..=k).map(|i| self.comm_total(i)).sum()
    }

    pub fn max_relative_error(&self, k: usize) -> f64 {
        let sx = self.signal_energy.sqrt();
        self.err_l2[k].iter().fold(0.0f64, |m, e| m.max(e / sx))
    }

    pub fn rows(&self, trial: usize) -> Vec<TraceRow> {
        let mut out = Vec::with_capacity(self.iterations() * self.node_count);
        for k in 0..self.iterations() {
            for l in 0..self.node_count {
                let e = self.err_l2[k][l];
                out.push(TraceRow {
                    trial,
                    algorithm: self.algorithm,
                    k,
                    l,
                    err_l2: e,
                    msenr_partial: 10.0 * (self.signal_energy / (e * e)).log10(),
                    comm_count: self.comm[k][l],
                    inner_iters: self.inner_iters[k][l],
                });
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Write rows for `(trial, trace)` pairs, sorted by `(trial, algorithm, k, l)`.
pub fn write_trace_csv<W: Write>(traces: &[(usize, &RunTrace)], w: &mut W) -> Result<()> {
    let mut rows: Vec<TraceRow> = traces.iter().flat_map(|(t, tr)| tr.rows(*t)).collect();
    rows.sort_by(|a, b| {
        (a.trial, a.algorithm, a.k, a.l).cmp(&(b.trial, b.algorithm, b.k, b.l))
    });
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:e},{},{},{}",
            r.trial,
            r.algorithm,
            r.k,
            r.l,
            r.err_l2,
            fmt_db(r.msenr_partial),
            r.comm_count,
            r.inner_iters
        )?;
    }
    Ok(())
}

pub(crate) fn fmt_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.6}")
    }
}
