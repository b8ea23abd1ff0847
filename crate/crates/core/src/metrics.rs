// SPDX-License-Identifier: Apache-2.0

//! mSENR and support statistics over Monte Carlo trials.
//!
//! For node `l` at iteration `k` the signal-to-estimation-noise ratio is the
//! ratio of trial-averaged energies `E‖x‖² / E‖x − x̂_{l,k}‖²`; mSENR is the
//! node average of these ratios, in dB.

use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::algorithms::{fmt_db, AlgorithmKind, RunTrace};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Msenr {
    pub db: f64,
    /// Some node had exactly zero averaged error; `db` is `+∞`.
    pub degenerate: bool,
}

fn check(traces: &[&RunTrace], k: usize) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::InvalidParameter("no traces".into()));
    }
    let l = traces[0].node_count;
    for t in traces {
        if t.iterations() <= k {
            return Err(Error::InvalidParameter(format!(
                "trace has {} iterations, asked for k = {k}",
                t.iterations()
            )));
        }
        if t.node_count != l {
            return Err(Error::DimensionMismatch("traces disagree on node count".into()));
        }
    }
    Ok(())
}

/// Per-node SENR ratios (linear scale) at iteration `k`.
pub fn node_senr(traces: &[&RunTrace], k: usize) -> Result<Vec<f64>> {
    check(traces, k)?;
    let trials = traces.len() as f64;
    let signal = traces.iter().map(|t| t.signal_energy).sum::<f64>() / trials;
    Ok((0..traces[0].node_count)
        .map(|l| {
            let err = traces.iter().map(|t| t.err_l2[k][l].powi(2)).sum::<f64>() / trials;
            if err == 0.0 {
                f64::INFINITY
            } else {
                signal / err
            }
        })
        .collect())
}

/// mSENR in dB, ratio of trial averages per node, then node mean.
pub fn msenr(traces: &[&RunTrace], k: usize) -> Result<Msenr> {
    let ratios = node_senr(traces, k)?;
    let degenerate = ratios.iter().any(|r| r.is_infinite());
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(Msenr {
        db: 10.0 * mean.log10(),
        degenerate,
    })
}

/// The alternative ordering: node mean of trial means of per-trial ratios.
pub fn msenr_expectation_of_ratios(traces: &[&RunTrace], k: usize) -> Result<f64> {
    check(traces, k)?;
    let l = traces[0].node_count;
    let mut total = 0.0;
    for node in 0..l {
        let per_trial = traces
            .iter()
            .map(|t| t.signal_energy / t.err_l2[k][node].powi(2))
            .sum::<f64>();
        total += per_trial / traces.len() as f64;
    }
    Ok(10.0 * (total / l as f64).log10())
}

/// Fraction of (trial, node) pairs whose top-`s` support equals the truth's.
pub fn support_recovery_rate(traces: &[&RunTrace], k: usize) -> Result<f64> {
    check(traces, k)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for t in traces {
        hits += t.support_match[k].iter().filter(|h| **h).count();
        total += t.node_count;
    }
    Ok(hits as f64 / total as f64)
}

/// Percentile bootstrap over trials: `(lo, hi)` of the 95% interval.
pub fn bootstrap_ci(traces: &[&RunTrace], k: usize, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    check(traces, k)?;
    let mut rng = rng_from(seed);
    let n = traces.len();
    let mut stats = Vec::with_capacity(resamples);
    let mut sample = Vec::with_capacity(n);
    for _ in 0..resamples {
        sample.clear();
        sample.extend((0..n).map(|_| traces[rng.random_range(0..n)]));
        stats.push(msenr(&sample, k)?.db);
    }
    stats.sort_by(f64::total_cmp);
    let at = |q: f64| stats[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok((at(0.025), at(0.975)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub algorithm: AlgorithmKind,
    pub k: usize,
    pub msenr_db: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub supp_rate: f64,
    /// Vectors exchanged up to and including iteration `k`, summed over
    /// nodes and averaged over trials.
    pub comm_cum: f64,
    pub degenerate: bool,
    pub msenr_eor_db: f64,
}

/// One algorithm's metrics across iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub algorithm: AlgorithmKind,
    pub trials: usize,
    pub rows: Vec<MetricRow>,
    /// `[k][l]` SENR in dB.
    pub node_senr_db: Vec<Vec<f64>>,
}

impl MetricSeries {
    pub fn compute(traces: &[&RunTrace], ci_seed: u64, resamples: usize) -> Result<Self> {
        check(traces, 0)?;
        let algorithm = traces[0].algorithm;
        let iters = traces.iter().map(|t| t.iterations()).min().unwrap_or(0);
        let mut rows = Vec::with_capacity(iters);
        let mut node_senr_db = Vec::with_capacity(iters);
        for k in 0..iters {
            let m = msenr(traces, k)?;
            let (ci_lo, ci_hi) = if resamples > 0 {
                bootstrap_ci(traces, k, resamples, ci_seed ^ k as u64)?
            } else {
                (m.db, m.db)
            };
            let comm_cum =
                traces.iter().map(|t| t.comm_cumulative(k) as f64).sum::<f64>() / traces.len() as f64;
            rows.push(MetricRow {
                algorithm,
                k,
                msenr_db: m.db,
                ci_lo,
                ci_hi,
                supp_rate: support_recovery_rate(traces, k)?,
                comm_cum,
                degenerate: m.degenerate,
                msenr_eor_db: msenr_expectation_of_ratios(traces, k)?,
            });
            node_senr_db.push(node_senr(traces, k)?.iter().map(|r| 10.0 * r.log10()).collect());
        }
        Ok(MetricSeries {
            algorithm,
            trials: traces.len(),
            rows,
            node_senr_db,
        })
    }

    pub fn at(&self, k: usize) -> f64 {
        self.rows[k].msenr_db
    }

    pub fn last(&self) -> f64 {
        self.rows.last().map(|r| r.msenr_db).unwrap_or(f64::NAN)
    }
}

pub const METRICS_CSV_HEADER: &str = "algorithm,k,msenr_db,ci_lo,ci_hi,supp_rate,comm_cum";

pub fn write_metrics_csv<W: Write>(series: &[MetricSeries], w: &mut W) -> Result<()> {
    writeln!(w, "{METRICS_CSV_HEADER}")?;
    let mut rows: Vec<&MetricRow> = series.iter().flat_map(|s| &s.rows).collect();
    rows.sort_by_key(|r| (r.algorithm, r.k));
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{:.6},{}",
            r.algorithm,
            r.k,
            fmt_db(r.msenr_db),
            fmt_db(r.ci_lo),
            fmt_db(r.ci_hi),
            r.supp_rate,
            r.comm_cum
        )?;
    }
    Ok(())
}
