// SPDX-License-Identifier: Apache-2.0

//! Config-driven experiments: Monte Carlo runs, parameter sweeps, bound
//! reports and RIC/ROC estimates, with their on-disk artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{
    default_lasso_weight, fmt_db, run_algorithm, write_trace_csv, AlgorithmConfig, AlgorithmKind,
    RecordLevel, RunTrace,
};
use crate::analysis::{
    bound_constants, default_partition, estimate_ric, estimate_roc, fixed_bound_frontier,
    fixed_bound_frontier_closed, fixed_bound_frontier_rounded, frame_matrix, BoundConstants,
    BoundInputs, EstimateMode, RipEstimate, RocEstimate, DEFAULT_BUDGET,
};
use crate::convex_core::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::{generate_observations_sized, generate_signal, EpsilonPolicy, ProblemInstance};
use crate::metrics::{write_metrics_csv, MetricSeries, BOOTSTRAP_RESAMPLES};
use crate::network::{build_network_matrix, generate_topology, NetworkMatrix, WeightScheme};
use crate::rng::{derive_seed, rng_from, stream};

pub const METADATA_SCHEMA_VERSION: u32 = 1;

pub const PRESET_NAMES: [&str; 4] = ["desk", "fig2", "fig3", "fig4"];

pub fn preset_json(name: &str) -> Option<&'static str> {
    match name {
        "desk" => Some(include_str!("../presets/desk.json")),
        "fig2" => Some(include_str!("../presets/fig2.json")),
        "fig3" => Some(include_str!("../presets/fig3.json")),
        "fig4" => Some(include_str!("../presets/fig4.json")),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let json = preset_json(name).ok_or_else(|| {
        Error::Config(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")))
    })?;
    ExperimentConfig::from_json(json)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceParams {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub nodes: usize,
    pub degree: usize,
    /// `null` for noiseless observations.
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub epsilon_policy: EpsilonPolicy,
    #[serde(default)]
    pub weights: WeightScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    SnrDb,
    Lambda,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::SnrDb => "snr_db",
            SweepParameter::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Iterations at which metrics are reported; empty means the last one.
    #[serde(default)]
    pub report_iters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub instance: InstanceParams,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Fill defaults that depend on the instance (sparsity of pruned
    /// variants) and validate everything.
    pub fn resolve(mut self) -> Result<Self> {
        let s = self.instance.s;
        for a in &mut self.algorithms {
            if a.kind.is_pruned() && a.sparsity.is_none() {
                a.sparsity = Some(s);
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.instance;
        if p.m == 0 || p.n == 0 {
            return Err(Error::Config("m and n must be >= 1".into()));
        }
        if p.s == 0 || p.s > p.n {
            return Err(Error::InvalidSparsity { sparsity: p.s, dim: p.n });
        }
        if p.nodes == 0 {
            return Err(Error::Config("nodes must be >= 1".into()));
        }
        if p.nodes > 1 && (p.degree == 0 || p.degree >= p.nodes || p.nodes * p.degree % 2 == 1) {
            return Err(Error::InfeasibleDegree {
                nodes: p.nodes,
                degree: p.degree,
            });
        }
        if let Some(snr) = p.snr_db {
            if !snr.is_finite() {
                return Err(Error::Config("snr_db must be finite; use null for noiseless".into()));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms".into()));
        }
        for a in &self.algorithms {
            a.validate(p.n)?;
        }
        self.solver.validate()?;
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(Error::Config("sweep has no values".into()));
            }
            for &v in &sw.values {
                let ok = match sw.parameter {
                    SweepParameter::SnrDb => v.is_finite(),
                    SweepParameter::Lambda => (0.0..=1.0).contains(&v),
                };
                if !ok {
                    return Err(Error::Config(format!("invalid {} value {v}", sw.parameter.name())));
                }
            }
            let kmin = self.algorithms.iter().map(|a| a.max_outer_iters).min().unwrap_or(0);
            if let Some(&k) = sw.report_iters.iter().find(|&&k| k > kmin) {
                return Err(Error::Config(format!(
                    "report iteration {k} exceeds the smallest iteration budget {kmin}"
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.instance.seed, &[stream::TRIAL, trial as u64])
    }
}

/// Instance and network of one Monte Carlo trial. The topology, weights,
/// signal and matrices depend only on the trial seed; `snr_db` only scales
/// the noise.
pub fn trial_setup(
    p: &InstanceParams,
    trial_seed: u64,
    snr_db: Option<f64>,
) -> Result<(ProblemInstance, NetworkMatrix)> {
    let h = if p.nodes == 1 {
        NetworkMatrix::identity(1)
    } else {
        let topo = generate_topology(p.nodes, p.degree, derive_seed(trial_seed, &[stream::TOPOLOGY]))?;
        let scheme = WeightScheme {
            seed: derive_seed(trial_seed, &[stream::WEIGHTS]),
            ..p.weights
        };
        build_network_matrix(&topo, &scheme)
    };
    let signal = generate_signal(p.n, p.s, derive_seed(trial_seed, &[stream::SIGNAL]))?;
    let inst = generate_observations_sized(
        &signal,
        &vec![p.m; p.nodes],
        snr_db.unwrap_or(f64::INFINITY),
        p.epsilon_policy,
        derive_seed(trial_seed, &[stream::OBSERVATIONS]),
    )?;
    Ok((inst, h))
}

/// Traces `[algorithm][trial]` for one parameter point.
pub fn run_trials(
    config: &ExperimentConfig,
    snr_db: Option<f64>,
    lambda: Option<f64>,
) -> Result<Vec<Vec<RunTrace>>> {
    let per_trial: Vec<Vec<RunTrace>> = (0..config.instance.trials)
        .into_par_iter()
        .map(|t| {
            let (inst, h) = trial_setup(&config.instance, config.trial_seed(t), snr_db)?;
            config
                .algorithms
                .iter()
                .map(|a| {
                    let mut a = a.clone();
                    if let Some(l) = lambda {
                        a.lambda = l;
                    }
                    run_algorithm(&inst, &h, &a, &config.solver, RecordLevel::Summary)
                        .map_err(|e| Error::Config(format!("trial {t}, {}: {e}", a.kind)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<RunTrace>> = vec![Vec::with_capacity(per_trial.len()); config.algorithms.len()];
    for trial in per_trial {
        for (slot, tr) in out.iter_mut().zip(trial) {
            slot.push(tr);
        }
    }
    Ok(out)
}

fn series_for(traces: &[Vec<RunTrace>], ci_seed: u64) -> Result<Vec<MetricSeries>> {
    traces
        .iter()
        .map(|ts| {
            let refs: Vec<&RunTrace> = ts.iter().collect();
            MetricSeries::compute(&refs, ci_seed, BOOTSTRAP_RESAMPLES)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlassoResolved {
    pub trial: usize,
    pub lasso_weight: f64,
    pub consensus_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub algorithm: AlgorithmKind,
    pub nonconverged_solves: usize,
    pub rank_deficient_refits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub library: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub trial_seeds: Vec<u64>,
    pub dlasso: Vec<DlassoResolved>,
    pub diagnostics: Vec<SolverDiagnostics>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub created_unix: u64,
}

impl Metadata {
    fn new(command: &str, config: &ExperimentConfig, traces: &[Vec<RunTrace>]) -> Result<Self> {
        let trial_seeds: Vec<u64> = (0..config.instance.trials).map(|t| config.trial_seed(t)).collect();
        let mut dlasso = Vec::new();
        if let Some(a) = config.algorithms.iter().find(|a| a.kind == AlgorithmKind::Dlasso) {
            for (t, &seed) in trial_seeds.iter().enumerate() {
                let w = match a.dlasso.lasso_weight {
                    Some(w) => w,
                    None => {
                        let (inst, _) = trial_setup(&config.instance, seed, config.instance.snr_db)?;
                        default_lasso_weight(&inst)
                    }
                };
                dlasso.push(DlassoResolved {
                    trial: t,
                    lasso_weight: w,
                    consensus_rho: a.dlasso.consensus_rho.unwrap_or(crate::algorithms::DEFAULT_CONSENSUS_RHO),
                });
            }
        }
        let diagnostics = config
            .algorithms
            .iter()
            .zip(traces)
            .map(|(a, ts)| SolverDiagnostics {
                algorithm: a.kind,
                nonconverged_solves: ts.iter().map(|t| t.nonconverged).sum(),
                rank_deficient_refits: ts.iter().map(|t| t.rank_deficient).sum(),
            })
            .collect();
        Ok(Metadata {
            schema_version: METADATA_SCHEMA_VERSION,
            library: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            config_sha256: config.hash(),
            trial_seeds,
            dlasso,
            diagnostics,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub struct RunOutput {
    pub traces: Vec<Vec<RunTrace>>,
    pub series: Vec<MetricSeries>,
    pub metadata: Metadata,
}

/// Run every (algorithm, trial) pair of `config`, and write `traces.csv`,
/// `metrics.csv` and `metadata.json` to `out` when given.
pub fn cmd_run(config: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput> {
    let config = config.clone().resolve()?;
    let traces = run_trials(&config, config.instance.snr_db, None)?;
    let series = series_for(&traces, config.instance.seed)?;
    let metadata = Metadata::new("run", &config, &traces)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let hash_line = format!("# config_sha256={}", metadata.config_sha256);
        let mut w = create(dir, "traces.csv")?;
        writeln!(w, "{hash_line}")?;
        let pairs: Vec<(usize, &RunTrace)> = traces
            .iter()
            .flat_map(|ts| ts.iter().enumerate())
            .collect();
        write_trace_csv(&pairs, &mut w)?;
        w.flush()?;
        let mut w = create(dir, "metrics.csv")?;
        writeln!(w, "{hash_line}")?;
        write_metrics_csv(&series, &mut w)?;
        w.flush()?;
        write_json(dir, "metadata.json", &metadata)?;
    }
    Ok(RunOutput {
        traces,
        series,
        metadata,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub algorithm: AlgorithmKind,
    pub k: usize,
    pub msenr_db: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub supp_rate: f64,
    pub comm_cum: f64,
}

pub struct SweepOutput {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub metadata: Metadata,
}

impl SweepOutput {
    pub fn get(&self, value: f64, algorithm: AlgorithmKind, k: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.algorithm == algorithm && r.k == k)
    }
}

pub const SWEEP_CSV_HEADER: &str = "parameter,value,algorithm,k,msenr_db,ci_lo,ci_hi,supp_rate,comm_cum";

/// Run the sweep of `config` and write `sweep.csv` and `metadata.json`.
pub fn cmd_sweep(config: &ExperimentConfig, out: Option<&Path>) -> Result<SweepOutput> {
    let config = config.clone().resolve()?;
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config(format!("config {:?} has no sweep block", config.scenario)))?;
    let mut rows = Vec::new();
    let mut last_traces = Vec::new();
    for &value in &sweep.values {
        let (snr, lambda) = match sweep.parameter {
            SweepParameter::SnrDb => (Some(value), None),
            SweepParameter::Lambda => (config.instance.snr_db, Some(value)),
        };
        let traces = run_trials(&config, snr, lambda)?;
        for s in series_for(&traces, config.instance.seed)? {
            let iters: Vec<usize> = if sweep.report_iters.is_empty() {
                vec![s.rows.len() - 1]
            } else {
                sweep.report_iters.clone()
            };
            for k in iters {
                let r = &s.rows[k];
                rows.push(SweepRow {
                    value,
                    algorithm: s.algorithm,
                    k,
                    msenr_db: r.msenr_db,
                    ci_lo: r.ci_lo,
                    ci_hi: r.ci_hi,
                    supp_rate: r.supp_rate,
                    comm_cum: r.comm_cum,
                });
            }
        }
        last_traces = traces;
    }
    let metadata = Metadata::new("sweep", &config, &last_traces)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut w = create(dir, "sweep.csv")?;
        writeln!(w, "# config_sha256={}", metadata.config_sha256)?;
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        let mut sorted: Vec<&SweepRow> = rows.iter().collect();
        sorted.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.algorithm.cmp(&b.algorithm))
                .then(a.k.cmp(&b.k))
        });
        for r in sorted {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:.6},{}",
                sweep.parameter.name(),
                r.value,
                r.algorithm,
                r.k,
                fmt_db(r.msenr_db),
                fmt_db(r.ci_lo),
                fmt_db(r.ci_hi),
                r.supp_rate,
                r.comm_cum
            )?;
        }
        w.flush()?;
        write_json(dir, "metadata.json", &metadata)?;
    }
    Ok(SweepOutput {
        parameter: sweep.parameter,
        rows,
        metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// i.i.d. `N(0, 1/M)` entries.
    #[default]
    Gaussian,
    /// Rows of a random orthogonal matrix, unit-norm columns.
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn build(&self) -> Result<DMatrix<f64>> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config("matrix needs m, n >= 1".into()));
        }
        let mut rng = rng_from(self.seed);
        Ok(match self.ensemble {
            Ensemble::Gaussian => {
                let scale = 1.0 / (self.m as f64).sqrt();
                DMatrix::from_fn(self.m, self.n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
            }
            Ensemble::Frame => {
                if self.m > self.n {
                    return Err(Error::Config("frame ensemble needs m <= n".into()));
                }
                frame_matrix(&mut rng, self.m, self.n)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRequest {
    pub matrix: MatrixSpec,
    pub s: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub lambdas: Vec<f64>,
    pub k: usize,
    pub mode: EstimateMode,
    pub budget: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedConstants {
    pub delta_sa: f64,
    pub delta_2s: f64,
    pub delta_s: f64,
    pub theta: f64,
    /// `false` when supports were sampled (lower bounds only).
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsGridPoint {
    pub lambda: f64,
    pub constants: Option<BoundConstants>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    /// Largest `δ_{2s}` with a valid fixed bound when `s = 4a = b`.
    pub bisection: f64,
    pub closed_form: f64,
    pub rounded_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub request: BoundsRequest,
    pub estimates: EstimatedConstants,
    pub grid: Vec<BoundsGridPoint>,
    pub frontier: Vec<FrontierPoint>,
}

pub fn frontier_point(lambda: f64) -> FrontierPoint {
    FrontierPoint {
        lambda,
        bisection: fixed_bound_frontier(lambda),
        closed_form: fixed_bound_frontier_closed(lambda),
        rounded_form: fixed_bound_frontier_rounded(lambda),
    }
}

/// Estimate the constants of one matrix and evaluate every bound across
/// the λ grid.
pub fn cmd_bounds(req: &BoundsRequest, out: Option<&Path>) -> Result<BoundsReport> {
    let a = req.matrix.build()?;
    let (da, db) = default_partition(req.s);
    let (pa, pb) = (req.a.unwrap_or(da), req.b.unwrap_or(db));
    if !(pa < pb && pb <= 4 * pa) {
        return Err(Error::InvalidPartition { a: pa, b: pb });
    }
    let n = a.ncols();
    if req.s + pa + pb > n || 2 * req.s > n {
        return Err(Error::Config(format!(
            "orders s + a + b = {} and 2s = {} must not exceed N = {n}",
            req.s + pa + pb,
            2 * req.s
        )));
    }
    let ric = |order| estimate_ric(&a, order, req.mode, req.budget, req.matrix.seed).map(|r| r.delta);
    let estimates = EstimatedConstants {
        delta_sa: ric(req.s + pa)?,
        delta_2s: ric(2 * req.s)?,
        delta_s: ric(req.s)?,
        theta: estimate_roc(&a, req.s + pa, pb, req.mode, req.budget, req.matrix.seed)?.theta,
        exact: req.mode == EstimateMode::Exact,
    };
    let grid = req
        .lambdas
        .iter()
        .map(|&lambda| {
            let inputs = BoundInputs {
                delta_sa: estimates.delta_sa,
                delta_2s: estimates.delta_2s,
                delta_s: estimates.delta_s,
                theta: estimates.theta,
                lambda,
                s: req.s,
                a: pa,
                b: pb,
                k: req.k,
            };
            match bound_constants(&inputs) {
                Ok(c) => BoundsGridPoint {
                    lambda,
                    constants: Some(c),
                    note: (!estimates.exact)
                        .then(|| "sampled estimates: flags are not certified".to_string()),
                },
                Err(e) => BoundsGridPoint {
                    lambda,
                    constants: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    let frontier = req.lambdas.iter().map(|&l| frontier_point(l)).collect();
    let report = BoundsReport {
        request: req.clone(),
        estimates,
        grid,
        frontier,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_json(dir, "bounds.json", &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RipReport {
    Ric(RipEstimate),
    Roc(RocEstimate),
}

/// `δ_s`, or `θ_{s,s'}` when `order2` is given.
pub fn cmd_rip(
    matrix: &MatrixSpec,
    order: usize,
    order2: Option<usize>,
    mode: EstimateMode,
    budget: Option<u128>,
) -> Result<RipReport> {
    let a = matrix.build()?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    Ok(match order2 {
        None => RipReport::Ric(estimate_ric(&a, order, mode, budget, matrix.seed)?),
        Some(o2) => RipReport::Roc(estimate_roc(&a, order, o2, mode, budget, matrix.seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap().resolve().unwrap();
            assert_eq!(c.scenario, name);
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        let json = r#"{"scenario":"x","instance":{"m":4,"n":8,"s":1,"nodes":2,"degree":1,
            "snr_db":null,"trials":1},"algorithms":[{"kind":"BPDN"}]}"#;
        assert!(matches!(ExperimentConfig::from_json(json), Err(Error::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = preset("desk").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.instance.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
