// SPDX-License-Identifier: Apache-2.0

//! Lemma suite plus recurrence checks on small valid-RIP networks.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::lemmas::{check_lemma_bounds, frame_matrix, LemmaCase, LemmaOptions, LemmaReport};
use super::recurrence::{check_recurrence, node_constants, RecurrenceVariant};
use super::ric::DEFAULT_BUDGET;
use crate::algorithms::{run_algorithm, AlgorithmConfig, RecordLevel};
use crate::convex_core::SolverConfig;
use crate::error::Result;
use crate::instance::{generate_signal, NodeObservation, ProblemInstance};
use crate::network::{build_network_matrix, generate_topology, NetworkMatrix, WeightScheme};
use crate::rng::{derive_seed, rng_from, stream};

/// Shape of the recurrence instances: `N`, `M`, `s`, `a`, `b`, `L`, `d`.
pub const RECURRENCE_SHAPE: (usize, usize, usize, usize, usize, usize, usize) = (16, 12, 2, 1, 4, 4, 2);
pub const RECURRENCE_LAMBDA: f64 = 0.1;
pub const RECURRENCE_ITERS: usize = 10;
pub const RECURRENCE_SNR_DB: f64 = 20.0;
const MAX_INSTANCE_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub lemma_trials: usize,
    pub recurrence_trials: usize,
    /// Passed to every lemma check; nonzero only for self-tests.
    pub perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            lemma_trials: 200,
            recurrence_trials: 20,
            perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSummary {
    pub variant: RecurrenceVariant,
    pub trials: usize,
    /// Trials whose instance met the RIC/ROC condition.
    pub applicable: usize,
    pub checked_points: usize,
    pub violations: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub lemmas: Vec<LemmaReport>,
    pub recurrences: Vec<RecurrenceSummary>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.lemmas.iter().map(|l| l.violations()).sum::<usize>()
            + self.recurrences.iter().map(|r| r.violations).sum::<usize>()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn is_empty(&self) -> bool {
        self.options.lemma_trials == 0 && self.options.recurrence_trials == 0
    }
}

/// Random network instance with frame matrices and noise at
/// [`RECURRENCE_SNR_DB`]; `ε` is the realized `max_l ‖e_l‖`.
pub fn recurrence_instance(seed: u64) -> Result<(ProblemInstance, NetworkMatrix)> {
    let (n, m, s, _, _, nodes, degree) = RECURRENCE_SHAPE;
    let topo = generate_topology(nodes, degree, derive_seed(seed, &[stream::TOPOLOGY]))?;
    let h = build_network_matrix(&topo, &WeightScheme::default());
    let signal = generate_signal(n, s, derive_seed(seed, &[stream::SIGNAL]))?;
    let mut rng = rng_from(derive_seed(seed, &[stream::OBSERVATIONS]));
    let std = (signal.values.norm_squared() * 10f64.powf(-RECURRENCE_SNR_DB / 10.0) / m as f64).sqrt();
    let observations: Vec<NodeObservation> = (0..nodes)
        .map(|_| {
            let a = frame_matrix(&mut rng, m, n);
            let noise = DVector::from_fn(m, |_, _| std * rng.sample::<f64, _>(StandardNormal));
            let y = &a * &signal.values + &noise;
            NodeObservation { y, a, noise }
        })
        .collect();
    let eps = observations.iter().map(|o| o.noise.norm()).fold(0.0, f64::max);
    let mut inst = ProblemInstance::from_parts(signal, observations, eps)?;
    inst.noise_std = std;
    inst.snr_db = RECURRENCE_SNR_DB;
    inst.seed = seed;
    Ok((inst, h))
}

/// Run both recurrence variants on `trials` fresh instances.
pub fn recurrence_suite(seed: u64, trials: usize) -> Result<Vec<RecurrenceSummary>> {
    let (_, _, s, pa, pb, _, _) = RECURRENCE_SHAPE;
    let variants = [RecurrenceVariant::Nbpdn1L1, RecurrenceVariant::Nbpdn2L2];
    let mut out: Vec<RecurrenceSummary> = variants
        .iter()
        .map(|&variant| RecurrenceSummary {
            variant,
            trials,
            applicable: 0,
            checked_points: 0,
            violations: 0,
            min_slack: f64::INFINITY,
        })
        .collect();
    let solver = SolverConfig::tight();
    for t in 0..trials {
        let mut found = None;
        for attempt in 0..MAX_INSTANCE_ATTEMPTS {
            let inst_seed = derive_seed(seed, &[stream::TRIAL, t as u64, attempt as u64]);
            let (inst, h) = recurrence_instance(inst_seed)?;
            if let Some(c) =
                node_constants(&inst, s, pa, pb, RECURRENCE_LAMBDA, RECURRENCE_ITERS, DEFAULT_BUDGET)?
            {
                found = Some((inst, h, c));
                break;
            }
        }
        let Some((inst, h, constants)) = found else {
            continue;
        };
        for (summary, &variant) in out.iter_mut().zip(&variants) {
            let cfg = AlgorithmConfig::new(variant.algorithm(), RECURRENCE_LAMBDA, RECURRENCE_ITERS);
            let trace = run_algorithm(&inst, &h, &cfg, &solver, RecordLevel::Summary)?;
            let report = check_recurrence(&trace, &inst, &h, &constants, variant);
            if report.applicable {
                summary.applicable += 1;
                summary.checked_points += report.slack.iter().map(Vec::len).sum::<usize>();
                summary.violations += report.violations;
                summary.min_slack = summary.min_slack.min(report.min_slack);
            }
        }
    }
    Ok(out)
}

pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut lemmas = Vec::new();
    if opts.lemma_trials > 0 {
        for case in LemmaCase::ALL {
            let lo = LemmaOptions {
                trials: opts.lemma_trials,
                seed: opts.seed,
                perturbation: opts.perturbation,
            };
            lemmas.push(check_lemma_bounds(case, &lo)?);
        }
    }
    let recurrences = if opts.recurrence_trials > 0 {
        recurrence_suite(opts.seed, opts.recurrence_trials)?
    } else {
        Vec::new()
    };
    Ok(VerifyReport {
        options: *opts,
        lemmas,
        recurrences,
    })
}
