// SPDX-License-Identifier: Apache-2.0

//! Randomized checks of the supporting inequalities on small instances.
//!
//! Each trial draws a fresh instance satisfying the hypotheses of the
//! inequality (resampling when it does not), evaluates both sides and
//! records `RHS − LHS`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_constants, default_partition};
use super::recurrence::{exact_bound_inputs, SLACK_TOL};
use super::ric::{estimate_ric, EstimateMode, DEFAULT_BUDGET};
use crate::convex_core::{prune_ls, solve_penalized_bpdn, supp, Penalty, PenalizedBpdnProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{complement, norm1, restrict};
use crate::rng::{derive_seed, rng_from, stream, Rng};

const MAX_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaCase {
    #[serde(rename = "L1-pruning")]
    L1Pruning,
    #[serde(rename = "L2-pruning")]
    L2Pruning,
    #[serde(rename = "smaller-indices-l1")]
    SmallerIndicesL1,
    #[serde(rename = "smaller-indices-l2")]
    SmallerIndicesL2,
    #[serde(rename = "shifting")]
    Shifting,
    #[serde(rename = "ineq-lemma-4")]
    IneqLemma4,
    #[serde(rename = "ineq-lemma-5")]
    IneqLemma5,
    #[serde(rename = "bpdn-init")]
    BpdnInit,
}

impl LemmaCase {
    pub const ALL: [LemmaCase; 8] = [
        LemmaCase::L1Pruning,
        LemmaCase::L2Pruning,
        LemmaCase::SmallerIndicesL1,
        LemmaCase::SmallerIndicesL2,
        LemmaCase::Shifting,
        LemmaCase::IneqLemma4,
        LemmaCase::IneqLemma5,
        LemmaCase::BpdnInit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaCase::L1Pruning => "L1-pruning",
            LemmaCase::L2Pruning => "L2-pruning",
            LemmaCase::SmallerIndicesL1 => "smaller-indices-l1",
            LemmaCase::SmallerIndicesL2 => "smaller-indices-l2",
            LemmaCase::Shifting => "shifting",
            LemmaCase::IneqLemma4 => "ineq-lemma-4",
            LemmaCase::IneqLemma5 => "ineq-lemma-5",
            LemmaCase::BpdnInit => "bpdn-init",
        }
    }

    fn index(self) -> u64 {
        LemmaCase::ALL.iter().position(|&c| c == self).unwrap() as u64
    }
}

impl fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for LemmaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown lemma case {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaOptions {
    pub trials: usize,
    pub seed: u64,
    /// Self-test knob: each RHS is lowered by `p·(|LHS| + |RHS| + 1)`.
    /// Zero for a real check; 1 guarantees violations.
    pub perturbation: f64,
}

impl LemmaOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        LemmaOptions {
            trials,
            seed,
            perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub evaluated: usize,
    pub violations: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub case: LemmaCase,
    pub trials: usize,
    /// Trials for which no hypothesis-satisfying instance was found.
    pub rejected: usize,
    pub checks: Vec<BoundCheck>,
}

impl LemmaReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.min_slack).fold(f64::INFINITY, f64::min)
    }

    pub fn evaluated(&self) -> usize {
        self.trials - self.rejected
    }

    pub fn holds(&self) -> bool {
        self.violations() == 0
    }
}

type Sides = Vec<(&'static str, f64, f64)>;

pub fn check_lemma_bounds(case: LemmaCase, opts: &LemmaOptions) -> Result<LemmaReport> {
    let outcomes: Vec<Option<Sides>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(derive_seed(opts.seed, &[stream::LEMMA, case.index(), t as u64]));
            for _ in 0..MAX_ATTEMPTS {
                if let Some(sides) = draw(case, &mut rng)? {
                    return Ok(Some(sides));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;

    let mut checks: Vec<BoundCheck> = Vec::new();
    let mut rejected = 0;
    for outcome in outcomes {
        let Some(sides) = outcome else {
            rejected += 1;
            continue;
        };
        for (name, lhs, rhs) in sides {
            let slack = rhs - lhs - opts.perturbation * (lhs.abs() + rhs.abs() + 1.0);
            let idx = match checks.iter().position(|c| c.name == name) {
                Some(i) => i,
                None => {
                    checks.push(BoundCheck {
                        name: name.to_string(),
                        evaluated: 0,
                        violations: 0,
                        min_slack: f64::INFINITY,
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            c.evaluated += 1;
            c.min_slack = c.min_slack.min(slack);
            if !(slack >= -SLACK_TOL) {
                c.violations += 1;
            }
        }
    }
    Ok(LemmaReport {
        case,
        trials: opts.trials,
        rejected,
        checks,
    })
}

fn draw(case: LemmaCase, rng: &mut Rng) -> Result<Option<Sides>> {
    match case {
        LemmaCase::L1Pruning => pruning(rng, false),
        LemmaCase::L2Pruning => pruning(rng, true),
        LemmaCase::SmallerIndicesL1 => Ok(Some(smaller_indices(rng, false))),
        LemmaCase::SmallerIndicesL2 => Ok(Some(smaller_indices(rng, true))),
        LemmaCase::Shifting => Ok(Some(shifting(rng))),
        LemmaCase::IneqLemma4 => penalized_inequality(rng, Penalty::L1),
        LemmaCase::IneqLemma5 => penalized_inequality(rng, Penalty::L2),
        LemmaCase::BpdnInit => bpdn_init(rng),
    }
}

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_vector(rng: &mut Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * normal(rng))
}

/// First `m` rows of a random `n × n` orthogonal matrix, columns rescaled to
/// unit norm. Small matrices from this ensemble have much smaller restricted
/// isometry constants than Gaussian ones of the same shape. Needs `m ≤ n`.
pub fn frame_matrix(rng: &mut Rng, m: usize, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let mut a = g.qr().q().rows(0, m).into_owned();
    for mut c in a.column_iter_mut() {
        let nrm = c.norm();
        c /= nrm;
    }
    a
}

fn sorted_sample(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn sparse_vector(rng: &mut Rng, n: usize, s: usize) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for i in sorted_sample(rng, n, s) {
        x[i] = normal(rng);
    }
    x
}

/// Gaussian vector with a log-uniform scale in `[10^lo, 10^hi)`.
fn noise_vector(rng: &mut Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    let scale = log_uniform(rng, lo, hi);
    gaussian_vector(rng, n, scale)
}

fn log_uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn ric(a: &DMatrix<f64>, order: usize) -> Result<f64> {
    Ok(estimate_ric(a, order, EstimateMode::Exact, DEFAULT_BUDGET, 0)?.delta)
}

fn norm(v: &DVector<f64>, l2: bool) -> f64 {
    if l2 {
        v.norm()
    } else {
        norm1(v)
    }
}

/// Least squares on a support, and pruning of an estimate followed by a
/// refit (`N = 16`, `M = 12`, `s = 2`).
fn pruning(rng: &mut Rng, l2: bool) -> Result<Option<Sides>> {
    let (m, n, s1) = (12, 16, 2);
    let a = frame_matrix(rng, m, n);
    let s2 = rng.random_range(1..=3);
    let delta_12 = ric(&a, s1 + s2)?;
    let delta_2s = ric(&a, 2 * s1)?;
    if delta_12 >= 1.0 || delta_2s >= 1.0 {
        return Ok(None);
    }
    let delta_s2 = ric(&a, s2)?;
    let delta_s = ric(&a, s1)?;

    let x = sparse_vector(rng, n, s1);
    let sigma = if rng.random_bool(0.2) { 0.0 } else { log_uniform(rng, -3.0, -0.5) };
    let e = gaussian_vector(rng, m, sigma);
    let y = &a * &x + &e;
    let en = e.norm();

    let support = if s2 >= s1 && rng.random_bool(0.3) {
        let mut sup = supp(&x, s1);
        let rest = complement(&sup, n);
        for i in sorted_sample(rng, rest.len(), s2 - s1) {
            sup.push(rest[i]);
        }
        sup.sort_unstable();
        sup
    } else {
        sorted_sample(rng, n, s2)
    };
    let xbar = prune_ls(&a, &y, &support);
    let d = &x - &xbar;
    let d_s = restrict(&d, &support);
    let x_sc = restrict(&x, &complement(&support, n));
    let (s1f, s2f) = (s1 as f64, s2 as f64);

    let eps = en * (1.0 + rng.random_range(0.0..0.5));
    let x_tilde = &x + noise_vector(rng, n, -2.0, 0.0);
    let x_hat = prune_ls(&a, &y, &supp(&x_tilde, s1));
    let shrink = 1.0 - delta_2s * delta_2s;

    let sides = if l2 {
        vec![
            ("ls-on-support", d_s.norm(), delta_12 * d.norm() + (1.0 + delta_s2).sqrt() * en),
            (
                "ls-error",
                d.norm(),
                x_sc.norm() / (1.0 - delta_12 * delta_12).sqrt()
                    + (1.0 + delta_s2).sqrt() / (1.0 - delta_12) * en,
            ),
            (
                "prune-error",
                (&x - &x_hat).norm(),
                (2.0 / shrink).sqrt() * (&x - &x_tilde).norm()
                    + (1.0 + delta_s).sqrt() / (1.0 - delta_2s) * eps,
            ),
        ]
    } else {
        vec![
            (
                "ls-on-support",
                norm1(&d_s),
                s2f.sqrt() * delta_12 * norm1(&d) + (s2f * (1.0 + delta_s2)).sqrt() * en,
            ),
            (
                "ls-error",
                norm1(&d),
                ((s1f + s2f) / (1.0 - delta_12 * delta_12)).sqrt() * norm1(&x_sc)
                    + ((s1f + s2f) * (1.0 + delta_s2)).sqrt() / (1.0 - delta_12) * en,
            ),
            (
                "prune-error",
                norm1(&(&x - &x_hat)),
                (2.0 * s1f / shrink).sqrt() * norm1(&(&x - &x_tilde))
                    + (2.0 * s1f * (1.0 + delta_s)).sqrt() / (1.0 - delta_2s) * eps,
            ),
        ]
    };
    Ok(Some(sides))
}

/// Energy of `x` on the smallest entries of a sparse approximation `z`.
fn smaller_indices(rng: &mut Rng, l2: bool) -> Sides {
    let n = rng.random_range(6..=24);
    let s1 = rng.random_range(1..=4.min(n));
    let s2 = rng.random_range(s1..=n);
    let x = sparse_vector(rng, n, s1);
    let s2_set = sorted_sample(rng, n, s2);
    let sigma = log_uniform(rng, -2.0, 0.5);
    let mut z = DVector::zeros(n);
    for &i in &s2_set {
        z[i] = x[i] + sigma * normal(rng);
    }
    let top = supp(&z, s1);
    let nabla: Vec<usize> = s2_set.iter().copied().filter(|i| !top.contains(i)).collect();
    let diff = &x - &z;
    let factor = if l2 { 2f64.sqrt() } else { 1.0 };
    let on_s2 = factor * norm(&restrict(&diff, &s2_set), l2);
    vec![
        ("smallest-entries", norm(&restrict(&x, &nabla), l2), on_s2),
        ("restriction", on_s2, factor * norm(&diff, l2)),
    ]
}

/// Block partition `T₀, T_*, T₁, …` and the tail sum of block norms.
fn shifting(rng: &mut Rng) -> Sides {
    let n = rng.random_range(10..=40);
    let s = rng.random_range(1..=4);
    let a = rng.random_range(1..=4);
    let b = rng.random_range(a + 1..=4 * a);
    let x = sparse_vector(rng, n, s);
    let z = DVector::from_fn(n, |_, _| {
        let g: f64 = rng.sample(StandardNormal);
        g * rng.random_range(-3.0f64..3.0).exp()
    });
    let t0 = supp(&x, s);
    let mut rest = complement(&t0, n);
    rest.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j)));
    let lhs: f64 = rest[a.min(rest.len())..]
        .chunks(b)
        .map(|blk| blk.iter().map(|&i| z[i] * z[i]).sum::<f64>().sqrt())
        .sum();
    let rhs = rest.iter().map(|&i| z[i].abs()).sum::<f64>() / (b as f64).sqrt();
    vec![("block-tail", lhs, rhs)]
}

/// Cone-type inequalities satisfied by the exact penalized solution.
fn penalized_inequality(rng: &mut Rng, penalty: Penalty) -> Result<Option<Sides>> {
    let (m, n, s) = (12, 16, 2);
    let a = frame_matrix(rng, m, n);
    let mut x = sparse_vector(rng, n, s);
    if rng.random_bool(0.5) {
        x += noise_vector(rng, n, -3.0, -1.0);
    }
    let e = noise_vector(rng, m, -3.0, -1.0);
    let y = &a * &x + &e;
    let anchor = &x + noise_vector(rng, n, -2.0, 0.0);
    let lambda = rng.random_range(0.02..0.98);
    let problem = PenalizedBpdnProblem {
        a,
        y,
        epsilon: e.norm(),
        lambda,
        penalty,
        anchor: anchor.clone(),
    };
    let report = solve_penalized_bpdn(&problem, &SolverConfig::tight(), None)?;
    if !report.converged {
        return Ok(None);
    }
    let z = &report.x_hat - &x;
    let t0 = supp(&x, s);
    let t0c = complement(&t0, n);
    let z_t0 = norm1(&restrict(&z, &t0));
    let z_t0c = norm1(&restrict(&z, &t0c));
    let tail = norm1(&restrict(&x, &t0c));
    let mut sides = Vec::with_capacity(2);
    if lambda > 0.5 {
        let g = 2.0 * lambda - 1.0;
        sides.push(("lambda-above-half", z_t0c, z_t0 / g + 2.0 * lambda / g * tail));
    }
    let rhs = match penalty {
        Penalty::L1 => {
            (2.0 * lambda - 1.0) * z_t0
                + 2.0 * lambda * tail
                + 2.0 * (1.0 - lambda) * norm1(&(&x - &anchor))
        }
        _ => {
            (1.0 - (1.0 - lambda) / (lambda * (s as f64).sqrt())) * z_t0
                + 2.0 * tail
                + 2.0 * (1.0 - lambda) / lambda * (&x - &anchor).norm()
        }
    };
    sides.push(("any-lambda", z_t0c, rhs));
    Ok(Some(sides))
}

/// Error of the local BPDN solution (`N = 12`, `M = 10`, `s = 1`).
fn bpdn_init(rng: &mut Rng) -> Result<Option<Sides>> {
    let (m, n, s) = (10, 12, 1);
    let (pa, pb) = default_partition(s);
    let a = frame_matrix(rng, m, n);
    if ric(&a, s + pa)? >= 1.0 {
        return Ok(None);
    }
    let Some(inputs) = exact_bound_inputs(&a, s, pa, pb, 1.0, 1, DEFAULT_BUDGET)? else {
        return Ok(None);
    };
    let c = bound_constants(&inputs)?;
    if !c.flags.iterative_bound {
        return Ok(None);
    }
    let mut x = sparse_vector(rng, n, s);
    if rng.random_bool(0.5) {
        x += noise_vector(rng, n, -3.0, -1.0);
    }
    let e = noise_vector(rng, m, -3.0, -1.0);
    let y = &a * &x + &e;
    let eps = e.norm() * (1.0 + rng.random_range(0.0..0.3));
    let problem = PenalizedBpdnProblem::bpdn(a, y, eps);
    let report = solve_penalized_bpdn(&problem, &SolverConfig::tight(), None)?;
    if !report.converged {
        return Ok(None);
    }
    let tail = norm1(&restrict(&x, &complement(&supp(&x, s), n)));
    Ok(Some(vec![(
        "init-error",
        (&x - &report.x_hat).norm(),
        c.c12 * tail + c.c13 * eps,
    )]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in LemmaCase::ALL {
            assert_eq!(c.name().parse::<LemmaCase>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.name()));
        }
    }

    #[test]
    fn zero_trials_is_empty() {
        let r = check_lemma_bounds(LemmaCase::Shifting, &LemmaOptions::new(0, 1)).unwrap();
        assert!(r.checks.is_empty() && r.holds());
    }

    #[test]
    fn perturbation_forces_violations() {
        let mut o = LemmaOptions::new(5, 1);
        o.perturbation = 1.0;
        let r = check_lemma_bounds(LemmaCase::Shifting, &o).unwrap();
        assert_eq!(r.violations(), 5);
    }
}
