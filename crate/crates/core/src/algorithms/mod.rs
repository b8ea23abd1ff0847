// SPDX-License-Identifier: Apache-2.0

//! Distributed outer iterations: BPDN, NBPDN-1/2, pruned NBPDN-1/2 and the
//! D-LASSO consensus baseline.
//!
//! Every run records iteration `k = 0` (the initialization) followed by
//! `K` outer iterations, so a trace has `K + 1` rows per node. Within one
//! outer iteration nodes only read the estimates of iteration `k − 1`.

mod dlasso;
mod nbpdn;
mod trace;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::convex_core::{Penalty, SolverConfig};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::network::NetworkMatrix;

pub use dlasso::{default_lasso_weight, run_dlasso, DEFAULT_CONSENSUS_RHO};
pub use nbpdn::{run_bpdn, run_nbpdn, run_pnbpdn};
pub use trace::{write_trace_csv, RecordLevel, RunTrace, TraceRow, TRACE_CSV_HEADER};
pub(crate) use trace::{fmt_db, Recorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "BPDN")]
    Bpdn,
    #[serde(rename = "NBPDN1")]
    Nbpdn1,
    #[serde(rename = "NBPDN2")]
    Nbpdn2,
    #[serde(rename = "pNBPDN1")]
    Pnbpdn1,
    #[serde(rename = "pNBPDN2")]
    Pnbpdn2,
    #[serde(rename = "DLASSO")]
    Dlasso,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::Bpdn,
        AlgorithmKind::Nbpdn1,
        AlgorithmKind::Nbpdn2,
        AlgorithmKind::Pnbpdn1,
        AlgorithmKind::Pnbpdn2,
        AlgorithmKind::Dlasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Bpdn => "BPDN",
            AlgorithmKind::Nbpdn1 => "NBPDN1",
            AlgorithmKind::Nbpdn2 => "NBPDN2",
            AlgorithmKind::Pnbpdn1 => "pNBPDN1",
            AlgorithmKind::Pnbpdn2 => "pNBPDN2",
            AlgorithmKind::Dlasso => "DLASSO",
        }
    }

    pub fn is_pruned(self) -> bool {
        matches!(self, AlgorithmKind::Pnbpdn1 | AlgorithmKind::Pnbpdn2)
    }

    /// Penalty `g` of the cooperative variants.
    pub fn penalty(self) -> Penalty {
        match self {
            AlgorithmKind::Nbpdn1 | AlgorithmKind::Pnbpdn1 => Penalty::L1,
            AlgorithmKind::Nbpdn2 | AlgorithmKind::Pnbpdn2 => Penalty::L2,
            AlgorithmKind::Bpdn | AlgorithmKind::Dlasso => Penalty::None,
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DlassoParams {
    /// ℓ1 weight of the network LASSO; `None` means `σ·√(2 log N)`.
    pub lasso_weight: Option<f64>,
    /// Consensus ADMM penalty; `None` means 1.0.
    pub consensus_rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub lambda: f64,
    /// Required by the pruned variants.
    pub sparsity: Option<usize>,
    pub max_outer_iters: usize,
    /// Overrides the instance's ε when set.
    pub epsilon: Option<f64>,
    pub dlasso: DlassoParams,
    /// Stop once every node moves less than `1e-8` between iterations; the
    /// remaining rows repeat the final estimates.
    pub early_stop: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Nbpdn2,
            lambda: 0.1,
            sparsity: None,
            max_outer_iters: 30,
            epsilon: None,
            dlasso: DlassoParams::default(),
            early_stop: false,
        }
    }
}

pub const EARLY_STOP_TOL: f64 = 1e-8;

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind, lambda: f64, max_outer_iters: usize) -> Self {
        AlgorithmConfig {
            kind,
            lambda,
            max_outer_iters,
            ..Default::default()
        }
    }

    pub fn with_sparsity(mut self, s: usize) -> Self {
        self.sparsity = Some(s);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be >= 1".into()));
        }
        if self.kind.is_pruned() {
            match self.sparsity {
                Some(s) if (1..=dim).contains(&s) => {}
                Some(s) => return Err(Error::InvalidSparsity { sparsity: s, dim }),
                None => return Err(Error::Config(format!("{} needs a sparsity level", self.kind))),
            }
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0) {
                return Err(Error::Config("epsilon must be >= 0".into()));
            }
        }
        if let Some(w) = self.dlasso.lasso_weight {
            if !(w >= 0.0) {
                return Err(Error::Config("lasso_weight must be >= 0".into()));
            }
        }
        if let Some(r) = self.dlasso.consensus_rho {
            if !(r > 0.0) {
                return Err(Error::Config("consensus_rho must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// `x́_l = Σ_r h_lr x̂_r` over the entries with `h_lr > 0`.
pub fn blend_neighbors(h: &NetworkMatrix, estimates: &[DVector<f64>], l: usize) -> DVector<f64> {
    let n = estimates[l].len();
    let mut out = DVector::zeros(n);
    for (r, w) in h.active_row(l) {
        out.axpy(w, &estimates[r], 1.0);
    }
    out
}

/// Vectors transmitted per outer iteration: `Σ_l |{r ≠ l : h_lr > 0}|`.
pub fn exchange_count(h: &NetworkMatrix) -> usize {
    (0..h.node_count()).map(|l| h.incoming_links(l)).sum()
}

/// Dispatch on `config.kind`.
pub fn run_algorithm(
    instance: &ProblemInstance,
    h: &NetworkMatrix,
    config: &AlgorithmConfig,
    solver: &SolverConfig,
    record: RecordLevel,
) -> Result<RunTrace> {
    match config.kind {
        AlgorithmKind::Bpdn => run_bpdn(instance, h, config, solver, record),
        AlgorithmKind::Nbpdn1 | AlgorithmKind::Nbpdn2 => run_nbpdn(instance, h, config, solver, record),
        AlgorithmKind::Pnbpdn1 | AlgorithmKind::Pnbpdn2 => {
            run_pnbpdn(instance, h, config, solver, record)
        }
        AlgorithmKind::Dlasso => run_dlasso(instance, h, config, solver, record),
    }
}

fn check_network(instance: &ProblemInstance, h: &NetworkMatrix) -> Result<()> {
    if h.node_count() != instance.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "network has {} nodes, instance has {}",
            h.node_count(),
            instance.node_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network_matrix, NetworkTopology, WeightScheme};

    #[test]
    fn identity_blend_returns_own_estimate() {
        let h = NetworkMatrix::identity(3);
        let est: Vec<_> = (0..3).map(|i| DVector::from_element(4, i as f64)).collect();
        for l in 0..3 {
            assert_eq!(blend_neighbors(&h, &est, l), est[l]);
        }
    }

    #[test]
    fn uniform_triangle_blend_is_the_mean() {
        let t = NetworkTopology::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let h = build_network_matrix(&t, &WeightScheme::default());
        let est = vec![
            DVector::from_vec(vec![3.0, 0.0]),
            DVector::from_vec(vec![0.0, 6.0]),
            DVector::from_vec(vec![3.0, 3.0]),
        ];
        for l in 0..3 {
            let b = blend_neighbors(&h, &est, l);
            assert!((b - DVector::from_vec(vec![2.0, 3.0])).amax() <= 1e-15);
        }
        assert_eq!(exchange_count(&h), 6);
    }

    #[test]
    fn identical_neighbors_blend_to_the_same_vector() {
        let t = NetworkTopology::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let h = build_network_matrix(
            &t,
            &WeightScheme {
                kind: crate::network::WeightKind::RandomRowNormalized,
                include_self: true,
                seed: 9,
            },
        );
        let v = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let est = vec![v.clone(); 4];
        for l in 0..4 {
            assert!((blend_neighbors(&h, &est, l) - &v).amax() <= 1e-15);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in AlgorithmKind::ALL {
            assert_eq!(k.name().parse::<AlgorithmKind>().unwrap(), k);
            let js = serde_json::to_string(&k).unwrap();
            assert_eq!(js, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn pruned_configs_need_sparsity() {
        let c = AlgorithmConfig::new(AlgorithmKind::Pnbpdn1, 0.1, 5);
        assert!(c.validate(10).is_err());
        assert!(c.clone().with_sparsity(3).validate(10).is_ok());
        assert!(c.with_sparsity(11).validate(10).is_err());
    }
}
