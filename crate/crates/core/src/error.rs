// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible degree: no {degree}-regular graph on {nodes} nodes")]
    InfeasibleDegree { nodes: usize, degree: usize },

    #[error("no connected {degree}-regular graph on {nodes} nodes found after {attempts} attempts")]
    ConnectivityFailure {
        nodes: usize,
        degree: usize,
        attempts: usize,
    },

    #[error("invalid sparsity {sparsity} for dimension {dim}")]
    InvalidSparsity { sparsity: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver did not converge within {iters} iterations at node {node:?}")]
    MaxItersExceeded { iters: usize, node: Option<usize> },

    #[error("combinatorial budget exceeded: {needed} supports > budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("invalid partition: need a < b <= 4a, got a = {a}, b = {b}")]
    InvalidPartition { a: usize, b: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InfeasibleDegree { .. } => "infeasible_degree",
            Error::ConnectivityFailure { .. } => "connectivity_failure",
            Error::InvalidSparsity { .. } => "invalid_sparsity",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MaxItersExceeded { .. } => "max_iters_exceeded",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::InvalidPartition { .. } => "invalid_partition",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
