// SPDX-License-Identifier: Apache-2.0

//! Network topologies and right-stochastic weight matrices.
//!
//! A topology is a connected, undirected, `d`-regular graph on `L` nodes.
//! The network matrix `H` holds the link weight `h_lr` from node `r` to
//! node `l`; every row sums to one and `h_lr = 0` off the edge set (the
//! diagonal is allowed, which is how a node keeps trusting its own
//! previous estimate).

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Attempts allowed before [`generate_topology`] gives up.
pub const MAX_TOPOLOGY_ATTEMPTS: usize = 1000;

/// Row-sum tolerance for the right-stochastic invariant.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTopology {
    node_count: usize,
    degree: usize,
    /// Sorted, each pair `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Build from an explicit edge list, validating regularity and
    /// connectivity.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidParameter("topology needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i == j || i >= node_count || j >= node_count {
                return Err(Error::InvalidParameter(format!("invalid edge ({i}, {j})")));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidParameter(format!("duplicate edge ({i}, {j})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); node_count];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let degree = neighbors[0].len();
        if neighbors.iter().any(|n| n.len() != degree) {
            return Err(Error::InvalidParameter("graph is not regular".into()));
        }
        let topo = NetworkTopology {
            node_count,
            degree,
            edges,
            neighbors,
        };
        if !topo.is_connected() {
            return Err(Error::InvalidParameter("graph is not connected".into()));
        }
        Ok(topo)
    }

    /// The single-node topology (no edges). Useful for the degenerate
    /// `L = 1` case where `H = [1]`.
    pub fn single() -> Self {
        NetworkTopology {
            node_count: 1,
            degree: 0,
            edges: Vec::new(),
            neighbors: vec![Vec::new()],
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `l`, excluding `l` itself, ascending.
    pub fn neighbors(&self, l: usize) -> &[usize] {
        &self.neighbors[l]
    }

    /// The neighborhood set `N_l`, optionally including `l`.
    pub fn neighborhood(&self, l: usize, include_self: bool) -> Vec<usize> {
        let mut out = self.neighbors[l].clone();
        if include_self {
            out.push(l);
            out.sort_unstable();
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.node_count
    }
}

/// Generate a connected `d`-regular graph on `L` nodes by random stub
/// pairing. Collisions (self-pairs, repeated edges) are resampled; an
/// attempt that dead-ends or yields a disconnected graph is restarted.
pub fn generate_topology(node_count: usize, degree: usize, seed: u64) -> Result<NetworkTopology> {
    if node_count < 2 || degree == 0 || degree >= node_count || (node_count * degree) % 2 == 1 {
        return Err(Error::InfeasibleDegree {
            nodes: node_count,
            degree,
        });
    }
    let mut rng = rng_from(seed);
    for _ in 0..MAX_TOPOLOGY_ATTEMPTS {
        let Some(edges) = try_pairing(node_count, degree, &mut rng) else {
            continue;
        };
        if let Ok(topo) = NetworkTopology::from_edges(node_count, &edges) {
            return Ok(topo);
        }
    }
    Err(Error::ConnectivityFailure {
        nodes: node_count,
        degree,
        attempts: MAX_TOPOLOGY_ATTEMPTS,
    })
}

fn try_pairing(
    node_count: usize,
    degree: usize,
    rng: &mut crate::rng::Rng,
) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..node_count)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    stubs.shuffle(rng);
    let mut edges = BTreeSet::new();
    while !stubs.is_empty() {
        let valid = |a: usize, b: usize, edges: &BTreeSet<(usize, usize)>| {
            a != b && !edges.contains(&(a.min(b), a.max(b)))
        };
        let mut placed = false;
        for _ in 0..64 {
            let i = rng.random_range(0..stubs.len());
            let j = rng.random_range(0..stubs.len());
            if i != j && valid(stubs[i], stubs[j], &edges) {
                let (a, b) = (stubs[i], stubs[j]);
                edges.insert((a.min(b), a.max(b)));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                placed = true;
                break;
            }
        }
        if !placed {
            // Exhaustive check before declaring a dead end.
            let pair = (0..stubs.len())
                .flat_map(|i| (i + 1..stubs.len()).map(move |j| (i, j)))
                .find(|&(i, j)| valid(stubs[i], stubs[j], &edges));
            let (i, j) = pair?;
            let (a, b) = (stubs[i], stubs[j]);
            edges.insert((a.min(b), a.max(b)));
            stubs.swap_remove(j);
            stubs.swap_remove(i);
        }
    }
    Some(edges.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// Equal weight on every member of the neighborhood.
    Uniform,
    /// `U(0, 1)` weights on the neighborhood, rows normalized.
    RandomRowNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: WeightKind,
    /// Whether `l ∈ N_l`.
    #[serde(default = "default_true")]
    pub include_self: bool,
    /// Seed for [`WeightKind::RandomRowNormalized`].
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme {
            kind: WeightKind::Uniform,
            include_self: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMatrix {
    weights: DMatrix<f64>,
}

impl NetworkMatrix {
    /// Wrap an explicit weight matrix after checking it is square,
    /// non-negative and right stochastic.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::DimensionMismatch("network matrix must be square".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("network weights must be finite and >= 0".into()));
        }
        for (l, row) in weights.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "row {l} of network matrix sums to {sum}"
                )));
            }
        }
        Ok(NetworkMatrix { weights })
    }

    /// `H = I`: no cooperation.
    pub fn identity(node_count: usize) -> Self {
        NetworkMatrix {
            weights: DMatrix::identity(node_count, node_count),
        }
    }

    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, l: usize, r: usize) -> f64 {
        self.weights[(l, r)]
    }

    /// `(r, h_lr)` for every `r` with `h_lr > 0`, ascending in `r`.
    pub fn active_row(&self, l: usize) -> Vec<(usize, f64)> {
        (0..self.node_count())
            .filter_map(|r| {
                let h = self.weights[(l, r)];
                (h > 0.0).then_some((r, h))
            })
            .collect()
    }

    /// Number of length-`N` vectors node `l` receives per exchange round.
    pub fn incoming_links(&self, l: usize) -> usize {
        self.active_row(l).iter().filter(|(r, _)| *r != l).count()
    }

    /// Check that the sparsity pattern is compatible with `topology`.
    pub fn matches(&self, topology: &NetworkTopology) -> bool {
        let n = self.node_count();
        if n != topology.node_count() {
            return false;
        }
        (0..n).all(|l| {
            (0..n).all(|r| {
                r == l || self.weights[(l, r)] == 0.0 || topology.neighbors(l).contains(&r)
            })
        })
    }
}

/// Build the weight matrix for `topology` under `scheme`.
pub fn build_network_matrix(topology: &NetworkTopology, scheme: &WeightScheme) -> NetworkMatrix {
    let n = topology.node_count();
    let mut weights = DMatrix::zeros(n, n);
    let mut rng = rng_from(scheme.seed);
    for l in 0..n {
        let hood = topology.neighborhood(l, scheme.include_self || topology.degree() == 0);
        match scheme.kind {
            WeightKind::Uniform => {
                let w = 1.0 / hood.len() as f64;
                for &r in &hood {
                    weights[(l, r)] = w;
                }
            }
            WeightKind::RandomRowNormalized => {
                // Open interval keeps every neighborhood link active.
                let raw: Vec<f64> = hood
                    .iter()
                    .map(|_| rng.random_range(f64::EPSILON..1.0))
                    .collect();
                let sum: f64 = raw.iter().sum();
                for (&r, w) in hood.iter().zip(raw) {
                    weights[(l, r)] = w / sum;
                }
            }
        }
        // Push any rounding residue onto the largest entry of the row.
        let sum: f64 = weights.row(l).iter().sum();
        let (imax, _) = hood
            .iter()
            .map(|&r| (r, weights[(l, r)]))
            .fold((hood[0], f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        weights[(l, imax)] += 1.0 - sum;
    }
    NetworkMatrix { weights }
}

/// JSON form: `{"L":…, "d":…, "edges":[[i,j],…], "H":[[…],…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkJson {
    #[serde(rename = "L")]
    pub node_count: usize,
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
}

impl NetworkJson {
    pub fn new(topology: &NetworkTopology, matrix: &NetworkMatrix) -> Self {
        NetworkJson {
            node_count: topology.node_count(),
            d: topology.degree(),
            edges: topology.edges().iter().map(|&(i, j)| [i, j]).collect(),
            h: matrix
                .weights()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }

    pub fn into_parts(self) -> Result<(NetworkTopology, NetworkMatrix)> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let topology = if self.node_count == 1 {
            NetworkTopology::single()
        } else {
            NetworkTopology::from_edges(self.node_count, &edges)?
        };
        let n = self.node_count;
        if self.h.len() != n || self.h.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("H must be L x L".into()));
        }
        let matrix =
            NetworkMatrix::from_weights(DMatrix::from_fn(n, n, |i, j| self.h[i][j]))?;
        if !matrix.matches(&topology) {
            return Err(Error::InvalidParameter("H has weight outside the edge set".into()));
        }
        Ok((topology, matrix))
    }
}
