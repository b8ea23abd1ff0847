// SPDX-License-Identifier: Apache-2.0

//! Synthetic problem instances: `y_l = A_l x + e_l` at every node.
//!
//! `A_l` has i.i.d. `N(0, 1/M_l)` entries, so columns have unit expected
//! norm. The noise at each node is i.i.d. Gaussian with variance chosen so
//! that `E‖e_l‖² = ‖x‖² · 10^(-snr/10)`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, stream};

/// Relative tolerance of the construction identity `y = A x + e`.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub values: DVector<f64>,
    /// Nominal support, ascending.
    pub support: Vec<usize>,
    pub sparsity: usize,
}

impl SparseSignal {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `true` when the signal is zero exactly off its nominal support.
    pub fn is_exactly_sparse(&self) -> bool {
        let mut on = vec![false; self.dim()];
        for &i in &self.support {
            on[i] = true;
        }
        self.values
            .iter()
            .enumerate()
            .all(|(i, v)| on[i] || *v == 0.0)
    }
}

fn check_sparsity(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { sparsity: s, dim: n });
    }
    Ok(())
}

/// Exactly `s`-sparse Gaussian signal: support uniform without replacement,
/// non-zeros i.i.d. standard normal.
pub fn generate_signal(n: usize, s: usize, seed: u64) -> Result<SparseSignal> {
    check_sparsity(n, s)?;
    let mut rng = rng_from(derive_seed(seed, &[stream::SIGNAL]));
    let mut support = sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut values = DVector::zeros(n);
    for &i in &support {
        values[i] = rng.sample::<f64, _>(StandardNormal);
    }
    Ok(SparseSignal {
        values,
        support,
        sparsity: s,
    })
}

/// Approximately sparse signal: a Gaussian `s`-sparse core plus small
/// off-support entries decaying as `tail_scale · j^(-decay)` (random sign,
/// random placement).
pub fn generate_compressible_signal(
    n: usize,
    s: usize,
    tail_scale: f64,
    decay: f64,
    seed: u64,
) -> Result<SparseSignal> {
    let mut signal = generate_signal(n, s, seed)?;
    let mut rng = rng_from(derive_seed(seed, &[stream::SIGNAL, 1]));
    let off = crate::linalg::complement(&signal.support, n);
    let order = sample(&mut rng, off.len(), off.len()).into_vec();
    for (j, &k) in order.iter().enumerate() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        signal.values[off[k]] = sign * tail_scale * ((j + 1) as f64).powf(-decay);
    }
    Ok(signal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeObservation {
    pub y: DVector<f64>,
    pub a: DMatrix<f64>,
    /// Realized noise, kept for diagnostics and the realized ε bound.
    pub noise: DVector<f64>,
}

impl NodeObservation {
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Relative residual of `y - (A x + e)`.
    pub fn identity_residual(&self, x: &DVector<f64>) -> f64 {
        let r = &self.y - (&self.a * x + &self.noise);
        r.norm() / (1.0 + self.y.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonPolicy {
    /// `max_l ‖e_l‖`: the realized noise bound, so `‖e_l‖ ≤ ε` always holds.
    #[default]
    Realized,
    /// `σ √(M + 2 √(M log L))`: what a system that never sees `e` would use.
    Statistical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub signal: SparseSignal,
    pub observations: Vec<NodeObservation>,
    pub epsilon: f64,
    /// `f64::INFINITY` for noiseless instances.
    pub snr_db: f64,
    /// Per-node noise standard deviation used at generation.
    pub noise_std: f64,
    pub epsilon_policy: EpsilonPolicy,
    pub seed: u64,
}

impl ProblemInstance {
    /// Assemble an instance from explicit parts, checking dimensions and the
    /// construction identity.
    pub fn from_parts(
        signal: SparseSignal,
        observations: Vec<NodeObservation>,
        epsilon: f64,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidParameter("instance needs at least one node".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let n = signal.dim();
        for (l, obs) in observations.iter().enumerate() {
            if obs.a.ncols() != n || obs.y.len() != obs.a.nrows() || obs.noise.len() != obs.y.len()
            {
                return Err(Error::DimensionMismatch(format!("node {l} observation")));
            }
            if obs.identity_residual(&signal.values) > IDENTITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "node {l} violates y = A x + e"
                )));
            }
        }
        Ok(ProblemInstance {
            signal,
            observations,
            epsilon,
            snr_db: f64::INFINITY,
            noise_std: 0.0,
            epsilon_policy: EpsilonPolicy::Realized,
            seed: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.observations.len()
    }

    pub fn dim(&self) -> usize {
        self.signal.dim()
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db.is_infinite()
    }

    /// Replace ε (e.g. to apply the statistical policy or a manual bound).
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Generate per-node observations with a common row count `m`.
pub fn generate_observations(
    signal: &SparseSignal,
    nodes: usize,
    m: usize,
    snr_db: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    generate_observations_sized(signal, &vec![m; nodes], snr_db, EpsilonPolicy::Realized, seed)
}

/// Generate observations with per-node row counts `rows[l]`.
pub fn generate_observations_sized(
    signal: &SparseSignal,
    rows: &[usize],
    snr_db: f64,
    policy: EpsilonPolicy,
    seed: u64,
) -> Result<ProblemInstance> {
    if rows.is_empty() || rows.contains(&0) {
        return Err(Error::InvalidParameter("every node needs M_l >= 1".into()));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("invalid snr_db {snr_db}")));
    }
    let n = signal.dim();
    let noiseless = snr_db == f64::INFINITY;
    let energy = signal.values.norm_squared();
    let mut rng = rng_from(derive_seed(seed, &[stream::OBSERVATIONS]));
    let mut observations = Vec::with_capacity(rows.len());
    let mut max_std: f64 = 0.0;
    for &m in rows {
        let scale = 1.0 / (m as f64).sqrt();
        let a = DMatrix::from_fn(m, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let noise = if noiseless {
            DVector::zeros(m)
        } else {
            let std = (energy * 10f64.powf(-snr_db / 10.0) / m as f64).sqrt();
            max_std = max_std.max(std);
            DVector::from_fn(m, |_, _| std * rng.sample::<f64, _>(StandardNormal))
        };
        let y = &a * &signal.values + &noise;
        observations.push(NodeObservation { y, a, noise });
    }
    let mut inst = ProblemInstance {
        signal: signal.clone(),
        observations,
        epsilon: 0.0,
        snr_db,
        noise_std: max_std,
        epsilon_policy: policy,
        seed,
    };
    inst.epsilon = match policy {
        EpsilonPolicy::Realized => epsilon_for(&inst),
        EpsilonPolicy::Statistical => statistical_epsilon(&inst),
    };
    Ok(inst)
}

/// Realized noise bound `max_l ‖e_l‖₂`.
pub fn epsilon_for(instance: &ProblemInstance) -> f64 {
    instance
        .observations
        .iter()
        .map(|o| o.noise.norm())
        .fold(0.0, f64::max)
}

/// Statistical bound `σ √(M + 2 √(M log L))` using the largest `M_l`.
pub fn statistical_epsilon(instance: &ProblemInstance) -> f64 {
    if instance.is_noiseless() {
        return 0.0;
    }
    let m = instance
        .observations
        .iter()
        .map(|o| o.rows())
        .max()
        .unwrap_or(0) as f64;
    let l = instance.node_count().max(1) as f64;
    instance.noise_std * (m + 2.0 * (m * l.ln()).sqrt()).sqrt()
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 8] = b"NBPDNINS";
const FORMAT_VERSION: u32 = 1;

/// Header of the binary container. Arrays follow in this order, all
/// little-endian `f64`: `x` (N), then per node `A_l` (row-major, M_l×N),
/// `y_l` (M_l), `e_l` (M_l).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub n: usize,
    pub s: usize,
    pub rows: Vec<usize>,
    pub support: Vec<usize>,
    pub seed: u64,
    /// `null` for noiseless instances.
    pub snr_db: Option<f64>,
    pub epsilon: f64,
    pub noise_std: f64,
    pub epsilon_policy: EpsilonPolicy,
    pub layout: String,
}

impl InstanceHeader {
    fn of(inst: &ProblemInstance) -> Self {
        InstanceHeader {
            n: inst.dim(),
            s: inst.signal.sparsity,
            rows: inst.observations.iter().map(|o| o.rows()).collect(),
            support: inst.signal.support.clone(),
            seed: inst.seed,
            snr_db: inst.snr_db.is_finite().then_some(inst.snr_db),
            epsilon: inst.epsilon,
            noise_std: inst.noise_std,
            epsilon_policy: inst.epsilon_policy,
            layout: "x;[A_l row-major;y_l;e_l]*".into(),
        }
    }
}

fn write_f64s<'a, W: Write>(w: &mut W, values: impl Iterator<Item = &'a f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_binary<W: Write>(inst: &ProblemInstance, w: &mut W) -> Result<()> {
    let header = serde_json::to_vec(&InstanceHeader::of(inst))?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(&header)?;
    write_f64s(w, inst.signal.values.iter())?;
    for obs in &inst.observations {
        write_f64s(w, obs.a.transpose().iter())?;
        write_f64s(w, obs.y.iter())?;
        write_f64s(w, obs.noise.iter())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(r: &mut R) -> Result<ProblemInstance> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter("not an instance container".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(Error::InvalidParameter(format!("unsupported container version {version}")));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut header)?;
    let header: InstanceHeader = serde_json::from_slice(&header)?;
    let n = header.n;
    let values = DVector::from_vec(read_f64s(r, n)?);
    let mut observations = Vec::with_capacity(header.rows.len());
    for &m in &header.rows {
        let a = DMatrix::from_row_slice(m, n, &read_f64s(r, m * n)?);
        let y = DVector::from_vec(read_f64s(r, m)?);
        let noise = DVector::from_vec(read_f64s(r, m)?);
        observations.push(NodeObservation { y, a, noise });
    }
    let signal = SparseSignal {
        values,
        support: header.support,
        sparsity: header.s,
    };
    let mut inst = ProblemInstance::from_parts(signal, observations, header.epsilon)?;
    inst.snr_db = header.snr_db.unwrap_or(f64::INFINITY);
    inst.noise_std = header.noise_std;
    inst.epsilon_policy = header.epsilon_policy;
    inst.seed = header.seed;
    Ok(inst)
}

/// Plain JSON form for small instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub header: InstanceHeader,
    pub x: Vec<f64>,
    /// Per node: `A` as rows, `y`, `e`.
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub e: Vec<f64>,
}

impl InstanceJson {
    pub fn new(inst: &ProblemInstance) -> Self {
        InstanceJson {
            header: InstanceHeader::of(inst),
            x: inst.signal.values.iter().copied().collect(),
            nodes: inst
                .observations
                .iter()
                .map(|o| NodeJson {
                    a: o.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    y: o.y.iter().copied().collect(),
                    e: o.noise.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        let n = self.header.n;
        let observations = self
            .nodes
            .into_iter()
            .map(|node| {
                let m = node.y.len();
                if node.a.len() != m || node.a.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch("node matrix shape".into()));
                }
                Ok(NodeObservation {
                    a: DMatrix::from_fn(m, n, |i, j| node.a[i][j]),
                    y: DVector::from_vec(node.y),
                    noise: DVector::from_vec(node.e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.x.len() != n {
            return Err(Error::DimensionMismatch("signal length".into()));
        }
        let signal = SparseSignal {
            values: DVector::from_vec(self.x),
            support: self.header.support,
            sparsity: self.header.s,
        };
        let mut inst = ProblemInstance::from_parts(signal, observations, self.header.epsilon)?;
        inst.snr_db = self.header.snr_db.unwrap_or(f64::INFINITY);
        inst.noise_std = self.header.noise_std;
        inst.epsilon_policy = self.header.epsilon_policy;
        inst.seed = self.header.seed;
        Ok(inst)
    }
}
