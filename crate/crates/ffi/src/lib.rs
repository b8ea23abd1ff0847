// SPDX-License-Identifier: Apache-2.0

//! C ABI over `nbpdn`.
//!
//! Objects are opaque heap handles created by `*_new`/`*_generate` functions
//! and released with the matching `*_free`. Every fallible call returns an
//! [`NbpdnStatus`]; on failure a message for the calling thread is
//! available from [`nbpdn_last_error`]. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use nbpdn::algorithms::{run_algorithm, AlgorithmConfig, AlgorithmKind, RecordLevel, RunTrace};
use nbpdn::analysis::{bound_constants, estimate_ric, BoundInputs, EstimateMode, DEFAULT_BUDGET};
use nbpdn::convex_core::SolverConfig;
use nbpdn::instance::{generate_observations, generate_signal, ProblemInstance};
use nbpdn::metrics::msenr;
use nbpdn::network::{build_network_matrix, generate_topology, NetworkMatrix, WeightScheme};
use nbpdn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbpdnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InfeasibleDegree = 3,
    ConnectivityFailure = 4,
    InvalidSparsity = 5,
    DimensionMismatch = 6,
    BudgetExceeded = 7,
    InvalidPartition = 8,
    MaxItersExceeded = 9,
    Config = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbpdnAlgorithm {
    Bpdn = 0,
    Nbpdn1 = 1,
    Nbpdn2 = 2,
    Pnbpdn1 = 3,
    Pnbpdn2 = 4,
    Dlasso = 5,
}

impl From<NbpdnAlgorithm> for AlgorithmKind {
    fn from(a: NbpdnAlgorithm) -> Self {
        match a {
            NbpdnAlgorithm::Bpdn => AlgorithmKind::Bpdn,
            NbpdnAlgorithm::Nbpdn1 => AlgorithmKind::Nbpdn1,
            NbpdnAlgorithm::Nbpdn2 => AlgorithmKind::Nbpdn2,
            NbpdnAlgorithm::Pnbpdn1 => AlgorithmKind::Pnbpdn1,
            NbpdnAlgorithm::Pnbpdn2 => AlgorithmKind::Pnbpdn2,
            NbpdnAlgorithm::Dlasso => AlgorithmKind::Dlasso,
        }
    }
}

/// Opaque problem instance.
pub struct NbpdnInstance(ProblemInstance);

/// Opaque network matrix.
pub struct NbpdnNetwork(NetworkMatrix);

/// Opaque run trace.
pub struct NbpdnTrace(RunTrace);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NbpdnBoundInputs {
    pub delta_sa: f64,
    pub delta_2s: f64,
    pub delta_s: f64,
    pub theta: f64,
    pub lambda: f64,
    pub s: usize,
    pub a: usize,
    pub b: usize,
    pub k: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NbpdnBoundConstants {
    /// `c[0]` is c1, …, `c[14]` is c15.
    pub c: [f64; 15],
    /// `d[0]` is d1, …, `d[3]` is d4.
    pub d: [f64; 4],
    pub fixed_eps: f64,
    pub fixed_tail: f64,
    pub pruned_fixed_eps: f64,
    pub pruned_l1_eps: f64,
    pub pruned_l2_eps: f64,
    pub fixed_bound_valid: bool,
    pub recurrence_l1_valid: bool,
    pub recurrence_l2_valid: bool,
    pub iterative_bound_valid: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NbpdnStatus {
    match e {
        Error::InfeasibleDegree { .. } => NbpdnStatus::InfeasibleDegree,
        Error::ConnectivityFailure { .. } => NbpdnStatus::ConnectivityFailure,
        Error::InvalidSparsity { .. } => NbpdnStatus::InvalidSparsity,
        Error::DimensionMismatch(_) => NbpdnStatus::DimensionMismatch,
        Error::InvalidParameter(_) => NbpdnStatus::InvalidArgument,
        Error::MaxItersExceeded { .. } => NbpdnStatus::MaxItersExceeded,
        Error::BudgetExceeded { .. } => NbpdnStatus::BudgetExceeded,
        Error::InvalidPartition { .. } => NbpdnStatus::InvalidPartition,
        Error::Config(_) | Error::Json(_) => NbpdnStatus::Config,
        Error::Io(_) => NbpdnStatus::Io,
    }
}

enum Fail {
    Null,
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NbpdnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NbpdnStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument");
            NbpdnStatus::NullPointer
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(&m);
            NbpdnStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            NbpdnStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = value;
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(Fail::Null);
    }
    if len < src.len() {
        return Err(Fail::Arg(format!("buffer holds {len} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nbpdn_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"",
    };
    V.as_ptr()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nbpdn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Random `s`-sparse signal of length `n` observed by `nodes` nodes with
/// `m` Gaussian measurements each. A non-finite `snr_db` means noiseless.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_generate(
    n: usize,
    s: usize,
    nodes: usize,
    m: usize,
    snr_db: f64,
    seed: u64,
    out: *mut *mut NbpdnInstance,
) -> NbpdnStatus {
    guard(|| {
        let signal = generate_signal(n, s, seed)?;
        let snr = if snr_db.is_finite() { snr_db } else { f64::INFINITY };
        let inst = generate_observations(&signal, nodes, m, snr, seed)?;
        put(out, NbpdnInstance(inst))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_free(inst: *mut NbpdnInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_dim(inst: *const NbpdnInstance, out: *mut usize) -> NbpdnStatus {
    guard(|| write(out, deref(inst)?.0.dim()))
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_node_count(
    inst: *const NbpdnInstance,
    out: *mut usize,
) -> NbpdnStatus {
    guard(|| write(out, deref(inst)?.0.node_count()))
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_epsilon(inst: *const NbpdnInstance, out: *mut f64) -> NbpdnStatus {
    guard(|| write(out, deref(inst)?.0.epsilon))
}

/// Copy the true signal into `buf` (at least `dim` entries).
#[no_mangle]
pub unsafe extern "C" fn nbpdn_instance_signal(
    inst: *const NbpdnInstance,
    buf: *mut f64,
    len: usize,
) -> NbpdnStatus {
    guard(|| copy_out(deref(inst)?.0.signal.values.as_slice(), buf, len))
}

/// Random connected `degree`-regular network with uniform weights
/// including self loops.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_network_generate(
    nodes: usize,
    degree: usize,
    seed: u64,
    out: *mut *mut NbpdnNetwork,
) -> NbpdnStatus {
    guard(|| {
        let topo = generate_topology(nodes, degree, seed)?;
        put(out, NbpdnNetwork(build_network_matrix(&topo, &WeightScheme::default())))
    })
}

/// `H = I`: no cooperation.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_network_identity(nodes: usize, out: *mut *mut NbpdnNetwork) -> NbpdnStatus {
    guard(|| {
        if nodes == 0 {
            return Err(Fail::Arg("nodes must be >= 1".into()));
        }
        put(out, NbpdnNetwork(NetworkMatrix::identity(nodes)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_network_free(net: *mut NbpdnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Run `algorithm` for `max_iters` outer iterations with default solver
/// settings. Pruned variants use the instance's sparsity.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_run(
    inst: *const NbpdnInstance,
    net: *const NbpdnNetwork,
    algorithm: NbpdnAlgorithm,
    lambda: f64,
    max_iters: usize,
    out: *mut *mut NbpdnTrace,
) -> NbpdnStatus {
    guard(|| {
        let inst = &deref(inst)?.0;
        let net = &deref(net)?.0;
        let cfg = AlgorithmConfig::new(algorithm.into(), lambda, max_iters).with_sparsity(inst.signal.sparsity);
        let trace = run_algorithm(inst, net, &cfg, &SolverConfig::default(), RecordLevel::Summary)?;
        put(out, NbpdnTrace(trace))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbpdn_trace_free(trace: *mut NbpdnTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded iterations, `K + 1` (row 0 is the initialization).
#[no_mangle]
pub unsafe extern "C" fn nbpdn_trace_iterations(trace: *const NbpdnTrace, out: *mut usize) -> NbpdnStatus {
    guard(|| write(out, deref(trace)?.0.iterations()))
}

/// `‖x − x̂_{l,k}‖₂`.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_trace_error(
    trace: *const NbpdnTrace,
    k: usize,
    l: usize,
    out: *mut f64,
) -> NbpdnStatus {
    guard(|| {
        let t = &deref(trace)?.0;
        let v = t
            .err_l2
            .get(k)
            .and_then(|row| row.get(l))
            .ok_or_else(|| Fail::Arg(format!("(k, l) = ({k}, {l}) out of range")))?;
        write(out, *v)
    })
}

/// Final estimate of node `l` into `buf` (at least `dim` entries).
#[no_mangle]
pub unsafe extern "C" fn nbpdn_trace_final_estimate(
    trace: *const NbpdnTrace,
    l: usize,
    buf: *mut f64,
    len: usize,
) -> NbpdnStatus {
    guard(|| {
        let t = &deref(trace)?.0;
        let x = t
            .final_estimates
            .get(l)
            .ok_or_else(|| Fail::Arg(format!("node {l} out of range")))?;
        copy_out(x.as_slice(), buf, len)
    })
}

/// mSENR in dB of a single trace at iteration `k` (`+inf` on exact recovery).
#[no_mangle]
pub unsafe extern "C" fn nbpdn_trace_msenr_db(trace: *const NbpdnTrace, k: usize, out: *mut f64) -> NbpdnStatus {
    guard(|| {
        let t = &deref(trace)?.0;
        write(out, msenr(&[t], k)?.db)
    })
}

/// Evaluate every bound constant and validity flag.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_bound_constants(
    inputs: *const NbpdnBoundInputs,
    out: *mut NbpdnBoundConstants,
) -> NbpdnStatus {
    guard(|| {
        let i = deref(inputs)?;
        let c = bound_constants(&BoundInputs {
            delta_sa: i.delta_sa,
            delta_2s: i.delta_2s,
            delta_s: i.delta_s,
            theta: i.theta,
            lambda: i.lambda,
            s: i.s,
            a: i.a,
            b: i.b,
            k: i.k,
        })?;
        let named = c.named();
        let mut r = NbpdnBoundConstants::default();
        for (dst, (_, v)) in r.c.iter_mut().chain(r.d.iter_mut()).zip(named) {
            *dst = v;
        }
        r.fixed_eps = c.fixed_eps;
        r.fixed_tail = c.fixed_tail;
        r.pruned_fixed_eps = c.pruned_fixed_eps;
        r.pruned_l1_eps = c.pruned_l1_eps;
        r.pruned_l2_eps = c.pruned_l2_eps;
        r.fixed_bound_valid = c.flags.fixed_bound;
        r.recurrence_l1_valid = c.flags.recurrence_l1;
        r.recurrence_l2_valid = c.flags.recurrence_l2;
        r.iterative_bound_valid = c.flags.iterative_bound;
        write(out, r)
    })
}

/// Exact `δ_s` of the row-major `m × n` matrix at `data`.
#[no_mangle]
pub unsafe extern "C" fn nbpdn_estimate_ric(
    data: *const f64,
    m: usize,
    n: usize,
    s: usize,
    out: *mut f64,
) -> NbpdnStatus {
    guard(|| {
        if data.is_null() {
            return Err(Fail::Null);
        }
        if m == 0 || n == 0 {
            return Err(Fail::Arg("empty matrix".into()));
        }
        let vals = std::slice::from_raw_parts(data, m * n);
        let a = DMatrix::from_row_slice(m, n, vals);
        write(out, estimate_ric(&a, s, EstimateMode::Exact, DEFAULT_BUDGET, 0)?.delta)
    })
}
