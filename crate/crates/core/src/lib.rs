// SPDX-License-Identifier: Apache-2.0

//! Locally convex distributed sparse recovery over networks.
//!
//! Every node `l` of a connected network observes `y_l = A_l x + e_l` and
//! solves a basis-pursuit-denoising program augmented with a penalty that
//! pulls its estimate toward the weighted blend of its neighbors' previous
//! estimates. The crate provides:
//!
//! * [`network`]: connected regular topologies and right-stochastic weights,
//! * [`instance`]: synthetic sparse signals and noisy per-node observations,
//! * [`convex_core`]: the per-node convex solve plus prox/projection primitives,
//! * [`algorithms`]: BPDN, NBPDN-1/2, pruned NBPDN-1/2 and the D-LASSO baseline,
//! * [`analysis`]: brute-force RIC/ROC estimation, bound constants and
//!   numerical checks of the error recurrences,
//! * [`metrics`]: mSENR and support recovery statistics,
//! * [`experiment`]: config-driven runs backing the `nbpdn` binary.

pub mod algorithms;
pub mod analysis;
pub mod convex_core;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
