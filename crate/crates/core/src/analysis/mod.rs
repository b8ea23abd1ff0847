// SPDX-License-Identifier: Apache-2.0

//! Restricted isometry estimates, bound constants and empirical checks of
//! the supporting inequalities.

mod bounds;
mod lemmas;
mod recurrence;
mod ric;
mod verify;

pub use bounds::{
    bound_constants, default_partition, fixed_bound_frontier, fixed_bound_frontier_closed,
    fixed_bound_frontier_rounded, geometric_sum, iterative_bound_frontier, BoundConstants,
    BoundInputs, ValidityFlags,
};
pub use lemmas::{
    check_lemma_bounds, frame_matrix, BoundCheck, LemmaCase, LemmaOptions, LemmaReport,
};
pub use recurrence::{
    check_recurrence, exact_bound_inputs, node_constants, RecurrenceReport, RecurrenceVariant,
    SLACK_TOL,
};
pub use ric::{
    binomial, combinations, estimate_ric, estimate_roc, EstimateMode, RipEstimate, RocEstimate,
    DEFAULT_BUDGET,
};
pub use verify::{
    recurrence_instance, recurrence_suite, run_verification, RecurrenceSummary, VerifyOptions,
    VerifyReport, RECURRENCE_ITERS, RECURRENCE_LAMBDA, RECURRENCE_SHAPE, RECURRENCE_SNR_DB,
};
