//! Adverse-event probability estimation under right-censoring and competing
//! events.
//!
//! In a two-arm trial each subject either experiences the adverse event of
//! interest (AE), a competing event (CE) that precludes the AE, or is censored.
//! This crate implements five estimators of the AE probability at a follow-up
//! time τ, their model-based and nonparametric-bootstrap variances, relative
//! risk comparisons between two groups, and a competing-risks trial simulator
//! for bias studies:
//!
//! * incidence proportion (`ip`)
//! * probability transform of the incidence density (`ptid`)
//! * one minus Kaplan-Meier (`km`)
//! * Aalen-Johansen (`aj`)
//! * probability transform of the incidence density accounting for CEs
//!   (`ptidce`)
//!
//! The crate is `no_std`-compatible (an allocator is required; enable the
//! `libm` feature instead of the default `std`). All randomized routines are
//! seedable and deterministic: ChaCha8 streams are keyed per work item so
//! results do not depend on thread count or scheduling.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("aeprob-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod compare;
pub mod estimators;
mod math;
pub mod model;
pub mod simulate;
#[cfg(test)]
pub(crate) mod testutil;
pub mod variance;

pub use compare::{
    compare_at_tauset, log_rr_interval, normal_quantile, relative_risk, CompareError,
    ComparisonRow, RelativeRisk, VarianceSource,
};
pub use estimators::{
    aalen_johansen, evaluate, incidence_density, incidence_proportion, nelson_aalen_increments,
    one_minus_km, pt_incidence_density, pt_incidence_density_ce, Estimate, EstimatorError,
    EstimatorKind, EventKind, StepFunction,
};
pub use model::{
    empirical_quantile, follow_up_times, validate_cohort, Cohort, FollowUpPolicy, Group,
    ModelError, Status, SubjectRecord, TauSet,
};
pub use simulate::{
    calibrate_censoring, generate_trial, run_study, sample_event, true_cif, CensoringSpec,
    HazardSpec, ScenarioSpec, SimulateError, StudySummary,
};
pub use variance::{
    bootstrap_variance, model_variance, var_aj, var_id, var_ip, var_km_greenwood, var_pt_id,
    var_pt_id_ce, BootstrapConfig, VarianceError,
};
