//! Competing-risks trial generator and Monte-Carlo study runner.
//!
//! A [`ScenarioSpec`] holds four hazards (AE/CE × group A/B), the per-group
//! size and optional uniform censoring. Event times are drawn by inverting
//! the all-cause cumulative hazard; censoring bounds are calibrated so that
//! a target fraction of observations is censored. [`run_study`] repeats the
//! trial, evaluates every estimator and variance at the realized follow-up
//! times and aggregates bias summaries against the Aalen-Johansen estimator.

mod catalog;
mod hazard;
mod sampler;
mod study;

pub use catalog::{builtin_catalog, builtin_scenario, parse_catalog, BUILTIN_CATALOG_TEXT};
pub use hazard::HazardSpec;
pub use sampler::{calibrate_censoring, generate_trial, sample_event, true_cif};
pub use study::{
    run_study, FiveNumber, ProbabilityCell, RelativeRiskCell, Series, StudySummary,
    VarianceSpreadCell,
};

use alloc::string::String;
use core::fmt;

use crate::model::Group;
use crate::variance::VarianceError;

/// Uniform censoring: times are drawn from U(0, bound), with the bound
/// calibrated so that P(C < T) hits the target fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoringSpec {
    /// Desired fraction of censored observations, in (0, 1).
    pub target: f64,
    /// Calibrated upper bound of the uniform distribution. Filled by
    /// [`calibrate_censoring`] (or carried in the scenario catalog) before
    /// trials can be generated.
    pub bound: Option<f64>,
}

/// One simulation scenario: four hazards, group size, optional censoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: String,
    pub hazard_ae_a: HazardSpec,
    pub hazard_ce_a: HazardSpec,
    pub hazard_ae_b: HazardSpec,
    pub hazard_ce_b: HazardSpec,
    pub n_per_group: u32,
    pub censoring_a: Option<CensoringSpec>,
    pub censoring_b: Option<CensoringSpec>,
}

impl ScenarioSpec {
    pub fn hazards(&self, group: Group) -> (&HazardSpec, &HazardSpec) {
        match group {
            Group::A => (&self.hazard_ae_a, &self.hazard_ce_a),
            Group::B => (&self.hazard_ae_b, &self.hazard_ce_b),
        }
    }

    pub fn censoring(&self, group: Group) -> Option<&CensoringSpec> {
        match group {
            Group::A => self.censoring_a.as_ref(),
            Group::B => self.censoring_b.as_ref(),
        }
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        self.hazard_ae_a.validate()?;
        self.hazard_ce_a.validate()?;
        self.hazard_ae_b.validate()?;
        self.hazard_ce_b.validate()?;
        if self.n_per_group == 0 {
            return Err(SimulateError::InvalidScenario("n_per_group must be positive"));
        }
        for censoring in [&self.censoring_a, &self.censoring_b].into_iter().flatten() {
            if !(censoring.target > 0.0 && censoring.target < 1.0) {
                return Err(SimulateError::InvalidScenario(
                    "censoring target must lie in (0, 1)",
                ));
            }
            if let Some(bound) = censoring.bound {
                if !(bound.is_finite() && bound > 0.0) {
                    return Err(SimulateError::InvalidScenario(
                        "censoring bound must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fills in any missing censoring bounds by calibration.
    pub fn calibrate(&mut self) -> Result<(), SimulateError> {
        self.validate()?;
        for group in [Group::A, Group::B] {
            let target = match self.censoring(group) {
                Some(c) if c.bound.is_none() => c.target,
                _ => continue,
            };
            let bound = calibrate_censoring(self, group, target)?;
            let slot = match group {
                Group::A => &mut self.censoring_a,
                Group::B => &mut self.censoring_b,
            };
            if let Some(c) = slot {
                c.bound = Some(bound);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulateError {
    /// A power hazard a·t^b with b ≤ −1 has no finite cumulative hazard.
    UnintegrableForm { exponent: f64 },
    /// Hazard parameters that make the hazard negative, or other bad fields.
    InvalidScenario(&'static str),
    /// The all-cause cumulative hazard never reaches the sampled level.
    RootNotBracketed,
    /// No uniform censoring bound can reach the requested fraction.
    TargetUnreachable,
    /// Censoring was requested but no bound is calibrated yet.
    CensoringNotCalibrated { group: Group },
    /// A study needs at least two runs.
    TooFewRuns,
    /// Malformed scenario catalog input.
    CatalogParse { line: usize, message: String },
    Variance(VarianceError),
}

impl fmt::Display for SimulateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulateError::UnintegrableForm { exponent } => {
                write!(f, "power hazard with exponent {exponent} has no finite integral")
            }
            SimulateError::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
            SimulateError::RootNotBracketed => {
                f.write_str("event-time equation has no bracketable root")
            }
            SimulateError::TargetUnreachable => {
                f.write_str("censoring target cannot be reached by a uniform bound")
            }
            SimulateError::CensoringNotCalibrated { group } => {
                write!(f, "group {group}: censoring target set but bound not calibrated")
            }
            SimulateError::TooFewRuns => f.write_str("a study needs at least 2 runs"),
            SimulateError::CatalogParse { line, message } => {
                write!(f, "catalog line {line}: {message}")
            }
            SimulateError::Variance(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SimulateError {}

impl From<VarianceError> for SimulateError {
    fn from(e: VarianceError) -> Self {
        SimulateError::Variance(e)
    }
}
