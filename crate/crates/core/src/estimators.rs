//! The five AE-probability point estimators and the Nelson-Aalen increment
//! machinery they share.
//!
//! All estimators are step functions of τ, evaluated right-continuously, and
//! plateau beyond the last observed event time. Two exact identities are
//! preserved bit for bit, not just to rounding error:
//!
//! * without censored observations up to τ, the Aalen-Johansen estimator
//!   equals the incidence proportion;
//! * 1−KM ≥ AJ everywhere, with equality whenever no competing event
//!   precedes τ.
//!
//! Both fall out of the same accumulation scheme: the survival-over-risk
//! ratio S(u−)/Y(u) is carried as a fraction of integer-valued floats, whose
//! update factor is exactly 1 across rows where the risk set shrinks only by
//! the events that discount the survival product.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::model::Cohort;

/// Which competing-risks transition an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// The adverse event of interest.
    Ae,
    /// The competing event.
    Ce,
}

/// The five AE-probability estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Incidence proportion: AE count over group size.
    IncidenceProportion,
    /// Probability transform of the incidence density, 1 − exp(−ID·τ).
    PtIncidenceDensity,
    /// One minus the Kaplan-Meier estimator (CEs censor follow-up).
    OneMinusKaplanMeier,
    /// Aalen-Johansen estimator of the cumulative incidence function.
    AalenJohansen,
    /// Probability transform of the incidence density accounting for CEs.
    PtIncidenceDensityCe,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::IncidenceProportion,
        EstimatorKind::PtIncidenceDensity,
        EstimatorKind::OneMinusKaplanMeier,
        EstimatorKind::AalenJohansen,
        EstimatorKind::PtIncidenceDensityCe,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::IncidenceProportion => "ip",
            EstimatorKind::PtIncidenceDensity => "ptid",
            EstimatorKind::OneMinusKaplanMeier => "km",
            EstimatorKind::AalenJohansen => "aj",
            EstimatorKind::PtIncidenceDensityCe => "ptidce",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A right-continuous nondecreasing step function given by its jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    increments: Vec<f64>,
}

impl StepFunction {
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    /// Sum of all increments at jump times ≤ t.
    pub fn value(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (time, inc) in self.jump_times.iter().zip(&self.increments) {
            if *time > t {
                break;
            }
            total += inc;
        }
        total
    }
}

/// A point estimate of the AE probability at time τ, with optional variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimator: EstimatorKind,
    pub tau: f64,
    pub value: f64,
    pub variance_model: Option<f64>,
    pub variance_bootstrap: Option<f64>,
}

impl Estimate {
    fn new(estimator: EstimatorKind, tau: f64, value: f64) -> Self {
        Estimate { estimator, tau, value, variance_model: None, variance_bootstrap: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorError {
    /// Σ min(t_i, τ) is zero, so no incidence density exists (τ ≤ 0).
    ZeroPersonTime,
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::ZeroPersonTime => f.write_str("person-time at risk is zero"),
        }
    }
}

impl core::error::Error for EstimatorError {}

/// Nelson-Aalen increments for the requested transition: at each unique time
/// with events, (event count)/(at risk), where the risk set counts every
/// subject with observed time ≥ u regardless of status.
pub fn nelson_aalen_increments(cohort: &Cohort, event: EventKind) -> StepFunction {
    let mut jump_times = Vec::new();
    let mut increments = Vec::new();
    for row in cohort.rows() {
        let count = match event {
            EventKind::Ae => row.ae,
            EventKind::Ce => row.ce,
        };
        if count > 0 {
            jump_times.push(row.time);
            increments.push(f64::from(count) / f64::from(row.at_risk));
        }
    }
    StepFunction { jump_times, increments }
}

/// Incidence proportion: (Σ_{u ≤ τ} d(u)) / n. Estimates the probability of
/// an observed AE in [0, τ]; ignores censoring.
pub fn incidence_proportion(cohort: &Cohort, tau: f64) -> Estimate {
    let count = cohort.event_count(EventKind::Ae, tau);
    let value = f64::from(count) / f64::from(cohort.n());
    Estimate::new(EstimatorKind::IncidenceProportion, tau, value)
}

/// Incidence density (rate per time unit): events up to τ over person-time
/// Σ min(t_i, τ).
pub fn incidence_density(
    cohort: &Cohort,
    tau: f64,
    event: EventKind,
) -> Result<f64, EstimatorError> {
    let person_time = cohort.person_time(tau);
    if person_time <= 0.0 {
        return Err(EstimatorError::ZeroPersonTime);
    }
    Ok(f64::from(cohort.event_count(event, tau)) / person_time)
}

/// Probability transform of the AE incidence density: 1 − exp(−ID(τ)·τ).
pub fn pt_incidence_density(cohort: &Cohort, tau: f64) -> Result<Estimate, EstimatorError> {
    let id = incidence_density(cohort, tau, EventKind::Ae)?;
    let value = 1.0 - math::exp(-(id * tau));
    Ok(Estimate::new(EstimatorKind::PtIncidenceDensity, tau, value))
}

/// One minus Kaplan-Meier: 1 − Π_{u ≤ τ} (1 − ΔΛ̂_AE(u)). Competing events
/// contribute to risk sets but not to AE increments.
pub fn one_minus_km(cohort: &Cohort, tau: f64) -> Estimate {
    let (km, _) = km_aj_values(cohort, tau);
    Estimate::new(EstimatorKind::OneMinusKaplanMeier, tau, km)
}

/// Aalen-Johansen estimator of the cumulative incidence function:
/// Σ_{u ≤ τ} Π_{v < u} (1 − ΔΛ̂_AE(v) − ΔΛ̂_CE(v)) · ΔΛ̂_AE(u).
///
/// The survival product uses the strict left limit, so a CE tied with an AE
/// at u does not discount the AE contribution at u.
pub fn aalen_johansen(cohort: &Cohort, tau: f64) -> Estimate {
    let (_, aj) = km_aj_values(cohort, tau);
    Estimate::new(EstimatorKind::AalenJohansen, tau, aj)
}

/// Probability transform of the incidence density accounting for CEs:
/// ID_AE/ID• · (1 − exp(−τ·ID•)) with ID• = ID_AE + ID_CE; 0 when both
/// densities are 0.
pub fn pt_incidence_density_ce(cohort: &Cohort, tau: f64) -> Result<Estimate, EstimatorError> {
    let id_ae = incidence_density(cohort, tau, EventKind::Ae)?;
    let id_ce = incidence_density(cohort, tau, EventKind::Ce)?;
    let total = id_ae + id_ce;
    let value = if total == 0.0 {
        0.0
    } else {
        id_ae / total * (1.0 - math::exp(-(total * tau)))
    };
    Ok(Estimate::new(EstimatorKind::PtIncidenceDensityCe, tau, value))
}

/// Evaluates the named estimator at τ.
pub fn evaluate(
    cohort: &Cohort,
    tau: f64,
    estimator: EstimatorKind,
) -> Result<Estimate, EstimatorError> {
    match estimator {
        EstimatorKind::IncidenceProportion => Ok(incidence_proportion(cohort, tau)),
        EstimatorKind::PtIncidenceDensity => pt_incidence_density(cohort, tau),
        EstimatorKind::OneMinusKaplanMeier => Ok(one_minus_km(cohort, tau)),
        EstimatorKind::AalenJohansen => Ok(aalen_johansen(cohort, tau)),
        EstimatorKind::PtIncidenceDensityCe => pt_incidence_density_ce(cohort, tau),
    }
}

/// Computes 1−KM and AJ in one pass.
///
/// Both are sums Σ_u V(u)·d(u) with V(u) = S(u−)/Y(u) and the respective
/// survival product. V is carried as num/den of integer-valued floats. The
/// update factor of the AJ ratio is survivors/next-at-risk, an exact 1 except
/// at censoring rows, so censoring-free prefixes accumulate as a single
/// D·num/den term and reproduce the incidence proportion bit for bit. 1−KM is
/// accumulated as AJ plus Σ_u d(u)·(V_km(u) − V_aj(u)); the gap terms are
/// exactly zero before the first CE and strictly dominate rounding noise
/// after it, which pins 1−KM ≥ AJ on every input.
fn km_aj_values(cohort: &Cohort, tau: f64) -> (f64, f64) {
    let n = f64::from(cohort.n());
    let mut aj_num = 1.0_f64;
    let mut aj_den = n;
    let mut pending = 0.0_f64;
    let mut aj = 0.0_f64;
    let mut km_num = 1.0_f64;
    let mut km_den = n;
    let mut gap = 0.0_f64;

    for row in cohort.rows() {
        if row.time > tau {
            break;
        }
        if row.ae > 0 {
            let d = f64::from(row.ae);
            pending += d;
            gap += d * (km_num / km_den - aj_num / aj_den).max(0.0);
        }
        let next = row.at_risk - row.ae - row.ce - row.censored;
        let aj_survivors = row.at_risk - row.ae - row.ce;
        if aj_survivors != next {
            aj += pending * aj_num / aj_den;
            pending = 0.0;
            aj_num *= f64::from(aj_survivors);
            aj_den *= f64::from(next);
            if aj_den > 1e280 {
                aj_num /= aj_den;
                aj_den = 1.0;
            }
        }
        let km_survivors = row.at_risk - row.ae;
        if km_survivors != next {
            km_num *= f64::from(km_survivors);
            km_den *= f64::from(next);
            if km_den > 1e280 {
                km_num /= km_den;
                km_den = 1.0;
            }
        }
    }
    if pending > 0.0 {
        aj += pending * aj_num / aj_den;
    }
    let aj = aj.min(1.0);
    let km = (aj + gap).min(1.0);
    (km, aj)
}
