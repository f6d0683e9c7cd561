//! Model-based variance estimators for each point estimator and a seedable
//! nonparametric bootstrap alternative.
//!
//! The bootstrap resamples subjects with replacement within one group,
//! holding τ fixed at its original-data value. Replicate `i` draws from a
//! dedicated ChaCha8 stream keyed by `(seed, i)`, so results are bit-identical
//! across runs and across thread counts.

use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::estimators::{
    evaluate, incidence_density, incidence_proportion, EstimatorError, EstimatorKind, EventKind,
};
use crate::math;
use crate::model::Cohort;

/// Replicate count and seed for the nonparametric bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    replicates: u32,
    seed: u64,
}

pub const DEFAULT_REPLICATES: u32 = 1000;

impl BootstrapConfig {
    /// A sample variance needs at least two replicates.
    pub fn new(replicates: u32, seed: u64) -> Result<Self, VarianceError> {
        if replicates < 2 {
            return Err(VarianceError::TooFewReplicates);
        }
        Ok(BootstrapConfig { replicates, seed })
    }

    /// The default replicate budget of 1000.
    pub fn with_seed(seed: u64) -> Self {
        BootstrapConfig { replicates: DEFAULT_REPLICATES, seed }
    }

    pub fn replicates(&self) -> u32 {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceError {
    TooFewReplicates,
    /// More than 10x the replicate budget of resampling attempts failed.
    TooManyDegenerateReplicates,
    /// Bootstrap variance was requested without a bootstrap configuration.
    MissingBootstrapConfig,
    Estimator(EstimatorError),
}

impl fmt::Display for VarianceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarianceError::TooFewReplicates => {
                f.write_str("bootstrap needs at least 2 replicates")
            }
            VarianceError::TooManyDegenerateReplicates => {
                f.write_str("too many degenerate bootstrap replicates")
            }
            VarianceError::MissingBootstrapConfig => {
                f.write_str("bootstrap variance requested without replicates/seed")
            }
            VarianceError::Estimator(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for VarianceError {}

impl From<EstimatorError> for VarianceError {
    fn from(e: EstimatorError) -> Self {
        VarianceError::Estimator(e)
    }
}

/// Binomial variance of the incidence proportion: IP(1−IP)/n.
pub fn var_ip(cohort: &Cohort, tau: f64) -> f64 {
    let p = incidence_proportion(cohort, tau).value;
    p * (1.0 - p) / f64::from(cohort.n())
}

/// Variance of an incidence density: events over squared person-time.
pub fn var_id(cohort: &Cohort, tau: f64, event: EventKind) -> Result<f64, EstimatorError> {
    let person_time = cohort.person_time(tau);
    if person_time <= 0.0 {
        return Err(EstimatorError::ZeroPersonTime);
    }
    Ok(f64::from(cohort.event_count(event, tau)) / (person_time * person_time))
}

/// Delta-method variance of the probability transform:
/// τ²·exp(−τ·ID)²·var(ID).
pub fn var_pt_id(cohort: &Cohort, tau: f64) -> Result<f64, EstimatorError> {
    let id = incidence_density(cohort, tau, EventKind::Ae)?;
    let v = var_id(cohort, tau, EventKind::Ae)?;
    let damp = math::exp(-(tau * id));
    Ok(tau * tau * damp * damp * v)
}

/// Greenwood variance of the Kaplan-Meier estimator:
/// KM(τ)² · Σ_{u≤τ} d(u)/(Y(u)·(Y(u)−d(u))).
///
/// When every subject at risk has an AE at some time u ≤ τ the product hits
/// zero; the limit convention makes the total variance 0 at and beyond u.
pub fn var_km_greenwood(cohort: &Cohort, tau: f64) -> f64 {
    let mut km = 1.0_f64;
    let mut sum = 0.0_f64;
    for row in cohort.rows() {
        if row.time > tau {
            break;
        }
        if row.ae == 0 {
            continue;
        }
        if row.ae == row.at_risk {
            return 0.0;
        }
        let y = f64::from(row.at_risk);
        let d = f64::from(row.ae);
        sum += d / (y * (y - d));
        km *= 1.0 - d / y;
    }
    km * km * sum
}

/// Greenwood-type variance of the Aalen-Johansen estimator.
///
/// Propagates the covariance of (all-cause survival, CIF) through each jump
/// with the delta method, using the multinomial covariance of the observed
/// hazard increments; for a single event type this recursion unrolls exactly
/// to the Greenwood formula.
pub fn var_aj(cohort: &Cohort, tau: f64) -> f64 {
    let mut surv = 1.0_f64;
    let mut v_ss = 0.0_f64;
    let mut v_sf = 0.0_f64;
    let mut v_ff = 0.0_f64;
    for row in cohort.rows() {
        if row.time > tau {
            break;
        }
        if row.ae + row.ce == 0 {
            continue;
        }
        let y = f64::from(row.at_risk);
        let h1 = f64::from(row.ae) / y;
        let h2 = f64::from(row.ce) / y;
        let c11 = h1 * (1.0 - h1) / y;
        let c22 = h2 * (1.0 - h2) / y;
        let c12 = -h1 * h2 / y;
        let keep = 1.0 - h1 - h2;
        let ss = keep * keep * v_ss + surv * surv * (c11 + 2.0 * c12 + c22);
        let sf = keep * h1 * v_ss + keep * v_sf - surv * surv * (c11 + c12);
        let ff = h1 * h1 * v_ss + 2.0 * h1 * v_sf + v_ff + surv * surv * c11;
        v_ss = ss;
        v_sf = sf;
        v_ff = ff;
        surv *= keep;
    }
    v_ff.max(0.0)
}

/// Delta-method variance of the probability transform accounting for CEs.
///
/// With Φ(x, y) = x/(x+y)·(1−exp(−τ(x+y))) evaluated at the two incidence
/// densities, returns (∂Φ/∂x)²·var(ID_AE) + (∂Φ/∂y)²·var(ID_CE). Returns 0
/// when both densities are zero (the transform is constant there).
pub fn var_pt_id_ce(cohort: &Cohort, tau: f64) -> Result<f64, EstimatorError> {
    let id_ae = incidence_density(cohort, tau, EventKind::Ae)?;
    let id_ce = incidence_density(cohort, tau, EventKind::Ce)?;
    let var_ae = var_id(cohort, tau, EventKind::Ae)?;
    let var_ce = var_id(cohort, tau, EventKind::Ce)?;
    Ok(pt_id_ce_variance(id_ae, id_ce, var_ae, var_ce, tau))
}

/// The plug-in delta-method formula on raw densities; overflow-safe form of
/// the two gradient factors.
pub(crate) fn pt_id_ce_variance(
    id_ae: f64,
    id_ce: f64,
    var_ae: f64,
    var_ce: f64,
    tau: f64,
) -> f64 {
    let total = id_ae + id_ce;
    if total == 0.0 {
        return 0.0;
    }
    let x = tau * total;
    let damp = math::exp(-x);
    let sq = total * total;
    // exp(−x)·(ID_CE·(exp(x)−1) + τ·ID_AE·ID•)/ID•², with exp(−x)·(exp(x)−1)
    // folded to 1−exp(−x) so large x cannot overflow.
    let d_ae = (id_ce * (1.0 - damp) + damp * tau * id_ae * total) / sq;
    // ID_AE·exp(−x)·(x − exp(x) + 1)/ID•², folded the same way.
    let d_ce = id_ae * (damp * (x + 1.0) - 1.0) / sq;
    d_ae * d_ae * var_ae + d_ce * d_ce * var_ce
}

/// The model-based variance matching the named estimator.
pub fn model_variance(
    cohort: &Cohort,
    tau: f64,
    estimator: EstimatorKind,
) -> Result<f64, EstimatorError> {
    match estimator {
        EstimatorKind::IncidenceProportion => Ok(var_ip(cohort, tau)),
        EstimatorKind::PtIncidenceDensity => var_pt_id(cohort, tau),
        EstimatorKind::OneMinusKaplanMeier => Ok(var_km_greenwood(cohort, tau)),
        EstimatorKind::AalenJohansen => Ok(var_aj(cohort, tau)),
        EstimatorKind::PtIncidenceDensityCe => var_pt_id_ce(cohort, tau),
    }
}

/// ChaCha8 keyed to a dedicated stream per work item.
pub(crate) fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer for deriving independent child seeds.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Nonparametric bootstrap variance of the named estimator at a fixed τ.
///
/// Resamples n subjects with replacement, re-evaluates the estimator per
/// replicate and returns the sample variance. Deterministic given the seed.
/// Replicates on which the estimator is undefined are redrawn from later
/// streams, capped at 10x the replicate budget.
pub fn bootstrap_variance(
    cohort: &Cohort,
    tau: f64,
    estimator: EstimatorKind,
    config: &BootstrapConfig,
) -> Result<f64, VarianceError> {
    let values = bootstrap_values(cohort, tau, estimator, config)?;
    Ok(sample_variance(&values))
}

fn bootstrap_values(
    cohort: &Cohort,
    tau: f64,
    estimator: EstimatorKind,
    config: &BootstrapConfig,
) -> Result<Vec<f64>, VarianceError> {
    let budget = config.replicates as usize;
    let attempt = |i: u64| -> Option<f64> {
        let mut rng = replicate_rng(config.seed, i);
        let sample = cohort.resample(&mut rng);
        evaluate(&sample, tau, estimator).ok().map(|e| e.value)
    };

    // Estimators are defined on every resample of a valid cohort at τ > 0,
    // so the first pass over streams 0..B is expected to fill the budget.
    #[cfg(feature = "parallel")]
    let first: Vec<Option<f64>> = {
        use rayon::prelude::*;
        (0..budget as u64).into_par_iter().map(attempt).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let first: Vec<Option<f64>> = (0..budget as u64).map(attempt).collect();

    if first.iter().all(Option::is_some) {
        return Ok(first.into_iter().flatten().collect());
    }

    // Redraw pass: first B successes in stream order, identical to what the
    // fast path yields when nothing fails.
    let cap = (budget as u64).saturating_mul(10);
    let mut values = Vec::with_capacity(budget);
    let mut i = 0;
    while values.len() < budget && i < cap {
        if let Some(v) = attempt(i) {
            values.push(v);
        }
        i += 1;
    }
    if values.len() < budget {
        return Err(VarianceError::TooManyDegenerateReplicates);
    }
    Ok(values)
}

/// Two-pass sample variance over replicate order, so the reduction does not
/// depend on scheduling.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    ss / (n - 1.0)
}
